import json

import pytest

from newton_forge.app import main
from newton_forge.modules.experiments import SUITES, Experiments, fixture_rng
from newton_forge.utils.import_export import export_json, import_network, import_parts


def dicts(checks):
    return [check.to_dict() for check in checks]


def test_fixture_rng_is_keyed_by_suite_and_index():
    first = fixture_rng(7, 'synthesis', 3).integers(1 << 30)
    assert first == fixture_rng(7, 'synthesis', 3).integers(1 << 30)
    assert first != fixture_rng(7, 'synthesis', 4).integers(1 << 30)
    with pytest.raises(ValueError):
        fixture_rng(7, 'unknown', 0)


def test_decomposition_suite_is_independent_of_jobs():
    serial = Experiments.decomposition_suite(11, jobs=1, count=8)
    threaded = Experiments.decomposition_suite(11, jobs=2, count=8)
    assert dicts(serial) == dicts(threaded)
    assert all(check.passed for check in serial)
    assert [check.sort_key() for check in serial] == sorted(check.sort_key() for check in serial)


def test_synthesis_suite_small():
    checks = Experiments.synthesis_suite(5, count=3, points=20)
    assert checks and all(check.passed for check in checks)
    assert {check.fixture for check in checks} == {'planar_000', 'planar_001', 'planar_002'}


def test_indecomposable_suite_small():
    checks = Experiments.indecomposable_suite(5, triangles=4)
    assert all(check.passed for check in checks)


def test_same_seed_same_report():
    first = Experiments.verify(['indecomposable'], seed=3).to_dict()
    second = Experiments.verify(['indecomposable'], seed=3).to_dict()
    assert first == second
    assert first['results']['suites'] == ['indecomposable']
    assert 'timing' not in first


def test_timing_only_on_request():
    report = Experiments.verify(['indecomposable'], seed=3, timing=True)
    assert list(report.timing) == ['indecomposable']


def test_unknown_suite():
    with pytest.raises(ValueError):
        Experiments.run_suite('nonsense', 1)
    assert 'oracles' in SUITES


@pytest.mark.slow
def test_games_suite_passes():
    checks = Experiments.games_suite(1, jobs=2, max_radius=6)
    assert all(check.passed for check in checks)


def test_build_then_eval(tmp_path, capsys):
    target = tmp_path / 'm3.json'
    assert main(['build', 'mn', '--n', '3', '--out', str(target)]) == 0
    assert import_network(target).kind == 'monotone'
    capsys.readouterr()

    assert main(['eval', str(target), '--x', '1,1,1']) == 0
    report = json.loads(capsys.readouterr().out)
    assert report['results']['value']['exact'] == '3'
    assert report['results']['depth'] == 3


def test_check_isotonic_fails_for_max2(samples, capsys):
    assert main(['check', 'isotonic', str(samples / 'max2.json')]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report['passed'] is False
    assert report['fixtures'] == ['max2']


def test_check_monotone_passes_for_m3(samples):
    assert main(['check', 'monotone', str(samples / 'm3.json')]) == 0


def test_malformed_input_exits_with_an_error(tmp_path, capsys):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"input_dim": 2, "gates": [{"op": "relu", "in": 7}], "output": 2}', encoding='utf-8')
    assert main(['eval', str(broken), '--x', '1,1']) == 2
    error = json.loads(capsys.readouterr().out)
    assert error['error'] == 'InputFormatError'


def test_decompose_writes_parts(tmp_path, samples):
    target = tmp_path / 'parts.json'
    assert main(['decompose', str(samples / 'hexagon.json'), '--out', str(target)]) == 0
    assert len(import_parts(target)) == 3


def test_report_commands_write_the_report(tmp_path, capsys):
    target = tmp_path / 'iso.json'
    csv = tmp_path / 'iso.csv'
    assert main(['iso-scan', '--r', '1', '--out', str(target), '--csv', str(csv)]) == 0
    assert capsys.readouterr().out == ''
    report = json.loads(target.read_text(encoding='utf-8'))
    assert report['passed'] is True
    assert csv.read_text(encoding='utf-8').startswith('suite,fixture,check')


def test_inapprox_on_the_horizon_example(samples, capsys):
    assert main(['inapprox', str(samples / 'horizon_example.json')]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report['results']['horizon']['horizon']['exact'] == '4'


def test_game_checks_serialize():
    checks = Experiments.separator_check(2, 6) + Experiments.greedy_check(2)
    data = json.loads(export_json([check.to_dict() for check in checks]))
    assert data[0]['detail']['selections'] >= 1
    assert data[1]['detail']['max_branching'] <= 6


def test_extraction_checks_pass():
    checks = Experiments.extraction_checks()
    assert [check.passed for check in checks] == [True, True]


def test_duality_suite_checks_additivity():
    checks = Experiments.duality_suite(3, points=10, pairs=5, directions=20, sums=2)
    assert all(check.passed for check in checks)
    names = {(check.fixture, check.name) for check in checks}
    assert ('sum_001', 'supported faces are additive') in names
    assert any(name == 'subgradient inequality' for _, name in names)


@pytest.mark.slow
@pytest.mark.parametrize("name", ['duality', 'isotonicity', 'decomposition'])
def test_suite_at_configured_scale(name):
    checks = Experiments.run_suite(name, 1, jobs=2)
    assert checks and all(check.passed for check in checks)
