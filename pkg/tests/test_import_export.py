import json
from fractions import Fraction

import pandas as pd
import pytest

from newton_forge.models.cpwl_fn import AffineMax, CpwlFn
from newton_forge.models.report import CheckResult, RunReport
from newton_forge.modules import synthesis
from newton_forge.utils.errors import InputFormatError
from newton_forge.utils.import_export import (
    export_json,
    export_parts,
    export_report_csv,
    export_report_xlsx,
    import_function,
    import_network,
    import_parts,
    import_polytope,
    load_json,
    report_frame,
)


def sample_report():
    report = RunReport('verify lattice', seed=7)
    report.add(CheckResult('lattice', 'B_2', 'isoperimetry', True, Fraction(1, 2)))
    report.add(CheckResult('duality', 'max_2', 'support equals value', False, Fraction(2, 3), {'witness': [1, 2]}))
    report.add(CheckResult('duality', 'm_3', 'support equals value', True))
    return report


def test_export_json_is_canonical(tmp_path, samples):
    net = import_network(samples / 'm3.json')
    target = tmp_path / 'm3.json'
    text = export_json(net, target)
    assert text.endswith("\n")
    assert target.read_text(encoding='utf-8') == text
    assert import_network(target) == net
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_function_files(samples):
    fn = import_function(samples / 'max2.json')
    assert fn == CpwlFn.max_n(2)
    shifted = AffineMax(2, ((CpwlFn.max_n(2).generators[0], Fraction(-1, 2)),))
    assert isinstance(import_function(export_json(shifted)), AffineMax)


def test_load_json_errors(tmp_path):
    with pytest.raises(InputFormatError):
        load_json(tmp_path / 'missing.json')
    broken = tmp_path / 'broken.json'
    broken.write_text('{"dim": 2,', encoding='utf-8')
    with pytest.raises(InputFormatError):
        load_json(broken)
    with pytest.raises(InputFormatError):
        import_function('[1, 2]')


def test_malformed_network_is_an_input_error():
    with pytest.raises(InputFormatError):
        import_network('{"input_dim": 2, "gates": [{"op": "sigmoid", "in": 0}], "output": 2}')
    with pytest.raises(InputFormatError):
        import_network('{"input_dim": 2, "gates": [], "output": 9}')


def test_decomposition_parts_file(tmp_path, samples):
    parts = synthesis.decompose_polygon(import_polytope(samples / 'hexagon.json'))
    target = tmp_path / 'parts.json'
    export_parts(parts, target)
    assert import_parts(target) == parts
    with pytest.raises(InputFormatError):
        import_parts('{"shape": "segment"}')


def test_report_dict_is_sorted_and_exact():
    data = sample_report().to_dict()
    assert data['passed'] is False
    assert data['fixtures'] == ['B_2', 'm_3', 'max_2']
    assert [check['suite'] for check in data['checks']] == ['duality', 'duality', 'lattice']
    failing = data['checks'][1]
    assert failing['value'] == {'exact': '2/3', 'decimal': '0.666666666667'}
    assert 'timing' not in data


def test_report_frame_and_csv(tmp_path):
    report = sample_report()
    frame = report_frame(report)
    assert list(frame.columns) == ['suite', 'fixture', 'check', 'passed', 'exact', 'decimal']
    assert len(frame) == 3
    target = tmp_path / 'report.csv'
    export_report_csv(report, target)
    loaded = pd.read_csv(target, dtype=str, keep_default_na=False)
    assert loaded.loc[2, 'exact'] == '1/2'
    assert loaded.loc[0, 'exact'] == ''


def test_report_xlsx(tmp_path):
    target = tmp_path / 'report.xlsx'
    export_report_xlsx(sample_report(), target)
    assert target.exists() and target.stat().st_size > 0
