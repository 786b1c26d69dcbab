"""
newton_forge command line.

    python -m newton_forge.app build mn --n 3 --out m3.json
    python -m newton_forge.app eval m3.json --x 1,1,1
    python -m newton_forge.app verify all --seed 7 --jobs 4

Artifact commands (convert, synth2d, decompose, build) write the artifact to
--out and print the report; report commands write the report to --out.
"""
import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from newton_forge.models.ratvec import RatVec
from newton_forge.models.report import CheckResult, RunReport
from newton_forge.models.network import ReluNetwork
from newton_forge.models.cpwl_fn import AffineMax
from newton_forge.modules import cpwl
from newton_forge.modules import lattice_game as lg
from newton_forge.modules import network as nw
from newton_forge.modules import synthesis
from newton_forge.modules.experiments import SUITES, Experiments
from newton_forge.modules.visualizer import Visualizer
from newton_forge.utils.config import load_config
from newton_forge.utils.errors import NewtonForgeError, NotHomogeneousError
from newton_forge.utils.import_export import (
    dumps,
    export_json,
    export_parts,
    export_report_csv,
    export_report_xlsx,
    import_function,
    import_network,
    import_polytope,
    load_json,
)
from newton_forge.utils.rational import parse_vector
from newton_forge.utils.sampling import make_rng, resolve_seed

logger = logging.getLogger(__name__)

ARTIFACT_COMMANDS = ('convert', 'synth2d', 'decompose', 'build')


def configure_logging(verbose=False):
    settings = load_config()['logging']
    level = logging.DEBUG if verbose else getattr(logging, settings.get('level', 'WARNING'))
    logging.basicConfig(level=level, format=settings['format'], stream=sys.stderr, force=True)


def _fixture_id(path):
    return Path(path).stem


def _load_function(path):
    """A function file, or a network file turned into its function."""
    data = load_json(path)
    if isinstance(data, dict) and 'gates' in data:
        net = ReluNetwork.from_dict(data)
        if any(getattr(gate, 'bias', 0) != 0 for gate in net.gates):
            return nw.affine_pieces(net)
        return nw.network_function(net)
    return import_function(path)


def _maybe_svg(args, fig):
    if args.svg:
        Visualizer.save_svg(fig, args.svg)


def cmd_eval(args, report):
    net = import_network(args.net)
    x = RatVec(tuple(parse_vector(args.x)))
    trace = nw.trace_net(net, x)
    report.results = {'x': x.to_list(), 'value': trace.result, 'depth': nw.depth(net)}
    if args.trace:
        report.results['trace'] = list(trace.values)


def cmd_convert(args, report):
    net = import_network(args.net)
    circuit = nw.net_to_circuit(net)
    output = nw.eval_circuit(circuit).result
    report.results = {'gates': len(circuit.gates), 'depth': nw.depth_circuit(circuit),
                      'output_vertices': output.vertex_count}
    report.add(CheckResult('convert', _fixture_id(args.net), 'circuit is valid', not nw.validate_circuit(circuit)))
    return circuit


def cmd_synth2d(args, report):
    fn = import_function(args.function)
    if isinstance(fn, AffineMax):
        raise NotHomogeneousError("depth-2 synthesis takes a homogeneous function (all biases zero)")
    net = synthesis.synthesize_depth2_planar(fn)
    report.results = {'depth': nw.depth(net), 'gates': len(net.gates)}
    report.add(CheckResult('synth2d', _fixture_id(args.function), 'depth at most 2', nw.depth(net) <= 2,
                           Fraction(nw.depth(net))))
    _maybe_svg(args, Visualizer.create_regions_figure(fn))
    return net


def cmd_decompose(args, report):
    polygon = import_polytope(args.polygon)
    parts = synthesis.decompose_polygon(polygon)
    offset = synthesis.decomposition_offset(polygon, parts)
    total = synthesis.resum_parts(parts) if parts else polygon.translate(-offset)
    report.results = {'parts': [part.shape for part in parts], 'offset': offset.to_list()}
    report.add(CheckResult('decompose', _fixture_id(args.polygon), 'parts re-sum to the polygon',
                           total.translate(offset) == polygon))
    _maybe_svg(args, Visualizer.create_decomposition_figure(polygon, parts))
    return parts


def cmd_build(args, report):
    target = args.target
    if target == 'mn':
        artifact = synthesis.build_m_n(args.n)
        report.results = {'depth': nw.depth(artifact)}
    elif target == 'maxicnn':
        circuit, artifact = synthesis.build_max_icnn(args.n)
        report.results = {'depth': nw.depth_circuit(circuit), 'circuit': circuit}
    elif target == 'maxtree':
        artifact = nw.build_max_tree(args.n)
        report.results = {'depth': nw.depth(artifact)}
    elif target == 'pyramid':
        artifact, _ = synthesis.pyramid_fixture()
        report.results = {'vertices': artifact.vertex_count}
    elif target == 'polytope-icnn':
        artifact = synthesis.build_polytope_icnn(import_polytope(args.polytope))
        report.results = {'depth': nw.depth_circuit(artifact), 'gates': synthesis.circuit_gate_counts(artifact)}
    elif target == 'ball':
        artifact = lg.build_ball(args.r)
        report.results = {'vertices': artifact.vertex_count, 'edges': len(artifact.edges),
                          'triangles': len(artifact.triangles)}
        _maybe_svg(args, Visualizer.create_ball_figure(artifact))
    else:
        artifact = lg.realize_polytope(lg.build_ball(args.r))
        report.add(CheckResult('build', f"B_{args.r}", 'lattice triangles are faces of the lift',
                               artifact.certified))
    return artifact


def cmd_check(args, report):
    fixture = _fixture_id(args.file)
    if args.property == 'isotonic':
        fn = _load_function(args.file)
        if isinstance(fn, AffineMax):
            witness = cpwl.sample_isotonicity_affine(fn, make_rng(args.seed), load_config()['sampling']['isotonic_pairs'])
            report.add(CheckResult('check', fixture, 'sampled isotonicity', witness is None,
                                   detail={'witness': witness}))
            return
        ok, payload = cpwl.isotonic_check(fn)
        report.add(CheckResult('check', fixture, 'isotonic subgradient', ok,
                               detail={'edges' if ok else 'witness': payload}))
        return

    net = import_network(args.file)
    violations = nw.check_kind(net, args.property)
    report.add(CheckResult('check', fixture, f"{args.property} weight discipline", not violations,
                           detail={'violations': [[gate, rule] for gate, rule in violations]}))
    if not violations and args.property == 'monotone' and all(getattr(g, 'bias', 0) == 0 for g in net.gates):
        non_negative, offending = cpwl.non_negative_subgradients(nw.network_function(net))
        report.add(CheckResult('check', fixture, 'non-negative subgradients', non_negative,
                               detail={'negative_vertices': [v.to_list() for v in offending]}))


def cmd_game(args, report):
    ball = lg.build_ball(args.r)
    strategy = lg.STRATEGIES[args.strategy](ball)
    tree = lg.play(ball, strategy)
    report.results = {'tree': tree, 'cost': tree.cost}
    report.add(CheckResult('game', f"B_{args.r}", f"{args.strategy} game completed", True,
                           Fraction(tree.cost), detail={'cost_over_r': Fraction(tree.cost, max(args.r, 1))}))
    _maybe_svg(args, Visualizer.create_coloring_figure(ball, tree))


def cmd_iso_scan(args, report):
    ball = lg.build_ball(args.r)
    scan = lg.isoperimetry_scan(ball, args.mode, make_rng(args.seed), args.samples)
    report.results = {'scan': scan}
    report.add(CheckResult('iso-scan', f"B_{args.r}", 'isoperimetric constant is positive',
                           scan.min_ratio > 0, scan.min_ratio))


def cmd_inapprox(args, report):
    fixture = _fixture_id(args.file)
    fn = _load_function(args.file)
    certificate = cpwl.inapproximability_certificate(fn, make_rng(args.seed))
    report.results = {'certificate': certificate}
    report.add(CheckResult('inapprox', fixture, 'mean distance from MAX_2 is at least epsilon',
                           certificate.exceeds_epsilon, certificate.mean))
    data = load_json(args.file)
    if isinstance(data, dict) and data.get('kind') == 'monotone' and data.get('input_dim') == 2:
        gap = nw.horizon_gap_check(import_network(args.file))
        report.results['horizon'] = gap
        report.add(CheckResult('inapprox', fixture, 'affine gap beyond the horizon', gap['holds'], gap['gap']))


def cmd_ball(args, report):
    ball = lg.build_ball(args.r)
    report.results = {'vertices': ball.vertex_count, 'edges': len(ball.edges), 'triangles': len(ball.triangles)}
    report.add(CheckResult('ball', f"B_{args.r}", 'vertex count is 3r^2 + 3r + 1',
                           ball.vertex_count == 3 * args.r ** 2 + 3 * args.r + 1, Fraction(ball.vertex_count)))
    if 1 <= args.r <= 5:
        report.add(CheckResult('ball', f"B_{args.r}", '3-connected', lg.check_3_connected(ball)))
    _maybe_svg(args, Visualizer.create_ball_figure(ball))


def cmd_realize(args, report):
    realization = lg.realize_polytope(lg.build_ball(args.r))
    report.results = {'realization': realization}
    report.add(CheckResult('realize', f"B_{args.r}", 'lattice triangles are faces of the lift',
                           realization.certified, realization.slope))


COMMANDS = {
    'eval': cmd_eval,
    'convert': cmd_convert,
    'synth2d': cmd_synth2d,
    'decompose': cmd_decompose,
    'build': cmd_build,
    'check': cmd_check,
    'game': cmd_game,
    'iso-scan': cmd_iso_scan,
    'inapprox': cmd_inapprox,
    'ball': cmd_ball,
    'realize': cmd_realize,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help="seed (default: NEWTON_FORGE_SEED, then config)")
    common.add_argument('--jobs', type=int, default=1, help="worker threads for suite fixtures")
    common.add_argument('--timing', action='store_true', help="include wall-clock seconds in the report")
    common.add_argument('--out', help="artifact file for artifact commands, report file otherwise")
    common.add_argument('--csv', help="write the report's checks as CSV")
    common.add_argument('--xlsx', help="write the report's checks as an Excel workbook")
    common.add_argument('--svg', help="write a static figure where the command has one")
    common.add_argument('--verbose', '-v', action='store_true')

    parser = argparse.ArgumentParser(prog='newton_forge', description=load_config()['app']['description'])
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('eval', parents=[common], help="evaluate a network exactly")
    p.add_argument('net')
    p.add_argument('--x', required=True, help="comma separated rationals, e.g. 1,1/2,0")
    p.add_argument('--trace', action='store_true', help="report every gate value")

    p = sub.add_parser('convert', parents=[common], help="network -> polytope circuit")
    p.add_argument('net')

    p = sub.add_parser('synth2d', parents=[common], help="planar isotonic function -> depth-2 monotone network")
    p.add_argument('function')

    p = sub.add_parser('decompose', parents=[common], help="polygon -> segments and triangles")
    p.add_argument('polygon')

    p = sub.add_parser('build', parents=[common], help="builders")
    p.add_argument('target', choices=['mn', 'maxicnn', 'maxtree', 'pyramid', 'polytope-icnn', 'ball', 'realize'])
    p.add_argument('--n', type=int, default=2)
    p.add_argument('--r', type=int, default=1)
    p.add_argument('--polytope', help="polytope file for polytope-icnn")

    p = sub.add_parser('check', parents=[common], help="property checks")
    p.add_argument('property', choices=['isotonic', 'monotone', 'icnn'])
    p.add_argument('file')

    p = sub.add_parser('game', parents=[common], help="play the coloring game on B_r")
    p.add_argument('--r', type=int, required=True)
    p.add_argument('--strategy', choices=sorted(lg.STRATEGIES), default='separator')

    p = sub.add_parser('iso-scan', parents=[common], help="isoperimetry scan of B_r")
    p.add_argument('--r', type=int, required=True)
    p.add_argument('--mode', choices=['exhaustive', 'sampled'], default='exhaustive')
    p.add_argument('--samples', type=int, default=None)

    p = sub.add_parser('inapprox', parents=[common], help="exact distance of a planar candidate from MAX_2")
    p.add_argument('file')

    p = sub.add_parser('ball', parents=[common], help="B_r counts and connectivity")
    p.add_argument('--r', type=int, required=True)

    p = sub.add_parser('realize', parents=[common], help="lift B_r and certify its faces")
    p.add_argument('--r', type=int, required=True)

    p = sub.add_parser('verify', parents=[common], help="run verification suites")
    p.add_argument('suites', nargs='+', choices=list(SUITES) + ['all'])
    return parser


def _write_outputs(args, report, artifact=None):
    text = export_json(report.to_dict(load_config()['analysis']['decimal_digits']))
    if artifact is not None and args.out:
        if isinstance(artifact, list):
            export_parts(artifact, args.out)
        else:
            export_json(artifact, args.out)
    elif args.out:
        Path(args.out).write_text(text, encoding='utf-8')
        text = None
    if text is not None:
        sys.stdout.write(text)
    if args.csv:
        export_report_csv(report, args.csv)
    if args.xlsx:
        export_report_xlsx(report, args.xlsx)


def main(argv=None):
    """
    Run one command.

    Returns:
        int: 0 when every check passed, 1 when one failed, 2 on an error.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    command = ' '.join(['newton_forge'] + argv)
    try:
        if args.command == 'verify':
            report = Experiments.verify(args.suites, args.seed, args.jobs, args.timing, command)
            artifact = None
        else:
            report = RunReport(command, resolve_seed(args.seed))
            artifact = COMMANDS[args.command](args, report)
            if args.command in ARTIFACT_COMMANDS and artifact is not None:
                report.results.setdefault('artifact', artifact)
        _write_outputs(args, report, artifact if args.command in ARTIFACT_COMMANDS else None)
    except NewtonForgeError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        sys.stdout.write(dumps({'error': type(exc).__name__, 'message': str(exc)}))
        return 2
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
