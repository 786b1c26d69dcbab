import logging
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import partial

import numpy as np

from newton_forge.models.cpwl_fn import CpwlFn
from newton_forge.models.lattice import hex_distance
from newton_forge.models.network import ReluGate
from newton_forge.models.ratvec import RatVec
from newton_forge.models.report import CheckResult, RunReport
from newton_forge.modules import cpwl
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules import lattice_game as lg
from newton_forge.modules import network as nw
from newton_forge.modules import synthesis
from newton_forge.utils import fixtures
from newton_forge.utils.config import load_config
from newton_forge.utils.errors import CertificateError
from newton_forge.utils.sampling import random_nonzero_coords, resolve_seed

logger = logging.getLogger(__name__)

SUITES = ('duality', 'isotonicity', 'inapprox', 'synthesis', 'decomposition', 'indecomposable',
          'builders', 'lattice', 'games', 'oracles')


def fixture_rng(seed, suite, index):
    """Generator of one fixture; independent of the job count and of the other fixtures."""
    return np.random.default_rng([seed, SUITES.index(suite), index])


def run_tasks(tasks, jobs=1):
    """
    Run zero-argument callables returning CheckResult lists.

    Args:
        tasks (list): Callables.
        jobs (int, optional): Worker threads. Default is 1.

    Returns:
        list: Concatenated results in canonical order.
    """
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            batches = list(executor.map(lambda task: task(), tasks))
    else:
        batches = [task() for task in tasks]
    return sorted((check for batch in batches for check in batch), key=CheckResult.sort_key)


def _random_points(rng, dim, count):
    settings = load_config()['sampling']
    low, high = settings['coordinate_low'], settings['coordinate_high']
    return [RatVec(tuple(random_nonzero_coords(rng, dim, low, high))) for _ in range(count)]


def interpret_recursively(net, node, x):
    """Reference evaluator: recurse from a node down to the inputs, no caching."""
    if net.is_input(node):
        return x[node]
    gate = net.gate(node)
    if isinstance(gate, ReluGate):
        return max(Fraction(0), interpret_recursively(net, gate.source, x))
    return gate.bias + sum((w * interpret_recursively(net, src, x) for src, w in gate.incoming), Fraction(0))


def m_n_recursion(x):
    """m_n by its defining recursion."""
    value = max(x[0], Fraction(0))
    for coordinate in x[1:]:
        value = max(coordinate + value, Fraction(0))
    return value


class Experiments:
    """
    Verification suites. Each suite returns CheckResult items, one or more
    per fixture, in canonical (suite, fixture, check) order.
    """

    @staticmethod
    def duality_fixture(fixture_id, net, rng, points, pairs):
        polytope = nw.eval_circuit(nw.net_to_circuit(net)).result
        samples = _random_points(rng, net.input_dim, points)
        mismatches = [x for x in samples if nw.eval_net(net, x) != gk.support_value(polytope, x)]
        violation = cpwl.subgradient_inequality_violation(nw.network_function(net), rng, pairs)
        return [
            CheckResult('duality', fixture_id, 'eval_net equals support value', not mismatches,
                        detail={'points': len(samples), 'depth': nw.depth(net), 'vertices': polytope.vertex_count,
                                'first_mismatch': mismatches[0].to_list() if mismatches else None}),
            CheckResult('duality', fixture_id, 'subgradient inequality', violation is None,
                        detail={'pairs': pairs, 'violation': violation}),
        ]

    @staticmethod
    def additivity_fixture(index, rng, directions):
        dim = 2 + index % 2
        P = gk.convex_hull(fixtures.random_points(rng, int(rng.integers(1, 9)), dim), dim)
        Q = gk.convex_hull(fixtures.random_points(rng, int(rng.integers(1, 9)), dim), dim)
        total = gk.minkowski_sum(P, Q)
        support_failures = face_failures = 0
        for u in _random_points(rng, dim, directions):
            if gk.support_value(total, u) != gk.support_value(P, u) + gk.support_value(Q, u):
                support_failures += 1
            if gk.support_face(total, u) != gk.minkowski_sum(gk.support_face(P, u), gk.support_face(Q, u)):
                face_failures += 1
        fixture_id = f"sum_{index:03d}"
        return [
            CheckResult('duality', fixture_id, 'support function is additive', not support_failures,
                        detail={'directions': directions, 'failures': support_failures}),
            CheckResult('duality', fixture_id, 'supported faces are additive', not face_failures,
                        detail={'directions': directions, 'failures': face_failures}),
        ]

    @staticmethod
    def duality_suite(seed, jobs=1, points=None, pairs=None, directions=None, sums=10):
        """eval_net(net, x) == h(N(net), x) on random nonzero rational points, plus support and face additivity."""
        settings = load_config()['sampling']
        points = points or settings['duality_points']
        pairs = pairs or settings['subgradient_pairs']
        directions = directions or settings['support_directions']
        nets = fixtures.duality_fixtures(fixture_rng(seed, 'duality', 0))
        tasks = [partial(Experiments.duality_fixture, fixture_id, net, fixture_rng(seed, 'duality', index + 1),
                         points, pairs)
                 for index, (fixture_id, net) in enumerate(sorted(nets.items()))]
        offset = len(nets) + 1
        tasks += [partial(Experiments.additivity_fixture, index, fixture_rng(seed, 'duality', offset + index), directions)
                  for index in range(sums)]
        return run_tasks(tasks, jobs)

    @staticmethod
    def monotone_fixture(fixture_id, net, rng, pairs):
        fn = nw.network_function(net)
        non_negative, offending = cpwl.non_negative_subgradients(fn)
        witness = cpwl.sample_isotonicity(fn, rng, pairs)
        return [
            CheckResult('isotonicity', fixture_id, 'monotone network is valid', not nw.validate(net)),
            CheckResult('isotonicity', fixture_id, 'non-negative subgradients', non_negative,
                        detail={'negative_vertices': [v.to_list() for v in offending]}),
            CheckResult('isotonicity', fixture_id, 'sampled isotonicity', witness is None,
                        detail={'pairs': pairs, 'witness': witness}),
        ]

    @staticmethod
    def max2_witness_check():
        fn = CpwlFn.max_n(2)
        ok, payload = cpwl.isotonic_check(fn)
        confirmed = (not ok and payload.x.leq(payload.y)
                     and not cpwl.set_leq(cpwl.subgradient(fn, payload.x), cpwl.subgradient(fn, payload.y)))
        return [CheckResult('isotonicity', 'max_2', 'isotonicity fails with a witness', confirmed,
                            detail={'witness': payload if not ok else None})]

    @staticmethod
    def isotonicity_suite(seed, jobs=1, pairs=None):
        """Monotone networks have non-negative, isotonic subgradients; MAX_2 does not."""
        pairs = pairs or load_config()['sampling']['isotonic_pairs']
        nets = fixtures.monotone_fixtures(fixture_rng(seed, 'isotonicity', 0))
        tasks = [partial(Experiments.monotone_fixture, fixture_id, net, fixture_rng(seed, 'isotonicity', index + 1), pairs)
                 for index, (fixture_id, net) in enumerate(sorted(nets.items()))]
        tasks.append(Experiments.max2_witness_check)
        return run_tasks(tasks, jobs)

    @staticmethod
    def inapprox_fixture(fixture_id, fn, rng, pairs):
        certificate = cpwl.inapproximability_certificate(fn, rng, pairs)
        return [
            CheckResult('inapprox', fixture_id, 'mean distance from MAX_2 is at least epsilon',
                        certificate.exceeds_epsilon, certificate.mean, detail={'certificate': certificate}),
            CheckResult('inapprox', fixture_id, 'candidate is isotonic', certificate.isotonic),
        ]

    @staticmethod
    def horizon_fixture(fixture_id, net):
        result = nw.horizon_gap_check(net)
        return [CheckResult('inapprox', f"horizon_{fixture_id}", 'affine gap beyond the horizon',
                            result['holds'], result['gap'],
                            detail={'horizon': result['horizon'], 'bound': result['bound']})]

    @staticmethod
    def inapprox_suite(seed, jobs=1, pairs=None):
        """Exact mean |F - MAX_2| over the unit square for isotonic planar candidates."""
        pairs = pairs or load_config()['sampling']['isotonic_pairs']
        candidates = fixtures.isotonic_candidates()
        tasks = [partial(Experiments.inapprox_fixture, fixture_id, fn, fixture_rng(seed, 'inapprox', index), pairs)
                 for index, (fixture_id, fn) in enumerate(candidates.items())]
        tasks += [partial(Experiments.horizon_fixture, fixture_id, net)
                  for fixture_id, net in sorted(fixtures.biased_monotone_nets().items())]
        bound = cpwl.affine_gap_lower_bound(1)
        tasks.append(lambda: [CheckResult('inapprox', 'affine_gap', 'unit-square affine bound is 1/12',
                                          bound == Fraction(1, 12), bound)])
        return run_tasks(tasks, jobs)

    @staticmethod
    def synthesis_fixture(index, rng, points):
        fn = fixtures.random_positive_planar_function(rng)
        net = synthesis.synthesize_depth2_planar(fn)
        samples = _random_points(rng, 2, points)
        agrees = all(nw.eval_net(net, x) == cpwl.evaluate(fn, x) for x in samples)
        same_polytope = nw.network_function(net) == cpwl.reduced(fn)
        passed = nw.depth(net) <= 2 and not nw.validate(net) and agrees and same_polytope
        return [CheckResult('synthesis', f"planar_{index:03d}", 'depth-2 monotone synthesis', passed,
                            detail={'depth': nw.depth(net), 'gates': len(net.gates),
                                    'newton_vertices': len(cpwl.reduced(fn).generators)})]

    @staticmethod
    def synthesis_suite(seed, jobs=1, count=100, points=None):
        """Random positive-edge planar functions synthesize to depth <= 2 monotone networks."""
        points = points or load_config()['sampling']['duality_points']
        tasks = [partial(Experiments.synthesis_fixture, index, fixture_rng(seed, 'synthesis', index), points)
                 for index in range(count)]
        return run_tasks(tasks, jobs)

    @staticmethod
    def decomposition_fixture(index, rng):
        polygon = fixtures.random_polygon(rng)
        parts = synthesis.decompose_polygon(polygon)
        total = synthesis.resum_parts(parts)
        offset = synthesis.decomposition_offset(polygon, parts)
        shapes_ok = all(part.shape in ('segment', 'triangle') for part in parts)
        passed = shapes_ok and gk.equal_up_to_translation(total, polygon) and total.translate(offset) == polygon
        return [CheckResult('decomposition', f"polygon_{index:03d}", 'parts re-sum to the polygon', passed,
                            detail={'vertices': polygon.vertex_count, 'parts': len(parts)})]

    @staticmethod
    def decomposition_suite(seed, jobs=1, count=200):
        tasks = [partial(Experiments.decomposition_fixture, index, fixture_rng(seed, 'decomposition', index))
                 for index in range(count)]
        return run_tasks(tasks, jobs)

    @staticmethod
    def pyramid_checks():
        pyramid, _ = synthesis.pyramid_fixture()
        ok, _ = gk.positive_edges(pyramid)
        dimension = synthesis.edge_scaling_dimension(pyramid)
        return [
            CheckResult('indecomposable', 'pyramid', 'positive edges', ok),
            CheckResult('indecomposable', 'pyramid', 'edge scaling dimension is 1', dimension == 1,
                        Fraction(dimension)),
        ]

    @staticmethod
    def triangle_check(index, rng):
        dimension = synthesis.edge_scaling_dimension(fixtures.random_triangle(rng))
        return [CheckResult('indecomposable', f"triangle_{index:02d}", 'edge scaling dimension is 1',
                            dimension == 1, Fraction(dimension))]

    @staticmethod
    def square_control():
        square = gk.convex_hull([RatVec.of(0, 0), RatVec.of(1, 0), RatVec.of(0, 1), RatVec.of(1, 1)], 2)
        dimension = synthesis.edge_scaling_dimension(square)
        return [CheckResult('indecomposable', 'square', 'decomposable control has dimension 2',
                            dimension == 2, Fraction(dimension))]

    @staticmethod
    def indecomposable_suite(seed, jobs=1, triangles=50):
        """Edge-scaling systems: the pyramid and triangles have only homothetic summands."""
        tasks = [Experiments.pyramid_checks, Experiments.square_control]
        tasks += [partial(Experiments.triangle_check, index, fixture_rng(seed, 'indecomposable', index))
                  for index in range(triangles)]
        return run_tasks(tasks, jobs)

    @staticmethod
    def m_n_checks(n, rng, points):
        net = synthesis.build_m_n(n)
        fn = CpwlFn.m_n(n)
        samples = _random_points(rng, n, points)
        agrees = all(nw.eval_net(net, x) == m_n_recursion(x.coords) == cpwl.evaluate(fn, x) for x in samples)
        fixture = f"m_{n}"
        checks = [
            CheckResult('builders', fixture, 'depth equals n', nw.depth(net) == n, Fraction(nw.depth(net))),
            CheckResult('builders', fixture, 'network, recursion and support function agree', agrees),
            CheckResult('builders', fixture, 'monotone network is valid', not nw.validate(net)),
        ]
        if n >= 2:
            restricted = synthesis.restrict_circuit_to_face(nw.net_to_circuit(net), RatVec.unit(n, n - 1))
            expected = gk.convex_hull([v.extend(0) for v in CpwlFn.m_n(n - 1).generators], n)
            checks.append(CheckResult(
                'builders', fixture, 'face restriction gives m_(n-1)',
                nw.eval_circuit(restricted).result == expected
                and nw.depth_circuit(restricted) <= nw.depth_circuit(nw.net_to_circuit(net))))
        return checks

    @staticmethod
    def max_icnn_checks(n, rng, points):
        circuit, net = synthesis.build_max_icnn(n)
        simplex = gk.convex_hull([RatVec.unit(n, i) for i in range(n)], n)
        samples = _random_points(rng, n, points)
        agrees = all(nw.eval_net(net, x) == max(x.coords) for x in samples)
        fixture = f"max_icnn_{n}"
        return [
            CheckResult('builders', fixture, 'circuit depth equals n', nw.depth_circuit(circuit) == n,
                        Fraction(nw.depth_circuit(circuit))),
            CheckResult('builders', fixture, 'output is the simplex', nw.eval_circuit(circuit).result == simplex),
            CheckResult('builders', fixture, 'network computes MAX_n', agrees),
        ]

    @staticmethod
    def pyramid_icnn_check():
        pyramid, _ = synthesis.pyramid_fixture()
        circuit = synthesis.build_polytope_icnn(pyramid)
        return [CheckResult('builders', 'pyramid_icnn', 'output is the pyramid at depth 5',
                            nw.eval_circuit(circuit).result == pyramid and nw.depth_circuit(circuit) == 5,
                            Fraction(nw.depth_circuit(circuit)))]

    @staticmethod
    def builders_suite(seed, jobs=1, points=100):
        """Depth and semantics of the m_n, MAX_n and polytope builders."""
        tasks = [partial(Experiments.m_n_checks, n, fixture_rng(seed, 'builders', n), points) for n in range(1, 9)]
        tasks += [partial(Experiments.max_icnn_checks, n, fixture_rng(seed, 'builders', 10 + n), points)
                  for n in range(2, 9)]
        tasks.append(Experiments.pyramid_icnn_check)
        return run_tasks(tasks, jobs)

    @staticmethod
    def ball_counts(r):
        ball = lg.build_ball(r)
        interior_ok = all(ball.degree(v) == 6 for v in ball.vertices if hex_distance(v) < r)
        passed = (ball.vertex_count == 3 * r * r + 3 * r + 1 and len(ball.edges) == 9 * r * r + 3 * r
                  and len(ball.triangles) == 6 * r * r and interior_ok)
        return [CheckResult('lattice', f"B_{r}", 'vertex, edge and triangle counts', passed,
                            Fraction(ball.vertex_count),
                            detail={'edges': len(ball.edges), 'triangles': len(ball.triangles)})]

    @staticmethod
    def ball_connectivity(r):
        return [CheckResult('lattice', f"B_{r}", '3-connected', lg.check_3_connected(lg.build_ball(r)))]

    @staticmethod
    def ball_realization(r):
        realization = lg.realize_polytope(lg.build_ball(r))
        return [CheckResult('lattice', f"B_{r}", 'lattice triangles are faces of the lift', realization.certified,
                            detail={'slope': realization.slope, 'failures': [list(t) for t in realization.failures]})]

    @staticmethod
    def chain_samples(r, rng, samples):
        ball = lg.build_ball(r)
        broken = []
        for _ in range(samples):
            size = int(rng.integers(1, ball.vertex_count + 1))
            chosen = lg.random_connected_set(ball, rng, size)
            if not lg.triangle_set(ball, chosen).is_pseudomanifold():
                broken.append(sorted(chosen))
        return [CheckResult('lattice', f"B_{r}", 'triangle sets of connected sets are chains', not broken,
                            detail={'samples': samples, 'first_failure': broken[0] if broken else None})]

    @staticmethod
    def isoperimetry_check():
        report = lg.exhaustive_isoperimetry(lg.build_ball(2))
        return [CheckResult('lattice', 'B_2', 'exhaustive isoperimetry constant is positive',
                            report.min_ratio > 0, report.min_ratio, detail={'report': report})]

    @staticmethod
    def lattice_suite(seed, jobs=1, chain_samples=200):
        """Counts, connectivity, face certificates, chains and isoperimetry on B_r."""
        tasks = [partial(Experiments.ball_counts, r) for r in range(0, 9)]
        tasks += [partial(Experiments.ball_connectivity, r) for r in range(1, 6)]
        tasks += [partial(Experiments.ball_realization, r) for r in range(1, 5)]
        tasks += [partial(Experiments.chain_samples, r, fixture_rng(seed, 'lattice', r), chain_samples)
                  for r in (2, 3, 4)]
        tasks.append(Experiments.isoperimetry_check)
        return run_tasks(tasks, jobs)

    @staticmethod
    def optimal_game_checks():
        b1 = lg.optimal_cost(lg.build_ball(1))
        b2 = lg.optimal_cost(lg.build_ball(2))
        return [
            CheckResult('games', 'B_1', 'optimal cost is 1', b1 == 1, Fraction(b1)),
            CheckResult('games', 'B_2', 'optimal cost is at least 2', b2 >= 2, Fraction(b2),
                        detail={'cost_over_r': Fraction(b2, 2)}),
        ]

    @staticmethod
    def separator_check(r, constant):
        ball = lg.build_ball(r)
        tree = lg.play(ball, lg.separator_strategy(ball))
        return [CheckResult('games', f"B_{r:02d}", 'separator cost within the linear bound',
                            tree.cost <= constant * r, Fraction(tree.cost, r),
                            detail={'cost': tree.cost, 'bound': constant * r, 'selections': tree.selection_count})]

    @staticmethod
    def greedy_check(r):
        name = 'greedy game respects component and boundary bounds'
        try:
            tree = lg.play(lg.build_ball(r), lg.greedy_strategy())
        except CertificateError as exc:
            return [CheckResult('games', f"B_{r:02d}", name, False, detail={'step': exc.step, 'message': str(exc)})]
        return [CheckResult('games', f"B_{r:02d}", name, True, Fraction(tree.cost, r),
                            detail={'cost': tree.cost, 'max_branching': tree.max_branching})]

    @staticmethod
    def extraction_checks():
        ball = lg.build_ball(1)
        realization = lg.realize_polytope(ball)
        circuit = synthesis.build_polytope_icnn(realization.polytope)
        tree = lg.extract_strategy_from_circuit(circuit, ball, realization=realization)
        depth = nw.depth_circuit(circuit)
        checks = [CheckResult('games', 'extraction_B_1', 'extracted cost is at most the circuit depth',
                              tree.cost <= depth, Fraction(tree.cost), detail={'depth': depth})]

        truncated = synthesis.build_polytope_icnn(gk.convex_hull(realization.polytope.vertices[:-1], 3))
        try:
            lg.extract_strategy_from_circuit(truncated, ball, realization=realization)
            rejected = False
        except CertificateError:
            rejected = True
        checks.append(CheckResult('games', 'extraction_B_1_truncated', 'missing vertex is a certificate failure',
                                  rejected))
        return checks

    @staticmethod
    def games_suite(seed, jobs=1, max_radius=30):
        """Optimal costs at small radius, separator and greedy plays, circuit extraction."""
        constant = load_config()['lattice']['separator_constant']
        tasks = [Experiments.optimal_game_checks, Experiments.extraction_checks]
        tasks += [partial(Experiments.separator_check, r, constant) for r in range(1, max_radius + 1)]
        tasks += [partial(Experiments.greedy_check, r) for r in range(1, 9)]
        return run_tasks(tasks, jobs)

    @staticmethod
    def hull_oracle(index, rng):
        dim = 1 + index % 3
        points = fixtures.random_points(rng, int(rng.integers(1, 26)), dim)
        unique = sorted(set(points), key=lambda v: v.coords)
        brute = {unique[i] for i in gk.extreme_points_lp([v.coords for v in unique])}
        return [CheckResult('oracles', f"hull_{index:03d}", 'hull equals brute-force extreme points',
                            set(gk.convex_hull(points, dim).vertices) == brute)]

    @staticmethod
    def minkowski_oracle(index, rng):
        dim = 2 + index % 2
        P = gk.convex_hull(fixtures.random_points(rng, int(rng.integers(1, 8)), dim), dim)
        Q = gk.convex_hull(fixtures.random_points(rng, int(rng.integers(1, 8)), dim), dim)
        sums = sorted({p + q for p in P.vertices for q in Q.vertices}, key=lambda v: v.coords)
        brute = {sums[i] for i in gk.extreme_points_lp([v.coords for v in sums])}
        return [CheckResult('oracles', f"minkowski_{index:03d}", 'sum equals all-pairs brute force',
                            set(gk.minkowski_sum(P, Q).vertices) == brute)]

    @staticmethod
    def interpreter_oracle(index, rng):
        net = fixtures.random_network(rng)
        x = RatVec(tuple(random_nonzero_coords(rng, net.input_dim)))
        return [CheckResult('oracles', f"interpreter_{index:03d}", 'eval_net equals the recursive interpreter',
                            nw.eval_net(net, x) == interpret_recursively(net, net.output, x.coords))]

    @staticmethod
    def oracles_suite(seed, jobs=1, trials=100):
        """Cross-checks against slow independent implementations."""
        tasks = []
        for offset, oracle in enumerate((Experiments.hull_oracle, Experiments.minkowski_oracle,
                                         Experiments.interpreter_oracle)):
            tasks += [partial(oracle, index, fixture_rng(seed, 'oracles', offset * trials + index))
                      for index in range(trials)]
        return run_tasks(tasks, jobs)

    @staticmethod
    def run_suite(name, seed, jobs=1):
        suite = getattr(Experiments, f"{name}_suite", None)
        if name not in SUITES or suite is None:
            raise ValueError(f"unknown suite {name!r}")
        return suite(seed, jobs)

    @staticmethod
    def verify(names, seed=None, jobs=1, timing=False, command='verify'):
        """
        Run verification suites into one report.

        Args:
            names (list): Suite names; 'all' expands to every suite.
            seed (int, optional): Run seed, resolved through the usual precedence.
            jobs (int, optional): Worker threads per suite.
            timing (bool, optional): Record wall-clock seconds per suite.

        Returns:
            RunReport: Checks of every suite, canonical order.
        """
        seed = resolve_seed(seed)
        names = list(SUITES) if 'all' in names else [name for name in SUITES if name in names]
        report = RunReport(command, seed)
        elapsed = {}
        for name in names:
            started = time.perf_counter()
            checks = Experiments.run_suite(name, seed, jobs)
            elapsed[name] = time.perf_counter() - started
            report.extend(checks)
            failed = sum(not check.passed for check in checks)
            logger.info("suite %s: %d checks, %d failed, %.2fs", name, len(checks), failed, elapsed[name])
        report.results = {'suites': names, 'checks': len(report.checks), 'failed': len(report.failures())}
        if timing:
            report.timing = elapsed
        return report
