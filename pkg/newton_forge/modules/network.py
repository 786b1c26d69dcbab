"""
ReLU networks and polytope circuits: validation, evaluation, depth and the
translation between the two views.

For a bias-free network whose affine gates only add non-negative multiples
of earlier gates, N(sum a_j F_j) = sum a_j N(F_j) and N(relu F) = conv({0} union N(F)),
so every gate maps to a circuit gate computing its Newton polytope.
"""
import logging
from fractions import Fraction

import networkx as nx

from newton_forge.models.circuit import AddPointGate, CircuitBuilder, PointGate, SumGate
from newton_forge.models.cpwl_fn import AffineMax, CpwlFn
from newton_forge.models.network import AffineGate, GateTrace, NetworkBuilder, ReluGate, ReluNetwork
from newton_forge.models.polytope import Polytope
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import cpwl
from newton_forge.modules import geometry_kernel as gk
from newton_forge.utils.config import load_config
from newton_forge.utils.errors import (
    ConversionError,
    DimensionMismatchError,
    NetworkValidationError,
    NotHomogeneousError,
)
from newton_forge.utils.sampling import make_rng, random_coords

logger = logging.getLogger(__name__)


def _dependency_graph(node_count, gates, offset):
    graph = nx.DiGraph()
    graph.add_nodes_from(range(node_count))
    for index, gate in enumerate(gates):
        for src in gate.sources:
            if 0 <= src < node_count:
                graph.add_edge(src, offset + index)
    return graph


def validate(net):
    """
    Check a network against the weight discipline of its kind.

    Args:
        net (ReluNetwork): Network to check.

    Returns:
        list: (gate id, rule) violations; empty when the network is valid.
    """
    violations = []
    ok, message = net.validate()
    if not ok:
        return [(None, message)]

    graph = _dependency_graph(net.node_count(), net.gates, net.input_dim)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        violations.append((cycle[0][0], f"cycle through {[edge[0] for edge in cycle]}"))

    for index, gate in enumerate(net.gates):
        node = net.gate_id(index)
        for src in gate.sources:
            if src >= node:
                violations.append((node, f"reads id {src}, which is not earlier in topological order"))
        if not isinstance(gate, AffineGate):
            continue
        for src, weight in gate.incoming:
            if weight >= 0:
                continue
            if net.kind == 'monotone':
                violations.append((node, f"negative weight {weight} from {src} in a monotone network"))
            elif net.kind == 'icnn' and not net.is_input(src):
                violations.append((node, f"negative weight {weight} on gate {src} in an icnn"))
    return violations


def check_kind(net, kind):
    """Validate the network as if it were declared with the given kind."""
    return validate(net.with_kind(kind))


def _require_order(net):
    for index, gate in enumerate(net.gates):
        node = net.gate_id(index)
        if any(src >= node or src < 0 for src in gate.sources):
            raise NetworkValidationError([(node, "gates must only read earlier ids")])


def trace_net(net, x):
    """
    Evaluate every node of the network at x.

    Args:
        net (ReluNetwork): Network.
        x (RatVec): Input point.

    Returns:
        GateTrace: Exact value per node id.
    """
    if x.dim != net.input_dim:
        raise DimensionMismatchError(f"network takes {net.input_dim} inputs, got {x.dim}")
    _require_order(net)
    values = list(x.coords)
    for gate in net.gates:
        if isinstance(gate, AffineGate):
            values.append(sum((w * values[src] for src, w in gate.incoming), gate.bias))
        else:
            values.append(max(values[gate.source], Fraction(0)))
    return GateTrace(tuple(values), net.output)


def eval_net(net, x):
    """Exact forward evaluation of the network at x."""
    return trace_net(net, x).result


def depth(net):
    """Largest number of relu gates on a path ending at the output."""
    _require_order(net)
    levels = [0] * net.input_dim
    for gate in net.gates:
        if isinstance(gate, ReluGate):
            levels.append(levels[gate.source] + 1)
        else:
            levels.append(max((levels[src] for src in gate.sources), default=0))
    return levels[net.output]


def _require_circuit_order(circuit):
    for node, gate in enumerate(circuit.gates):
        if any(src >= node or src < 0 for src in gate.sources):
            raise NetworkValidationError([(node, "gates must only read earlier ids")])
    if not 0 <= circuit.output < len(circuit.gates):
        raise NetworkValidationError([(circuit.output, "output id is out of range")])


def depth_circuit(circuit):
    """Largest number of add-point gates on a path ending at the output."""
    _require_circuit_order(circuit)
    levels = []
    for gate in circuit.gates:
        if isinstance(gate, AddPointGate):
            levels.append(levels[gate.source] + 1)
        else:
            levels.append(max((levels[src] for src in gate.sources), default=0))
    return levels[circuit.output]


def strip_bias(net, rng=None, samples=None):
    """
    Zero every bias, keeping the topology.

    The result is compared with the input on random points; homogeneous
    functions survive unchanged, anything else is rejected.

    Args:
        net (ReluNetwork): Network computing a homogeneous function.
        rng (numpy.random.Generator, optional): Random source.
        samples (int, optional): Number of sample points (sampling.homogeneity_points).

    Returns:
        ReluNetwork: The bias-free network.

    Raises:
        NotHomogeneousError: If a sampled value changes.
    """
    settings = load_config()['sampling']
    rng = rng if rng is not None else make_rng()
    samples = samples or settings['homogeneity_points']
    gates = tuple(
        AffineGate(gate.incoming, 0) if isinstance(gate, AffineGate) else gate for gate in net.gates
    )
    stripped = ReluNetwork(net.input_dim, gates, net.output, net.kind)
    if gates == net.gates:
        return stripped

    points = [RatVec.zero(net.input_dim)]
    points += [RatVec(tuple(random_coords(rng, net.input_dim, settings['coordinate_low'],
                                          settings['coordinate_high']))) for _ in range(samples)]
    for x in points:
        if eval_net(net, x) != eval_net(stripped, x):
            raise NotHomogeneousError(f"removing biases changes the value at {x}", point=x)
    return stripped


def net_to_circuit(net):
    """
    Translate a bias-free monotone or ICNN network gate for gate into a polytope circuit.

    Input terms of an affine gate fold into one Point gate; the gate terms
    become a positive Minkowski combination; each relu becomes add-zero.

    Args:
        net (ReluNetwork): Bias-free network with non-negative weights on gate sources.

    Returns:
        PolytopeCircuit: Circuit whose output polytope is N(net).

    Raises:
        ConversionError: On a nonzero bias or a negative weight on a gate source.
    """
    _require_order(net)
    n = net.input_dim
    builder = CircuitBuilder(n)
    mapping = {}

    def input_point(i):
        key = ('input', i)
        if key not in mapping:
            mapping[key] = builder.point(RatVec.unit(n, i))
        return mapping[key]

    def node_gate(src):
        return input_point(src) if net.is_input(src) else mapping[src]

    for index, gate in enumerate(net.gates):
        node = net.gate_id(index)
        if isinstance(gate, ReluGate):
            mapping[node] = builder.add_point(node_gate(gate.source))
            continue
        if gate.bias != 0:
            raise ConversionError(f"gate {node} has bias {gate.bias}; strip or homogenize first")
        linear_part = [Fraction(0)] * n
        has_inputs = False
        terms = []
        for src, weight in gate.incoming:
            if net.is_input(src):
                linear_part[src] += weight
                has_inputs = True
            elif weight < 0:
                raise ConversionError(f"gate {node} has negative weight {weight} on gate {src}")
            elif weight > 0:
                terms.append((mapping[src], weight))
        if has_inputs or not terms:
            terms.insert(0, (builder.point(RatVec(tuple(linear_part))), Fraction(1)))
        if len(terms) == 1 and terms[0][1] == 1:
            mapping[node] = terms[0][0]
        else:
            mapping[node] = builder.sum(terms)

    output = node_gate(net.output)
    kind = 'monotone' if net.kind == 'monotone' else 'icnn'
    circuit = builder.build(output, kind)
    logger.debug("net_to_circuit: %d gates -> %d circuit gates", len(net.gates), len(circuit.gates))
    return circuit


def validate_circuit(circuit):
    """
    Check DAG order, coefficient signs and the monotone-kind point constraints.

    Returns:
        list: (gate id, rule) violations.
    """
    ok, message = circuit.validate()
    if not ok:
        return [(None, message)]
    violations = []
    graph = _dependency_graph(len(circuit.gates), circuit.gates, 0)
    if not nx.is_directed_acyclic_graph(graph):
        violations.append((None, "circuit has a cycle"))
    for node, gate in enumerate(circuit.gates):
        if any(src >= node for src in gate.sources):
            violations.append((node, "reads a gate that is not earlier in topological order"))
        if isinstance(gate, SumGate):
            if not gate.terms:
                violations.append((node, "empty sum"))
            for src, coefficient in gate.terms:
                if coefficient <= 0:
                    violations.append((node, f"coefficient {coefficient} on gate {src} is not positive"))
        if circuit.kind == 'monotone':
            if isinstance(gate, PointGate) and not gate.q.is_nonnegative():
                violations.append((node, f"point {gate.q} is not non-negative"))
            if isinstance(gate, AddPointGate) and not gate.q.is_zero():
                violations.append((node, f"monotone circuits only add zero, got {gate.q}"))
    return violations


def eval_circuit(circuit):
    """
    Build the polytope at every gate.

    Args:
        circuit (PolytopeCircuit): Circuit.

    Returns:
        GateTrace: Polytope per gate id.
    """
    _require_circuit_order(circuit)
    values = []
    for gate in circuit.gates:
        if isinstance(gate, PointGate):
            values.append(Polytope(circuit.dim, (gate.q,)))
        elif isinstance(gate, SumGate):
            values.append(gk.minkowski_combination([(a, values[src]) for src, a in gate.terms], circuit.dim))
        else:
            values.append(gk.conv_with_point(values[gate.source], gate.q))
    return GateTrace(tuple(values), circuit.output)


def _input_terms(q, sign=1):
    return [(i, sign * c) for i, c in enumerate(q) if c != 0]


def circuit_to_net(circuit):
    """
    Translate a circuit back into a network.

    Points become affine gates on the inputs, sums become affine gates and
    add-zero becomes a relu; adding q != 0 becomes <q, x> + relu(h - <q, x>).

    Args:
        circuit (PolytopeCircuit): Circuit.

    Returns:
        ReluNetwork: Network whose value at x is the support value of the output polytope.
    """
    builder = NetworkBuilder(circuit.dim)
    mapping = {}
    for node, gate in enumerate(circuit.gates):
        if isinstance(gate, PointGate):
            mapping[node] = builder.affine(_input_terms(gate.q))
        elif isinstance(gate, SumGate):
            mapping[node] = builder.affine([(mapping[src], a) for src, a in gate.terms])
        elif gate.q.is_zero():
            mapping[node] = builder.relu(mapping[gate.source])
        else:
            shifted = builder.affine([(mapping[gate.source], 1)] + _input_terms(gate.q, -1))
            rectified = builder.relu(shifted)
            mapping[node] = builder.affine([(rectified, 1)] + _input_terms(gate.q))
    kind = 'monotone' if circuit.kind == 'monotone' else 'icnn'
    return builder.build(mapping[circuit.output], kind)


def homogenize(net):
    """
    Move every bias onto an extra input x_{n+1}.

    The result is bias-free on n + 1 inputs and agrees with the input network
    wherever x_{n+1} = 1. Monotone networks with a negative bias become ICNNs.

    Args:
        net (ReluNetwork): Network with biases.

    Returns:
        ReluNetwork: Homogeneous network.
    """
    n = net.input_dim
    extra = n

    def shift(src):
        return src if src < n else src + 1

    gates = []
    negative_bias = False
    for gate in net.gates:
        if isinstance(gate, ReluGate):
            gates.append(ReluGate(shift(gate.source)))
            continue
        incoming = [(shift(src), w) for src, w in gate.incoming]
        if gate.bias != 0:
            incoming.append((extra, gate.bias))
            negative_bias = negative_bias or gate.bias < 0
        gates.append(AffineGate(tuple(incoming), 0))
    kind = net.kind
    if kind == 'monotone' and negative_bias:
        kind = 'icnn'
    return ReluNetwork(n + 1, tuple(gates), shift(net.output), kind)


def affine_pieces(net):
    """
    The max-of-affine form of a monotone or ICNN network.

    Args:
        net (ReluNetwork): Network, biases allowed.

    Returns:
        AffineMax: Pieces read off the vertices of the homogenized Newton polytope.
    """
    homogeneous = homogenize(net)
    polytope = eval_circuit(net_to_circuit(homogeneous)).result
    n = net.input_dim
    pieces = tuple((RatVec(v.coords[:n]), v.coords[n]) for v in polytope.vertices)
    return AffineMax(n, pieces)


def network_function(net):
    """The CpwlFn computed by a bias-free monotone or ICNN network."""
    return CpwlFn(net.input_dim, eval_circuit(net_to_circuit(net)).result.vertices)


def _horizon_analysis(net):
    """Walk the diagonal x = t(1, ..., 1); return (horizon, dead relu ids)."""
    if net.kind != 'monotone':
        raise NetworkValidationError([(None, "affine horizons are defined for monotone networks")])
    violations = validate(net)
    if violations:
        raise NetworkValidationError(violations)

    forms = [(Fraction(1), Fraction(0))] * net.input_dim
    horizon = Fraction(0)
    dead = set()
    for index, gate in enumerate(net.gates):
        node = net.gate_id(index)
        if isinstance(gate, AffineGate):
            slope = sum((w * forms[src][0] for src, w in gate.incoming), Fraction(0))
            offset = sum((w * forms[src][1] for src, w in gate.incoming), gate.bias)
            forms.append((slope, offset))
            continue
        slope, offset = forms[gate.source]
        if slope > 0:
            horizon = max(horizon, -offset / slope)
            forms.append((slope, offset))
        elif offset >= 0:
            forms.append((slope, offset))
        else:
            dead.add(node)
            forms.append((Fraction(0), Fraction(0)))
    return max(horizon, Fraction(1)), dead


def affine_horizon(net):
    """
    A point r' >= 1 beyond which the monotone network is affine.

    Every pre-activation is non-decreasing, so its minimum over [t, inf)^n is
    attained at the corner t(1, ..., 1); following the diagonal bottom-up gives
    the smallest t from which each live relu input stays non-negative. A relu
    whose input is constant and negative along the diagonal is negative on the
    whole region and contributes the constant 0.

    Args:
        net (ReluNetwork): Monotone network, biases allowed.

    Returns:
        Fraction: r'.
    """
    horizon, dead = _horizon_analysis(net)
    logger.debug("affine horizon %s (dead relus: %s)", horizon, sorted(dead))
    return horizon


def affine_form_beyond_horizon(net):
    """
    The affine function the network computes on [r', inf)^n.

    Returns:
        tuple: (r', AffineMax with a single piece)
    """
    horizon, dead = _horizon_analysis(net)
    n = net.input_dim
    forms = [(RatVec.unit(n, i), Fraction(0)) for i in range(n)]
    for index, gate in enumerate(net.gates):
        node = net.gate_id(index)
        if isinstance(gate, AffineGate):
            slope = RatVec.zero(n)
            offset = gate.bias
            for src, w in gate.incoming:
                slope = slope + forms[src][0].scale(w)
                offset += w * forms[src][1]
            forms.append((slope, offset))
        elif node in dead:
            forms.append((RatVec.zero(n), Fraction(0)))
        else:
            forms.append(forms[gate.source])
    slope, offset = forms[net.output]
    return horizon, AffineMax(n, ((slope, offset),))


def horizon_gap_check(net):
    """
    On [r', 2r']^2 a monotone planar network is affine, so it stays at least
    affine_gap_lower_bound(r') away from MAX_2 in mean absolute difference.

    Returns:
        dict: horizon, exact gap, bound and whether gap >= bound.
    """
    if net.input_dim != 2:
        raise DimensionMismatchError("the horizon gap check is planar")
    horizon, form = affine_form_beyond_horizon(net)
    box = ((horizon, 2 * horizon), (horizon, 2 * horizon))
    gap = cpwl.integrate_abs_diff(form, CpwlFn.max_n(2), box)
    bound = cpwl.affine_gap_lower_bound(horizon)
    return {'horizon': horizon, 'gap': gap, 'bound': bound, 'holds': gap >= bound}


def build_max_tree(n):
    """
    MAX_n as a general network of depth ceil(log2 n) using max(a, b) = b + relu(a - b).

    For n = 4 this is the two-layer pairwise tournament.
    """
    if n < 1:
        raise ConversionError("MAX_n needs n >= 1")
    builder = NetworkBuilder(n)
    level = [builder.affine([(i, 1)]) for i in range(n)] if n == 1 else list(range(n))
    while len(level) > 1:
        merged = []
        for a, b in zip(level[::2], level[1::2]):
            difference = builder.affine([(a, 1), (b, -1)])
            merged.append(builder.affine([(b, 1), (builder.relu(difference), 1)]))
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return builder.build(level[0], 'general')
