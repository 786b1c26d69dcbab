from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from newton_forge.utils.errors import InputFormatError
from newton_forge.utils.rational import format_rational, parse_rational

NETWORK_KINDS = ('general', 'monotone', 'icnn')


@dataclass(frozen=True)
class AffineGate:
    """
    Affine gate sum_j w_j * value(source_j) + bias.

    Attributes:
        incoming (tuple): (source id, weight) pairs; ids below input_dim are inputs.
        bias (Fraction): Constant term.
    """

    incoming: tuple = ()
    bias: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'incoming', tuple((int(src), parse_rational(w)) for src, w in self.incoming))
        object.__setattr__(self, 'bias', parse_rational(self.bias))

    @property
    def sources(self):
        return [src for src, _ in self.incoming]

    def to_dict(self) -> dict:
        return {
            'op': 'affine',
            'in': [[src, format_rational(w)] for src, w in self.incoming],
            'bias': format_rational(self.bias),
        }


@dataclass(frozen=True)
class ReluGate:
    """relu(value(source))."""

    source: int

    @property
    def sources(self):
        return [self.source]

    def to_dict(self) -> dict:
        return {'op': 'relu', 'in': self.source}


def gate_from_dict(data: dict):
    op = data.get('op')
    if op == 'affine':
        return AffineGate(tuple((src, w) for src, w in data.get('in', [])), data.get('bias', '0'))
    if op == 'relu':
        return ReluGate(int(data['in']))
    raise InputFormatError(f"unknown gate op {op!r}")


@dataclass(frozen=True)
class ReluNetwork:
    """
    A ReLU network as a DAG of affine and relu gates.

    Inputs x_1..x_n have ids 0..n-1; the gate at position i has id n + i.

    Attributes:
        input_dim (int): Number of inputs n.
        gates (tuple): AffineGate / ReluGate in topological order.
        output (int): Id of the output gate.
        kind (str): 'general', 'monotone' or 'icnn'.
    """

    input_dim: int
    gates: tuple = field(default_factory=tuple)
    output: int = 0
    kind: str = 'general'

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))

    def gate_id(self, index: int) -> int:
        return self.input_dim + index

    def is_input(self, node: int) -> bool:
        return 0 <= node < self.input_dim

    def gate(self, node: int):
        return self.gates[node - self.input_dim]

    def node_count(self) -> int:
        return self.input_dim + len(self.gates)

    def with_kind(self, kind: str) -> ReluNetwork:
        return ReluNetwork(self.input_dim, self.gates, self.output, kind)

    def validate(self):
        """
        Structural checks only: known kind, ids in range, output present.

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.input_dim < 1:
            return False, "Network needs at least one input"
        if self.kind not in NETWORK_KINDS:
            return False, f"Unknown network kind {self.kind!r}"
        if not 0 <= self.output < self.node_count():
            return False, f"Output id {self.output} is out of range"
        for index, gate in enumerate(self.gates):
            for src in gate.sources:
                if not 0 <= src < self.node_count():
                    return False, f"Gate {self.gate_id(index)} reads unknown id {src}"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'input_dim': self.input_dim,
            'kind': self.kind,
            'gates': [gate.to_dict() for gate in self.gates],
            'output': self.output,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ReluNetwork:
        try:
            network = cls(
                input_dim=int(data['input_dim']),
                gates=tuple(gate_from_dict(g) for g in data['gates']),
                output=int(data['output']),
                kind=data.get('kind', 'general'),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"malformed network: {exc}") from exc
        ok, message = network.validate()
        if not ok:
            raise InputFormatError(message)
        return network

    def __str__(self):
        return f"ReluNetwork({self.kind}, n={self.input_dim}, {len(self.gates)} gates)"


class NetworkBuilder:
    """
    Append-only helper that hands out gate ids.

    Example:
        builder = NetworkBuilder(2)
        s = builder.affine([(0, 1), (1, -1)])
        out = builder.relu(s)
        net = builder.build(out, 'icnn')
    """

    def __init__(self, input_dim: int):
        self.input_dim = input_dim
        self.gates = []

    def affine(self, incoming, bias=0) -> int:
        self.gates.append(AffineGate(tuple(incoming), bias))
        return self.input_dim + len(self.gates) - 1

    def relu(self, source: int) -> int:
        self.gates.append(ReluGate(source))
        return self.input_dim + len(self.gates) - 1

    def build(self, output: int, kind: str = 'general') -> ReluNetwork:
        return ReluNetwork(self.input_dim, tuple(self.gates), output, kind)


@dataclass(frozen=True)
class GateTrace:
    """
    Per-node values of one evaluation.

    Attributes:
        values (tuple): Value per node id (Fractions for networks, Polytopes for circuits).
        output (int): Output id.
    """

    values: tuple
    output: int

    @property
    def result(self):
        return self.values[self.output]

    def __getitem__(self, node):
        return self.values[node]

    def __len__(self):
        return len(self.values)
