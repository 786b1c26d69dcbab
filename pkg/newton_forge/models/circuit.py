from __future__ import annotations

from dataclasses import dataclass, field

from newton_forge.models.ratvec import RatVec
from newton_forge.utils.errors import InputFormatError
from newton_forge.utils.rational import format_rational, parse_rational

CIRCUIT_KINDS = ('monotone', 'icnn')


@dataclass(frozen=True)
class PointGate:
    """The single point {q}."""

    q: RatVec

    @property
    def sources(self):
        return []

    def to_dict(self) -> dict:
        return {'op': 'point', 'q': self.q.to_list()}


@dataclass(frozen=True)
class SumGate:
    """
    Minkowski combination sum_j a_j P_j with a_j > 0.

    Attributes:
        terms (tuple): (gate id, coefficient) pairs.
    """

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple((int(src), parse_rational(a)) for src, a in self.terms))

    @property
    def sources(self):
        return [src for src, _ in self.terms]

    def to_dict(self) -> dict:
        return {'op': 'sum', 'in': [[src, format_rational(a)] for src, a in self.terms]}


@dataclass(frozen=True)
class AddPointGate:
    """conv(P_source union {q}); q = 0 is the "add zero" of a relu."""

    source: int
    q: RatVec

    @property
    def sources(self):
        return [self.source]

    def to_dict(self) -> dict:
        return {'op': 'add_point', 'in': self.source, 'q': self.q.to_list()}


def gate_from_dict(data: dict):
    op = data.get('op')
    if op == 'point':
        return PointGate(RatVec.from_list(data['q']))
    if op == 'sum':
        return SumGate(tuple((src, a) for src, a in data['in']))
    if op == 'add_point':
        return AddPointGate(int(data['in']), RatVec.from_list(data['q']))
    raise InputFormatError(f"unknown circuit op {op!r}")


@dataclass(frozen=True)
class PolytopeCircuit:
    """
    A construction of a polytope from points by Minkowski sums and add-point steps.

    Gate ids are positions in `gates`.

    Attributes:
        dim (int): Ambient dimension of every gate polytope.
        gates (tuple): PointGate / SumGate / AddPointGate in topological order.
        output (int): Id of the output gate.
        kind (str): 'monotone' (non-negative points, add-zero only) or 'icnn'.
    """

    dim: int
    gates: tuple = field(default_factory=tuple)
    output: int = 0
    kind: str = 'icnn'

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))

    def gate(self, node: int):
        return self.gates[node]

    def validate(self):
        """
        Returns:
            tuple: (is_valid, error_message) for the structural checks.
        """
        if self.kind not in CIRCUIT_KINDS:
            return False, f"Unknown circuit kind {self.kind!r}"
        if not 0 <= self.output < len(self.gates):
            return False, f"Output id {self.output} is out of range"
        for node, gate in enumerate(self.gates):
            for src in gate.sources:
                if not 0 <= src < len(self.gates):
                    return False, f"Gate {node} reads unknown id {src}"
            if isinstance(gate, (PointGate, AddPointGate)) and gate.q.dim != self.dim:
                return False, f"Gate {node} has a point of dimension {gate.q.dim}"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'dim': self.dim,
            'kind': self.kind,
            'gates': [gate.to_dict() for gate in self.gates],
            'output': self.output,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PolytopeCircuit:
        try:
            circuit = cls(
                dim=int(data['dim']),
                gates=tuple(gate_from_dict(g) for g in data['gates']),
                output=int(data['output']),
                kind=data.get('kind', 'icnn'),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"malformed circuit: {exc}") from exc
        ok, message = circuit.validate()
        if not ok:
            raise InputFormatError(message)
        return circuit

    def __str__(self):
        return f"PolytopeCircuit({self.kind}, dim={self.dim}, {len(self.gates)} gates)"


class CircuitBuilder:
    """Append-only helper that hands out circuit gate ids."""

    def __init__(self, dim: int):
        self.dim = dim
        self.gates = []

    def _append(self, gate) -> int:
        self.gates.append(gate)
        return len(self.gates) - 1

    def point(self, q: RatVec) -> int:
        return self._append(PointGate(q))

    def sum(self, terms) -> int:
        return self._append(SumGate(tuple(terms)))

    def add_point(self, source: int, q: RatVec = None) -> int:
        return self._append(AddPointGate(source, q if q is not None else RatVec.zero(self.dim)))

    def build(self, output: int, kind: str = 'icnn') -> PolytopeCircuit:
        return PolytopeCircuit(self.dim, tuple(self.gates), output, kind)
