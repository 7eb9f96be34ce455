"""Two-level circuit IR: composite gates (mcx, ucg_ry, rc3x, ...) and the
{single-qubit, cx} basis they are lowered to.

Qubit order inside a gate is controls first, target last. Global phase is
not tracked.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence


class Kind(str, Enum):
    X = "x"
    H = "h"
    Z = "z"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    SWAP = "swap"
    MCX = "mcx"
    MCZ = "mcz"
    RC3X = "rc3x"
    UCG_RY = "ucg_ry"


SINGLE_QUBIT = frozenset({Kind.X, Kind.H, Kind.Z, Kind.RY, Kind.RZ})
BASIS = SINGLE_QUBIT | {Kind.CX}
SELF_INVERSE = frozenset(
    {Kind.X, Kind.H, Kind.Z, Kind.CX, Kind.CZ, Kind.SWAP, Kind.MCX, Kind.MCZ}
)
_ARITY = {Kind.X: 1, Kind.H: 1, Kind.Z: 1, Kind.RY: 1, Kind.RZ: 1,
          Kind.CX: 2, Kind.CZ: 2, Kind.SWAP: 2, Kind.RC3X: 4}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """One gate application.

    ``ancilla`` is only meaningful for ``mcx`` (clean ancilla that selects the
    recursion lowering) and ``mcz`` (a borrowed qubit outside the gate, any
    state, needed to lower three or more qubits).
    """

    kind: Kind
    qubits: tuple[int, ...]
    angle: float | None = None
    angles: tuple[float, ...] | None = None
    ancilla: int | None = None

    def __post_init__(self) -> None:
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        qs = self.qubits
        if len(set(qs)) != len(qs):
            raise CircuitError(f"{kind.value}: repeated qubit in {qs}")
        if any(q < 0 for q in qs):
            raise CircuitError(f"{kind.value}: negative qubit index in {qs}")
        if kind in _ARITY and len(qs) != _ARITY[kind]:
            raise CircuitError(f"{kind.value} acts on {_ARITY[kind]} qubits, got {len(qs)}")
        if kind is Kind.MCX and len(qs) < 2:
            raise CircuitError("mcx needs at least one control")
        if kind is Kind.MCZ and len(qs) < 1:
            raise CircuitError("mcz needs at least one qubit")
        if kind in (Kind.RY, Kind.RZ):
            if self.angle is None:
                raise CircuitError(f"{kind.value} requires an angle")
            object.__setattr__(self, "angle", float(self.angle))
        if kind is Kind.UCG_RY:
            if len(qs) < 1 or self.angles is None:
                raise CircuitError("ucg_ry requires a target and an angle table")
            angles = tuple(float(a) for a in self.angles)
            if len(angles) != 1 << (len(qs) - 1):
                raise CircuitError(
                    f"ucg_ry with {len(qs) - 1} selects needs {1 << (len(qs) - 1)} angles, "
                    f"got {len(angles)}"
                )
            object.__setattr__(self, "angles", angles)
        if self.ancilla is not None:
            if kind not in (Kind.MCX, Kind.MCZ):
                raise CircuitError(f"{kind.value} does not take an ancilla")
            if self.ancilla in qs:
                raise CircuitError("ancilla must be outside the gate's qubits")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def touched(self) -> tuple[int, ...]:
        return self.qubits if self.ancilla is None else self.qubits + (self.ancilla,)

    def inverse(self) -> Gate:
        if self.kind in SELF_INVERSE:
            return self
        if self.kind in (Kind.RY, Kind.RZ):
            return Gate(self.kind, self.qubits, angle=-self.angle)
        if self.kind is Kind.UCG_RY:
            return Gate(self.kind, self.qubits, angles=tuple(-a for a in self.angles))
        raise CircuitError(f"{self.kind.value} has no single-gate inverse")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "qubits": list(self.qubits)}
        if self.angle is not None:
            out["angle"] = self.angle
        if self.angles is not None:
            out["angles"] = list(self.angles)
        if self.ancilla is not None:
            out["ancilla"] = self.ancilla
        return out

    @classmethod
    def from_dict(cls, data: dict) -> Gate:
        try:
            kind = Kind(data["kind"])
        except (KeyError, ValueError) as exc:
            raise CircuitError(f"unknown gate kind in {data!r}") from exc
        angles = data.get("angles")
        return cls(kind, tuple(data["qubits"]), angle=data.get("angle"),
                   angles=None if angles is None else tuple(angles),
                   ancilla=data.get("ancilla"))


@dataclass(frozen=True)
class GateCountReport:
    counts: dict[str, int]
    u_count: int
    cx_count: int
    width: int
    depth: int | None = None

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        out = {"width": self.width, "u_count": self.u_count, "cx_count": self.cx_count,
               "total": self.total, "counts": dict(sorted(self.counts.items()))}
        if self.depth is not None:
            out["depth"] = self.depth
        return out


@dataclass
class Circuit:
    width: int
    gates: list[Gate] = field(default_factory=list)
    layout: object | None = None

    def __post_init__(self) -> None:
        if self.width < 0:
            raise CircuitError("width must be non-negative")
        gates, self.gates = self.gates, []
        self.extend(gates)

    def append(self, gate: Gate) -> Circuit:
        bad = [q for q in gate.touched if q >= self.width]
        if bad:
            raise CircuitError(
                f"{gate.kind.value} on qubit(s) {bad} outside circuit width {self.width}"
            )
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    # builder shorthands
    def x(self, q): return self.append(Gate(Kind.X, (q,)))
    def h(self, q): return self.append(Gate(Kind.H, (q,)))
    def z(self, q): return self.append(Gate(Kind.Z, (q,)))
    def ry(self, theta, q): return self.append(Gate(Kind.RY, (q,), angle=theta))
    def rz(self, theta, q): return self.append(Gate(Kind.RZ, (q,), angle=theta))
    def cx(self, c, t): return self.append(Gate(Kind.CX, (c, t)))
    def cz(self, a, b): return self.append(Gate(Kind.CZ, (a, b)))
    def swap(self, a, b): return self.append(Gate(Kind.SWAP, (a, b)))
    def rc3x(self, controls, t): return self.append(Gate(Kind.RC3X, (*controls, t)))

    def mcx(self, controls: Sequence[int], t: int, ancilla: int | None = None):
        return self.append(Gate(Kind.MCX, (*controls, t), ancilla=ancilla))

    def mcz(self, qubits: Sequence[int], ancilla: int | None = None):
        return self.append(Gate(Kind.MCZ, tuple(qubits), ancilla=ancilla))

    def ucg_ry(self, selects: Sequence[int], t: int, angles: Sequence[float]):
        return self.append(Gate(Kind.UCG_RY, (*selects, t), angles=tuple(angles)))

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        return compose(self, other)

    @property
    def is_basis(self) -> bool:
        return all(g.kind in BASIS for g in self.gates)

    def copy(self) -> Circuit:
        return Circuit(self.width, list(self.gates), self.layout)

    def inverse(self) -> Circuit:
        return inverse(self)

    def count_gates(self, with_depth: bool = False) -> GateCountReport:
        return count_gates(self, with_depth)

    def to_dict(self) -> dict:
        return {"width": self.width, "gates": [g.to_dict() for g in self.gates]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> Circuit:
        if not isinstance(data, dict) or "width" not in data or "gates" not in data:
            raise CircuitError("circuit JSON needs 'width' and 'gates'")
        return cls(int(data["width"]), [Gate.from_dict(g) for g in data["gates"]])

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))


def compose(first: Circuit, second: Circuit) -> Circuit:
    """``first`` followed by ``second``."""
    if first.width != second.width:
        raise CircuitError(f"width mismatch: {first.width} vs {second.width}")
    return Circuit(first.width, first.gates + second.gates, first.layout or second.layout)


def inverse(circuit: Circuit) -> Circuit:
    """Reversed circuit of inverted gates; rc3x expands to its explicit inverse sequence."""
    from .decompose import rc3x_inverse_sequence

    out = Circuit(circuit.width, layout=circuit.layout)
    for g in reversed(circuit.gates):
        if g.kind is Kind.RC3X:
            out.extend(rc3x_inverse_sequence(g.controls, g.target))
        else:
            out.append(g.inverse())
    return out


def depth(circuit: Circuit) -> int:
    level = [0] * circuit.width
    for g in circuit.gates:
        qs = g.touched
        d = max(level[q] for q in qs) + 1
        for q in qs:
            level[q] = d
    return max(level, default=0)


def count_gates(circuit: Circuit, with_depth: bool = False) -> GateCountReport:
    counts = Counter(g.kind.value for g in circuit.gates)
    u = sum(v for k, v in counts.items() if Kind(k) in SINGLE_QUBIT)
    return GateCountReport(dict(counts), u, counts.get(Kind.CX.value, 0), circuit.width,
                           depth(circuit) if with_depth else None)
