"""Lowering passes from composite gates to the {single-qubit, cx} basis."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import BASIS, Circuit, CircuitError, Gate, Kind

RECURSION_THRESHOLD = 8


class StructuralError(CircuitError):
    """A relative-phase gate appears where its phases could reach a measurement."""


@dataclass(frozen=True)
class McxStrategy:
    name: str  # "ucg" or "recursion"
    ancilla: int | None = None

    def __post_init__(self) -> None:
        if self.name not in ("ucg", "recursion"):
            raise ValueError(f"unknown strategy {self.name!r}")
        if self.ancilla is not None and self.ancilla < 0:
            raise ValueError("ancilla index must be non-negative")

    @property
    def is_recursion(self) -> bool:
        return self.name == "recursion"


UCG = McxStrategy("ucg")


def select_mcx_strategy(k: int, ancilla: int | None = None) -> McxStrategy:
    """Ucg below 8 controls, Recursion from 8 on."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k < RECURSION_THRESHOLD:
        return UCG
    return McxStrategy("recursion", ancilla)


def gray(m: int) -> int:
    return m ^ (m >> 1)


def _check_distinct(*qubits: int) -> None:
    if len(set(qubits)) != len(qubits):
        raise CircuitError(f"qubits must be distinct, got {qubits}")


def lower_swap(a: int, b: int) -> list[Gate]:
    _check_distinct(a, b)
    return [Gate(Kind.CX, (a, b)), Gate(Kind.CX, (b, a)), Gate(Kind.CX, (a, b))]


def ucg_transformed_angles(angles: Sequence[float]) -> np.ndarray:
    """Angles for the Gray-code rotation sequence.

    Step ``m`` rotates by ``alpha[m]`` while the select pattern ``s`` has
    conjugated the target ``popcount(s & gray(m))`` times, so
    ``theta = W @ alpha`` with ``W[s, m] = (-1)**popcount(s & gray(m))``.
    ``W`` has orthogonal rows, hence ``alpha = W.T @ theta / 2**k``.
    """
    theta = np.asarray(angles, dtype=float)
    size = len(theta)
    g = np.array([gray(m) for m in range(size)])
    s = np.arange(size)[:, None]
    parity = np.vectorize(lambda v: bin(v).count("1") & 1)(s & g[None, :])
    w = 1 - 2 * parity
    return w.T @ theta / size


def lower_ucg_ry(selects: Sequence[int], target: int, angles: Sequence[float],
                 drop_last: bool = False) -> list[Gate]:
    """Multiplexed RotY: ``2**k`` RotY and ``2**k`` CX (one fewer with ``drop_last``)."""
    selects = tuple(selects)
    _check_distinct(*selects, target)
    k = len(selects)
    if len(angles) != 1 << k:
        raise CircuitError(f"{k} selects need {1 << k} angles, got {len(angles)}")
    if k == 0:
        return [Gate(Kind.RY, (target,), angle=float(angles[0]))]
    alpha = ucg_transformed_angles(angles)
    size = 1 << k
    out = []
    for m in range(size):
        out.append(Gate(Kind.RY, (target,), angle=float(alpha[m])))
        if drop_last and m == size - 1:
            break
        bit = (gray(m) ^ gray((m + 1) % size)).bit_length() - 1
        out.append(Gate(Kind.CX, (selects[bit], target)))
    return out


def lower_mcx_ucg(controls: Sequence[int], target: int) -> list[Gate]:
    """k-controlled X with ``2**k`` RotY and ``2**k - 1`` CX, no ancilla.

    Built as a multiplexed RotY whose final CX (controlled by the last
    control) is dropped. The result equals ``MCX @ D`` where ``D`` applies Z
    to the target for control patterns with the last control set but not all
    controls set. ``D`` is invisible whenever the target starts at 0, or
    holds exactly the AND of the controls (compute/uncompute of a clean
    ancilla), which is how every synthesized circuit uses it.
    """
    controls = tuple(controls)
    k = len(controls)
    if k == 0:
        raise CircuitError("mcx needs at least one control")
    _check_distinct(*controls, target)
    if k == 1:
        return [Gate(Kind.CX, (controls[0], target))]
    full = (1 << k) - 1
    msb = 1 << (k - 1)
    angles = [math.pi if (s & msb and s != full) else 0.0 for s in range(1 << k)]
    return lower_ucg_ry(controls, target, angles, drop_last=True)


def lower_mcz(qubits: Sequence[int], spare: int | None = None) -> list[Gate]:
    """Exact sign flip on the all-ones pattern.

    Three or more qubits use a multiplexed RotY on ``spare`` (any state) with
    angle ``2*pi`` on the all-ones pattern, since RotY(2*pi) = -I.
    """
    qubits = tuple(qubits)
    _check_distinct(*qubits)
    if len(qubits) == 1:
        return [Gate(Kind.Z, qubits)]
    if len(qubits) == 2:
        a, b = qubits
        return [Gate(Kind.H, (b,)), Gate(Kind.CX, (a, b)), Gate(Kind.H, (b,))]
    if spare is None:
        raise CircuitError(f"mcz on {len(qubits)} qubits needs a spare qubit")
    _check_distinct(*qubits, spare)
    angles = [0.0] * (1 << len(qubits))
    angles[-1] = 2 * math.pi
    return lower_ucg_ry(qubits, spare, angles)


def lower_cz(a: int, b: int) -> list[Gate]:
    return lower_mcz((a, b))


def _exact_mcx(controls: tuple[int, ...], target: int, spare: int) -> list[Gate]:
    if len(controls) == 1:
        return [Gate(Kind.CX, (controls[0], target))]
    return ([Gate(Kind.H, (target,))] + lower_mcz(controls + (target,), spare)
            + [Gate(Kind.H, (target,))])


def _recursion_cx(k: int, split: int) -> int:
    b = k - split
    middle = 1 if b == 0 else 1 << (b + 2)
    return 2 * ((1 << split) - 1) + middle


def recursion_split(k: int) -> int:
    """Size of the first control group, chosen to minimise CX count."""
    return min(range(1, k), key=lambda a: (_recursion_cx(k, a), a))


def lower_mcx_recursion(controls: Sequence[int], target: int, ancilla: int | None) -> list[Gate]:
    """Exact k-controlled X using one clean ancilla (k >= 3).

    The first control group is ANDed into the ancilla with the cheap UCG
    construction (its residual phase is invisible on a clean target), an
    exact MCX from the remaining controls plus the ancilla flips the target,
    and the ancilla is uncomputed.
    """
    controls = tuple(controls)
    k = len(controls)
    if ancilla is None:
        raise CircuitError("recursion lowering needs an ancilla")
    if k < 3:
        raise CircuitError("recursion lowering needs at least 3 controls")
    _check_distinct(*controls, target, ancilla)
    a = recursion_split(k)
    first, rest = controls[:a], controls[a:]
    head = lower_mcx_ucg(first, ancilla)
    middle = _exact_mcx(rest + (ancilla,), target, spare=first[0])
    return head + middle + head


_T = math.pi / 4


def lower_rc3x(controls: Sequence[int], target: int) -> list[Gate]:
    """Relative-phase CCCX: 6 CX and 12 single-qubit gates."""
    c0, c1, c2 = controls
    t = target
    _check_distinct(c0, c1, c2, t)

    def h():
        return Gate(Kind.H, (t,))

    def rz(sign):
        return Gate(Kind.RZ, (t,), angle=sign * _T)

    def cx(c):
        return Gate(Kind.CX, (c, t))

    return [h(), rz(1), cx(c2), rz(-1), h(),
            cx(c0), rz(1), cx(c1), rz(-1), cx(c0), rz(1), cx(c1), rz(-1),
            h(), rz(1), cx(c2), rz(-1), h()]


def rc3x_inverse_sequence(controls: Sequence[int], target: int) -> list[Gate]:
    return [g.inverse() for g in reversed(lower_rc3x(controls, target))]


def lower_gate(gate: Gate) -> list[Gate]:
    kind = gate.kind
    if kind in BASIS:
        return [gate]
    if kind is Kind.SWAP:
        return lower_swap(*gate.qubits)
    if kind is Kind.CZ:
        return lower_cz(*gate.qubits)
    if kind is Kind.MCZ:
        return lower_mcz(gate.qubits, gate.ancilla)
    if kind is Kind.MCX:
        if gate.ancilla is not None and len(gate.controls) >= 3:
            return lower_mcx_recursion(gate.controls, gate.target, gate.ancilla)
        return lower_mcx_ucg(gate.controls, gate.target)
    if kind is Kind.UCG_RY:
        return lower_ucg_ry(gate.controls, gate.target, gate.angles)
    if kind is Kind.RC3X:
        return lower_rc3x(gate.controls, gate.target)
    raise CircuitError(f"no lowering for {kind.value}")  # pragma: no cover


def _only_reads(gate: Gate, qubits: set[int], target: int) -> bool:
    """True when ``gate`` leaves the rc3x phases commuting past it."""
    touched = set(gate.touched)
    if not touched & (qubits | {target}):
        return True
    if gate.kind in (Kind.Z, Kind.CZ, Kind.MCZ):
        return True  # diagonal gates commute with the rc3x pair
    if target in touched:
        return False
    return not (set(gate.qubits[-1:]) & qubits) and gate.ancilla not in qubits


def check_rc3x_pairing(circuit: Circuit) -> None:
    """Every rc3x must later meet its explicit inverse on the same qubits,
    with the qubits in between only read as controls."""
    gates = circuit.gates
    for p, g in enumerate(gates):
        if g.kind is not Kind.RC3X:
            continue
        inv = rc3x_inverse_sequence(g.controls, g.target)
        n = len(inv)
        q = p + 1
        while q < len(gates):
            if gates[q:q + n] == inv:
                break
            if not _only_reads(gates[q], set(g.controls), g.target):
                q = len(gates)
                break
            q += 1
        if q >= len(gates):
            raise StructuralError(
                f"rc3x at position {p} on {g.qubits} is not undone by its inverse"
            )


def lower_to_basis(circuit: Circuit, check_pairing: bool = True) -> Circuit:
    if check_pairing:
        check_rc3x_pairing(circuit)
    out = Circuit(circuit.width, layout=circuit.layout)
    for g in circuit.gates:
        out.extend(lower_gate(g))
    return out


def _counts(gates: list[Gate]) -> tuple[int, int]:
    cx = sum(g.kind is Kind.CX for g in gates)
    return len(gates) - cx, cx


@dataclass(frozen=True)
class McxTableRow:
    k: int
    ucg_u: int
    ucg_cx: int
    recursion_u: int | None
    recursion_cx: int | None

    def to_dict(self) -> dict:
        return {"k": self.k,
                "ucg": {"u": self.ucg_u, "cx": self.ucg_cx},
                "recursion": None if self.recursion_u is None
                else {"u": self.recursion_u, "cx": self.recursion_cx}}


def mcx_table(max_controls: int = 9, min_controls: int = 2) -> list[McxTableRow]:
    """Measured U/CX counts of both MCX lowerings for each control count."""
    if not 2 <= min_controls <= max_controls <= 9:
        raise ValueError("control counts must satisfy 2 <= min <= max <= 9")
    rows = []
    for k in range(min_controls, max_controls + 1):
        controls = tuple(range(k))
        u, cx = _counts(lower_mcx_ucg(controls, k))
        ru = rcx = None
        if k >= 3:
            ru, rcx = _counts(lower_mcx_recursion(controls, k, k + 1))
        rows.append(McxTableRow(k, u, cx, ru, rcx))
    return rows
