"""Dense statevector simulator.

Basis states are little-endian: qubit ``q`` is bit ``q`` of the amplitude
index. Internally the amplitude vector is viewed as a tensor of shape
``(2,) * L`` (optionally with one trailing batch axis, used by
``unitary_of``), where qubit ``q`` lives on axis ``L - 1 - q``.

X, CX, Swap and MCX are applied as exact amplitude permutations and Z, CZ and
MCZ as exact sign flips, so they introduce no rounding error.

Sampling uses numpy's PCG64 generator: a ``seed`` builds
``np.random.Generator(np.random.PCG64(seed))``, and the counts are a single
multinomial draw over the exact joint distribution of the measured qubits.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Gate, Kind

UNITARY_MAX_QUBITS = 12
DEFAULT_MAX_QUBITS = 22


class WidthLimitError(ValueError):
    pass


def max_qubits() -> int:
    value = os.environ.get("QFOREST_MAX_QUBITS")
    return int(value) if value else DEFAULT_MAX_QUBITS


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _index(width: int, ndim: int, fixed: dict[int, int]) -> tuple:
    idx = [slice(None)] * ndim
    for q, v in fixed.items():
        idx[width - 1 - q] = v
    return tuple(idx)


def _apply_matrix(t: np.ndarray, width: int, target: int, m: np.ndarray,
                  fixed: dict[int, int]) -> None:
    i0 = _index(width, t.ndim, {**fixed, target: 0})
    i1 = _index(width, t.ndim, {**fixed, target: 1})
    a0 = t[i0].copy()
    a1 = t[i1]
    t[i0] = m[0, 0] * a0 + m[0, 1] * a1
    t[i1] = m[1, 0] * a0 + m[1, 1] * a1


def _flip(t: np.ndarray, width: int, target: int, fixed: dict[int, int]) -> None:
    i0 = _index(width, t.ndim, {**fixed, target: 0})
    i1 = _index(width, t.ndim, {**fixed, target: 1})
    tmp = t[i0].copy()
    t[i0] = t[i1]
    t[i1] = tmp


def apply_gate(t: np.ndarray, width: int, gate: Gate) -> None:
    """Apply ``gate`` in place to the tensor view ``t``."""
    kind, qs = gate.kind, gate.qubits
    ones = {q: 1 for q in qs[:-1]}
    if kind is Kind.X or kind is Kind.CX or kind is Kind.MCX:
        _flip(t, width, qs[-1], ones)
    elif kind is Kind.Z or kind is Kind.CZ or kind is Kind.MCZ:
        t[_index(width, t.ndim, {q: 1 for q in qs})] *= -1
    elif kind is Kind.H:
        _apply_matrix(t, width, qs[0], _H, {})
    elif kind is Kind.RY:
        _apply_matrix(t, width, qs[0], ry_matrix(gate.angle), {})
    elif kind is Kind.RZ:
        _apply_matrix(t, width, qs[0], rz_matrix(gate.angle), {})
    elif kind is Kind.SWAP:
        a, b = qs
        i01 = _index(width, t.ndim, {a: 0, b: 1})
        i10 = _index(width, t.ndim, {a: 1, b: 0})
        tmp = t[i01].copy()
        t[i01] = t[i10]
        t[i10] = tmp
    elif kind is Kind.UCG_RY:
        selects, target = qs[:-1], qs[-1]
        for s, theta in enumerate(gate.angles):
            fixed = {q: (s >> b) & 1 for b, q in enumerate(selects)}
            _apply_matrix(t, width, target, ry_matrix(theta), fixed)
    elif kind is Kind.RC3X:
        # the true relative-phase gate, so that rc3x followed by its explicit
        # inverse sequence is the identity on every input
        from .decompose import lower_rc3x

        for g in lower_rc3x(qs[:-1], qs[-1]):
            apply_gate(t, width, g)
    else:  # pragma: no cover
        raise CircuitError(f"cannot simulate {kind}")


@dataclass(frozen=True)
class SampleResult:
    """Counts keyed by bitstring; character ``k`` is the value of ``qubits[k]``."""

    qubits: tuple[int, ...]
    counts: dict[str, int]
    shots: int
    seed: int | None

    def count(self, outcome: str) -> int:
        return self.counts.get(outcome, 0)

    def to_dict(self) -> dict:
        return {"qubits": list(self.qubits), "counts": dict(sorted(self.counts.items())),
                "shots": self.shots, "seed": self.seed}


class Statevector:
    """Owns a flat complex amplitude vector of length ``2**width``."""

    def __init__(self, width: int, amplitudes: np.ndarray | None = None) -> None:
        limit = max_qubits()
        if width > limit:
            raise WidthLimitError(
                f"{width} qubits exceeds the simulator limit of {limit} (set QFOREST_MAX_QUBITS)"
            )
        self.width = width
        if amplitudes is None:
            amplitudes = np.zeros(1 << width, dtype=complex)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=complex)
            if amplitudes.shape != (1 << width,):
                raise ValueError(f"expected {1 << width} amplitudes, got {amplitudes.shape}")
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, width: int, index: int) -> Statevector:
        amps = np.zeros(1 << width, dtype=complex)
        amps[index] = 1.0
        return cls(width, amps)

    def copy(self) -> Statevector:
        return Statevector(self.width, self.amplitudes.copy())

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.width)

    def apply(self, gate: Gate) -> Statevector:
        bad = [q for q in gate.touched if q >= self.width]
        if bad:
            raise CircuitError(f"{gate.kind.value} on qubit(s) {bad} outside width {self.width}")
        if self.width:
            apply_gate(self._tensor(), self.width, gate)
        return self

    def apply_circuit(self, circuit: Circuit) -> Statevector:
        if circuit.width != self.width:
            raise CircuitError(f"circuit width {circuit.width} != state width {self.width}")
        for g in circuit.gates:
            self.apply(g)
        return self

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self, qubits: Sequence[int] | None = None) -> np.ndarray:
        """Joint distribution of ``qubits``; ``qubits[0]`` is the most significant index bit."""
        probs = np.abs(self.amplitudes) ** 2
        if qubits is None:
            return probs
        qubits = list(qubits)
        t = probs.reshape((2,) * self.width)
        axes = [self.width - 1 - q for q in qubits]
        others = tuple(a for a in range(self.width) if a not in axes)
        reduced = t.sum(axis=others)
        # remaining axes are in increasing axis order; reorder to the listed qubits
        kept = sorted(axes)
        reduced = np.transpose(reduced, [kept.index(a) for a in axes])
        return reduced.reshape(-1)

    def marginal(self, qubit: int, value: int = 0) -> float:
        if not 0 <= qubit < self.width:
            raise CircuitError(f"qubit {qubit} outside width {self.width}")
        probs = (np.abs(self.amplitudes) ** 2).reshape(-1, 2, 1 << qubit)
        return float(probs[:, value, :].sum())

    def sample(self, qubits: Sequence[int], shots: int, seed: int | None = None,
               rng: np.random.Generator | None = None) -> SampleResult:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        qubits = tuple(qubits)
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(seed))
        probs = self.probabilities(qubits)
        probs = probs / probs.sum()
        draws = rng.multinomial(shots, probs)
        m = len(qubits)
        counts = {format(k, f"0{m}b"): int(c) for k, c in enumerate(draws) if c}
        return SampleResult(qubits, counts, shots, seed)


def run(circuit: Circuit, state: Statevector | None = None) -> Statevector:
    """Apply ``circuit`` to a copy of ``state`` (default all-zeros)."""
    sv = Statevector(circuit.width) if state is None else state.copy()
    return sv.apply_circuit(circuit)


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Matrix whose column ``c`` is the circuit applied to basis state ``c``."""
    width = circuit.width
    if width > UNITARY_MAX_QUBITS:
        raise WidthLimitError(f"unitary_of supports at most {UNITARY_MAX_QUBITS} qubits")
    dim = 1 << width
    u = np.eye(dim, dtype=complex)
    t = u.reshape((2,) * width + (dim,))
    for g in circuit.gates:
        bad = [q for q in g.touched if q >= width]
        if bad:
            raise CircuitError(f"{g.kind.value} on qubit(s) {bad} outside width {width}")
        apply_gate(t, width, g)
    return u


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max elementwise deviation after aligning phases on b's largest entry."""
    flat = np.argmax(np.abs(b))
    pa, pb = a.flat[flat], b.flat[flat]
    if abs(pa) < 1e-12:
        return float(np.max(np.abs(a - b))) + 1.0
    return float(np.max(np.abs(a * (pb / pa) / abs(pb / pa) - b)))
