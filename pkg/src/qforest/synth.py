"""Builds the forest prediction circuit A and the reflections used by QAE.

Register order (little-endian qubit indexes, lowest first)::

    anc_mct_rec | X (|X|) | anc_i | i (n) | anc_j | j (h-1) | class

Traversal keeps the path taken so far in ``j`` as an integer whose bits are
the visited attribute values, most significant first. At depth ``d`` the
prefix ``p`` identifies the heap node ``2**d - 1 + p``. One step for that node
flags ``anc_j = [j == p]``, doubles ``j`` by flipping the known bits of
``p ^ 2p`` under ``anc_j``, adds the attribute bit into the now-zero ``j[0]``,
and unflags ``anc_j`` by matching the upper bits of ``j`` against ``p``.
Prefixes are handled in descending order so a doubled value never collides
with one still waiting to be processed. Every step is gated by ``anc_i``,
which is 1 only on the branch ``i == t`` of the tree being traversed.

Trees are visited in Gray-code order so that ``anc_i`` moves from one tree to
the next with a single multi-controlled X over ``n - 1`` bits instead of a
full compare and uncompare. For 3 <= n <= 8 the high bits of ``i`` are first
matched into ``anc_mct_rec``, making low-bit transitions one CX.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, Kind
from .decompose import RECURSION_THRESHOLD, gray
from .forest import ForestModel, _check_input, leaf_angles

STRATEGIES = ("auto", "ucg", "recursion")


@dataclass(frozen=True)
class RegisterLayout:
    n_x: int
    n: int
    h: int

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n < 0 or self.h < 2:
            raise ValueError(f"invalid layout sizes {self}")

    @property
    def anc_mct_rec(self) -> int:
        return 0

    @property
    def x(self) -> range:
        return range(1, 1 + self.n_x)

    @property
    def anc_i(self) -> int:
        return 1 + self.n_x

    @property
    def i(self) -> range:
        return range(self.anc_i + 1, self.anc_i + 1 + self.n)

    @property
    def anc_j(self) -> int:
        return self.anc_i + 1 + self.n

    @property
    def j(self) -> range:
        return range(self.anc_j + 1, self.anc_j + self.h)

    @property
    def class_qubit(self) -> int:
        return self.anc_j + self.h

    @property
    def width(self) -> int:
        return self.n_x + self.n + self.h + 3

    @property
    def ancillas(self) -> tuple[int, ...]:
        return (self.anc_mct_rec, self.anc_i, self.anc_j)

    @property
    def working(self) -> tuple[int, ...]:
        return (*self.x, *self.i, *self.j, self.class_qubit)

    def registers(self) -> dict[str, list[int]]:
        return {"anc_mct_rec": [self.anc_mct_rec], "X": list(self.x), "anc_i": [self.anc_i],
                "i": list(self.i), "anc_j": [self.anc_j], "j": list(self.j),
                "class": [self.class_qubit]}

    @classmethod
    def for_forest(cls, forest: ForestModel) -> RegisterLayout:
        return cls(forest.attr_count, forest.n, forest.height)


@dataclass(frozen=True)
class SynthesizedPredictor:
    circuit: Circuit
    layout: RegisterLayout
    forest: ForestModel
    x: tuple[int, ...]
    angles: np.ndarray  # ucg_ry angle table indexed by leaf + (tree << (h-1))

    @property
    def class_qubit(self) -> int:
        return self.layout.class_qubit


def prepare_x(layout: RegisterLayout, x: Sequence[int]) -> list[Gate]:
    if len(x) != layout.n_x:
        raise ValueError(f"input has {len(x)} bits, layout expects {layout.n_x}")
    return [Gate(Kind.X, (layout.x[t],)) for t, bit in enumerate(x) if bit]


def _match(circ: Circuit, controls: Sequence[int], values: Sequence[int], target: int,
           ancilla: int | None = None) -> None:
    """Flip ``target`` when every control equals its value (X-conjugated zeros)."""
    flips = [c for c, v in zip(controls, values) if not v]
    for c in flips:
        circ.x(c)
    if not controls:
        circ.x(target)
    elif len(controls) == 1:
        circ.cx(controls[0], target)
    else:
        circ.mcx(controls, target, ancilla=ancilla)
    for c in flips:
        circ.x(c)


def _bits(value: int, count: int) -> list[int]:
    return [(value >> b) & 1 for b in range(count)]


def _mcx_cost(k: int) -> int:
    return 0 if k == 0 else (1 << k) - 1


class _TreeSelector:
    """Emits the anc_i updates that visit every tree index in Gray order."""

    def __init__(self, circ: Circuit, layout: RegisterLayout, strategy: str) -> None:
        self.circ, self.lay = circ, layout
        n = layout.n
        self.two_level = 3 <= n <= RECURSION_THRESHOLD and strategy != "recursion"
        self.strategy = strategy

    def _ancilla(self, k: int) -> int | None:
        if self.two_level or k < 3:
            return None
        if self.strategy == "recursion" or (self.strategy == "auto" and k >= RECURSION_THRESHOLD):
            return self.lay.anc_mct_rec
        return None

    def _match_i(self, value: int, skip: Sequence[int], target: int) -> None:
        i = self.lay.i
        bits = [b for b in range(self.lay.n) if b not in skip]
        controls = [i[b] for b in bits]
        _match(self.circ, controls, [(value >> b) & 1 for b in bits], target,
               self._ancilla(len(controls)))

    def _and_low(self, g: int) -> None:
        lay = self.lay
        _match(self.circ, [lay.anc_mct_rec, lay.i[0]], [1, g & 1], lay.anc_i)

    def enter(self, g: int) -> None:
        if self.two_level:
            self._match_i(g, [0], self.lay.anc_mct_rec)
            self._and_low(g)
        else:
            self._match_i(g, [], self.lay.anc_i)

    def exit(self, g: int) -> None:
        if self.two_level:
            self._and_low(g)
            self._match_i(g, [0], self.lay.anc_mct_rec)
        else:
            self._match_i(g, [], self.lay.anc_i)

    def move(self, g: int, nxt: int) -> None:
        b = (g ^ nxt).bit_length() - 1
        lay, n = self.lay, self.lay.n
        if not self.two_level:
            self._match_i(g, [b], lay.anc_i)
            return
        if b == 0:
            self.circ.cx(lay.anc_mct_rec, lay.anc_i)
            return
        direct = _mcx_cost(n - 1) + _mcx_cost(n - 2)
        rebuild = 2 * _mcx_cost(2) + _mcx_cost(n - 2)
        if direct <= rebuild:
            self._match_i(g, [b], lay.anc_i)
            self._match_i(g, [0, b], lay.anc_mct_rec)
        else:
            self._and_low(g)
            self._match_i(g, [0, b], lay.anc_mct_rec)
            self._and_low(nxt)


def _traverse(circ: Circuit, layout: RegisterLayout, tree) -> None:
    """Move j from 0 to the leaf of ``tree`` on the anc_i = 1 branch."""
    anc_i, anc_j, j = layout.anc_i, layout.anc_j, list(layout.j)
    m = layout.h - 1
    for d in range(m):
        for p in range((1 << d) - 1, -1, -1):
            attr = tree.attr_index[(1 << d) - 1 + p]
            _match(circ, [anc_i, *j], [1, *_bits(p, m)], anc_j)
            delta = p ^ (p << 1)
            for b in range(m):
                if (delta >> b) & 1:
                    circ.cx(anc_j, j[b])
            # anc_j goes last: the cheap MCX lowering leaves a sign on patterns
            # with the last control set, and j[0] is 0 whenever anc_j is 1
            circ.mcx([anc_i, layout.x[attr], anc_j], j[0])
            _match(circ, [anc_i, *j[1:]], [1, *_bits(p, m - 1)], anc_j)


def synthesize_rf_predict(forest: ForestModel, x: Sequence[int],
                          strategy: str = "auto") -> SynthesizedPredictor:
    """Circuit A whose class-qubit marginal P(0) equals ``predict_proba(forest, x)``.

    ``strategy`` picks the MCX lowering at tree-selection sites: "auto"
    switches to the ancilla recursion from 8 controls on, "ucg" never does,
    "recursion" uses it for every site with 3 or more controls.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    x = tuple(int(b) for b in x)
    _check_input(x, forest.attr_count)
    layout = RegisterLayout.for_forest(forest)
    circ = Circuit(layout.width, layout=layout)
    circ.extend(prepare_x(layout, x))
    for q in layout.i:
        circ.h(q)

    selector = _TreeSelector(circ, layout, strategy)
    order = [gray(t) for t in range(forest.n_trees)]
    for step, t in enumerate(order):
        if step == 0:
            selector.enter(t)
        else:
            selector.move(order[step - 1], t)
        _traverse(circ, layout, forest.trees[t])
    selector.exit(order[-1])

    theta = leaf_angles(forest)
    angles = (2.0 * theta).reshape(-1)  # row-major: index = leaf + (tree << (h-1))
    circ.ucg_ry([*layout.j, *layout.i], layout.class_qubit, angles)
    return SynthesizedPredictor(circ, layout, forest, x, angles)


def synthesize_reflections(layout: RegisterLayout) -> tuple[Circuit, Circuit]:
    """(S0, S_chi): sign flips of the all-zero working state and of class = 0."""
    s0 = Circuit(layout.width, layout=layout)
    work = layout.working
    for q in work:
        s0.x(q)
    s0.mcz(work, ancilla=layout.anc_j if len(work) >= 3 else None)
    for q in work:
        s0.x(q)
    s_chi = Circuit(layout.width, layout=layout)
    c = layout.class_qubit
    s_chi.x(c).z(c).x(c)
    return s0, s_chi
