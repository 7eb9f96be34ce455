"""Random forest model: validation, JSON ingestion and the classical oracle.

Trees are balanced binary trees over a binary attribute vector. ``height``
counts node levels including the leaf level, so a tree of height ``h`` has
``2**(h-1) - 1`` internal nodes (level order, root first; children of node
``v`` are ``2v+1`` and ``2v+2``) and ``2**(h-1)`` leaves.  Every leaf stores
the probability of class 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ForestValidationError(ValueError):
    """Raised when a forest document violates the model invariants."""

    def __init__(self, message: str, path: str = "") -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class TreeModel:
    height: int
    attr_index: tuple[int, ...]
    leaf_prob: tuple[float, ...]

    @property
    def n_leaves(self) -> int:
        return 1 << (self.height - 1)

    @property
    def n_internal(self) -> int:
        return self.n_leaves - 1


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]
    attr_count: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n(self) -> int:
        """Number of qubits addressing the trees (log2 of the tree count)."""
        return self.n_trees.bit_length() - 1

    @property
    def height(self) -> int:
        return self.trees[0].height


def _check_tree(tree: TreeModel, attr_count: int, where: str) -> None:
    if not isinstance(tree.height, int) or tree.height < 2:
        raise ForestValidationError("height must be an integer >= 2", f"{where}.height")
    if len(tree.attr_index) != tree.n_internal:
        raise ForestValidationError(
            f"expected {tree.n_internal} attribute indexes for height {tree.height}, "
            f"got {len(tree.attr_index)}",
            f"{where}.attr_index",
        )
    if len(tree.leaf_prob) != tree.n_leaves:
        raise ForestValidationError(
            f"expected {tree.n_leaves} leaf probabilities for height {tree.height}, "
            f"got {len(tree.leaf_prob)}",
            f"{where}.leaf_prob",
        )
    for k, a in enumerate(tree.attr_index):
        if isinstance(a, bool) or not isinstance(a, int) or not 0 <= a < attr_count:
            raise ForestValidationError(
                f"attribute index {a!r} out of range [0, {attr_count})",
                f"{where}.attr_index[{k}]",
            )
    for k, p in enumerate(tree.leaf_prob):
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
            raise ForestValidationError(
                f"leaf probability {p!r} outside [0, 1]", f"{where}.leaf_prob[{k}]"
            )


def validate_forest(forest: ForestModel) -> ForestModel:
    if forest.attr_count < 1:
        raise ForestValidationError("attr_count must be >= 1", "attr_count")
    count = len(forest.trees)
    if count == 0 or count & (count - 1):
        raise ForestValidationError(
            f"tree count must be a power of two, got {count}", "trees"
        )
    h0 = forest.trees[0].height
    for t, tree in enumerate(forest.trees):
        _check_tree(tree, forest.attr_count, f"trees[{t}]")
        if tree.height != h0:
            raise ForestValidationError(
                f"all trees must share height {h0}, got {tree.height}",
                f"trees[{t}].height",
            )
    return forest


def make_forest(attr_count: int, trees: Sequence[dict | TreeModel]) -> ForestModel:
    built = []
    for tree in trees:
        if isinstance(tree, dict):
            tree = TreeModel(
                int(tree["height"]),
                tuple(tree["attr_index"]),
                tuple(float(p) for p in tree["leaf_prob"]),
            )
        built.append(tree)
    return validate_forest(ForestModel(tuple(built), attr_count))


def parse_forest(document: str) -> ForestModel:
    """Parse and validate a forest JSON document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ForestValidationError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ForestValidationError("top level must be an object")
    for key in ("attr_count", "trees"):
        if key not in data:
            raise ForestValidationError("missing field", key)
    attr_count = data["attr_count"]
    if isinstance(attr_count, bool) or not isinstance(attr_count, int):
        raise ForestValidationError("must be an integer", "attr_count")
    if not isinstance(data["trees"], list):
        raise ForestValidationError("must be a list", "trees")
    trees = []
    for t, raw in enumerate(data["trees"]):
        where = f"trees[{t}]"
        if not isinstance(raw, dict):
            raise ForestValidationError("must be an object", where)
        for key in ("height", "attr_index", "leaf_prob"):
            if key not in raw:
                raise ForestValidationError("missing field", f"{where}.{key}")
        if not isinstance(raw["attr_index"], list) or not isinstance(raw["leaf_prob"], list):
            raise ForestValidationError("attr_index and leaf_prob must be lists", where)
        height = raw["height"]
        if isinstance(height, bool) or not isinstance(height, int):
            raise ForestValidationError("must be an integer", f"{where}.height")
        trees.append(TreeModel(height, tuple(raw["attr_index"]), tuple(raw["leaf_prob"])))
    forest = validate_forest(ForestModel(tuple(trees), attr_count))
    # normalise probabilities to float only after validation so ints like 1 are accepted
    return ForestModel(
        tuple(TreeModel(t.height, t.attr_index, tuple(float(p) for p in t.leaf_prob))
              for t in forest.trees),
        forest.attr_count,
    )


def load_forest(path) -> ForestModel:
    with open(path, encoding="utf-8") as fh:
        return parse_forest(fh.read())


def forest_to_dict(forest: ForestModel) -> dict:
    return {
        "attr_count": forest.attr_count,
        "trees": [
            {"height": t.height, "attr_index": list(t.attr_index), "leaf_prob": list(t.leaf_prob)}
            for t in forest.trees
        ],
    }


def serialize_forest(forest: ForestModel) -> str:
    return json.dumps(forest_to_dict(forest))


def parse_bitstring(text: str, length: int | None = None) -> tuple[int, ...]:
    """``"101"`` -> ``(1, 0, 1)``; the leftmost character is attribute 0."""
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"input must be a non-empty string of 0/1, got {text!r}")
    if length is not None and len(text) != length:
        raise ValueError(f"input has {len(text)} bits, forest expects {length}")
    return tuple(int(c) for c in text)


def _check_input(x: Sequence[int], attr_count: int) -> None:
    if len(x) != attr_count:
        raise ValueError(f"input has {len(x)} bits, expected {attr_count}")
    if any(b not in (0, 1) for b in x):
        raise ValueError("input bits must be 0 or 1")


def tree_predict_classical(tree: TreeModel, x: Sequence[int]) -> int:
    """Leaf reached from the root; bit ``x[a]`` of each visited node picks left (0) or right (1).

    The returned index has the visited attribute values as its bits, most
    significant first.
    """
    node, leaf = 0, 0
    for _ in range(tree.height - 1):
        bit = x[tree.attr_index[node]]
        leaf = (leaf << 1) | bit
        node = 2 * node + 1 + bit
    return leaf


def predict_proba(forest: ForestModel, x: Sequence[int]) -> float:
    """Mean class-0 probability over all trees."""
    _check_input(x, forest.attr_count)
    total = math.fsum(t.leaf_prob[tree_predict_classical(t, x)] for t in forest.trees)
    return total / forest.n_trees


def leaf_angles(forest: ForestModel) -> np.ndarray:
    """Array ``[tree, leaf]`` of ``arccos(sqrt(p))``, each in ``[0, pi/2]``."""
    probs = np.array([t.leaf_prob for t in forest.trees], dtype=float)
    return np.arccos(np.sqrt(np.clip(probs, 0.0, 1.0)))


def constant_forest(p: float, n: int = 0, height: int = 2, attr_count: int = 1) -> ForestModel:
    """Forest whose every leaf has class-0 probability ``p``."""
    trees = [
        TreeModel(height, tuple(k % attr_count for k in range((1 << (height - 1)) - 1)),
                  (float(p),) * (1 << (height - 1)))
        for _ in range(1 << n)
    ]
    return validate_forest(ForestModel(tuple(trees), attr_count))


def random_forest(rng: np.random.Generator, n: int, height: int, attr_count: int) -> ForestModel:
    trees = []
    for _ in range(1 << n):
        attrs = tuple(int(a) for a in rng.integers(0, attr_count, (1 << (height - 1)) - 1))
        probs = tuple(float(p) for p in rng.random(1 << (height - 1)))
        trees.append(TreeModel(height, attrs, probs))
    return validate_forest(ForestModel(tuple(trees), attr_count))
