"""Greedy CART induction on numeric features.

Candidate thresholds are midpoints between consecutive distinct values of a
feature. A split must decrease weighted impurity by more than ``EPS``; among
splits whose decrease is within ``EPS`` of the best one, the lowest feature
index wins, then the lowest threshold. Samples with ``value <= threshold``
go left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Union

import numpy as np

from .dataset import Dataset, Label
from .errors import DataError, DomainError, MissingValueError

CRITERIA = ("gini", "entropy")

# decreases closer than this are treated as ties
EPS = 1e-12

LE = "<="
GT = ">"


@dataclass(frozen=True)
class Condition:
    feature: int
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in (LE, GT):
            raise ValueError(f"unknown operator {self.op!r}")

    def holds(self, value: float) -> bool:
        return value <= self.threshold if self.op == LE else value > self.threshold


@dataclass(frozen=True)
class Leaf:
    positive_count: int
    negative_count: int

    @property
    def total(self) -> int:
        return self.positive_count + self.negative_count


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class SplitChoice:
    condition: Condition
    impurity_decrease: float


def impurity(positive_count: int, negative_count: int, criterion: str = "gini") -> float:
    if positive_count < 0 or negative_count < 0:
        raise DomainError("class counts must be nonnegative")
    total = positive_count + negative_count
    if total == 0:
        raise DomainError("impurity of an empty node is undefined")
    p = positive_count / total
    q = negative_count / total
    if criterion == "gini":
        return 1.0 - p * p - q * q
    if criterion == "entropy":
        return -sum(f * math.log2(f) for f in (p, q) if f > 0)
    raise DomainError(f"unknown criterion {criterion!r}")


def _impurity_array(pos: np.ndarray, total: np.ndarray, criterion: str) -> np.ndarray:
    p = pos / total
    q = 1.0 - p
    if criterion == "gini":
        return 1.0 - p * p - q * q
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


def _best_split_arrays(X, y, criterion="gini", min_samples_leaf=1) -> Optional[SplitChoice]:
    n, k = X.shape
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == n or n < 2 * min_samples_leaf:
        return None
    parent = impurity(n_pos, n - n_pos, criterion)

    best: Optional[tuple[float, int, float]] = None
    per_feature = []
    for j in range(k):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        cum_pos = np.cumsum(y[order])
        # boundary after position i separates xs[:i+1] from xs[i+1:]
        cut = np.flatnonzero(xs[:-1] < xs[1:])
        if cut.size == 0:
            continue
        n_left = cut + 1
        n_right = n - n_left
        ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        cut, n_left, n_right = cut[ok], n_left[ok], n_right[ok]
        if cut.size == 0:
            continue
        pos_left = cum_pos[cut]
        pos_right = n_pos - pos_left
        weighted = (
            n_left * _impurity_array(pos_left, n_left, criterion)
            + n_right * _impurity_array(pos_right, n_right, criterion)
        ) / n
        decrease = parent - weighted
        i = int(np.argmax(decrease))
        per_feature.append((j, xs, cut, decrease))
        if best is None or decrease[i] > best[0]:
            best = (float(decrease[i]), j, i)

    if best is None or best[0] <= EPS:
        return None
    top = best[0]
    for j, xs, cut, decrease in per_feature:
        hits = np.flatnonzero(decrease >= top - EPS)
        if hits.size:
            i = int(hits[0])
            lo, hi = xs[cut[i]], xs[cut[i] + 1]
            threshold = (lo + hi) / 2.0
            if threshold >= hi:  # adjacent floats: the midpoint rounds up to hi
                threshold = lo
            return SplitChoice(Condition(j, LE, float(threshold)), float(decrease[i]))
    raise AssertionError("unreachable: best decrease has no matching candidate")


def best_split(data: Dataset, criterion: str = "gini", min_samples_leaf: int = 1) -> Optional[SplitChoice]:
    """Best single threshold split of ``data``, or None if nothing improves impurity.

    The returned condition always has the ``<=`` orientation (the left branch).
    """
    if criterion not in CRITERIA:
        raise DomainError(f"unknown criterion {criterion!r}")
    if data.has_missing:
        raise DataError("cannot search splits over missing values")
    return _best_split_arrays(data.X, data.y, criterion, min_samples_leaf)


def grow_tree(
    trainset: Dataset,
    max_depth: Optional[int] = None,
    criterion: str = "gini",
    min_samples_leaf: int = 1,
) -> "Tree":
    if trainset.n_samples == 0:
        raise DomainError("cannot grow a tree on an empty training set")
    if criterion not in CRITERIA:
        raise DomainError(f"unknown criterion {criterion!r}")
    if max_depth is not None and max_depth < 1:
        raise DomainError(f"max_depth must be positive, got {max_depth}")
    if min_samples_leaf < 1:
        raise DomainError(f"min_samples_leaf must be positive, got {min_samples_leaf}")
    if trainset.has_missing:
        raise DataError("training data contains missing values")

    X, y = trainset.X, trainset.y

    def grow(idx: np.ndarray, depth: int) -> Node:
        pos = int(y[idx].sum())
        leaf = Leaf(pos, idx.size - pos)
        if max_depth is not None and depth >= max_depth:
            return leaf
        choice = _best_split_arrays(X[idx], y[idx], criterion, min_samples_leaf)
        if choice is None:
            return leaf
        f, t = choice.condition.feature, choice.condition.threshold
        go_left = X[idx, f] <= t
        return Split(f, t, grow(idx[go_left], depth + 1), grow(idx[~go_left], depth + 1))

    root = grow(np.arange(trainset.n_samples), 0)
    return Tree(root, max_depth, criterion, trainset.n_features)


@dataclass(frozen=True)
class _Flat:
    feature: np.ndarray  # -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_index: np.ndarray  # -1 at internal nodes


@dataclass(frozen=True, eq=False)
class Tree:
    root: Node
    max_depth: Optional[int]
    criterion: str
    n_features: int

    def leaves(self) -> list[Leaf]:
        """Leaves in depth-first, left-to-right order; indices match ``leaf_ids``."""
        return [n for n in self._preorder() if isinstance(n, Leaf)]

    def _preorder(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, Split):
                stack.append(node.right)
                stack.append(node.left)

    def depth(self) -> int:
        def d(node):
            return 0 if isinstance(node, Leaf) else 1 + max(d(node.left), d(node.right))

        return d(self.root)

    def leaf_depths(self) -> list[int]:
        """Root-to-leaf path length of each leaf, in ``leaves()`` order."""
        out = []
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            if isinstance(node, Leaf):
                out.append(d)
            else:
                stack.append((node.right, d + 1))
                stack.append((node.left, d + 1))
        return out

    def node_count(self) -> int:
        return sum(1 for _ in self._preorder())

    @cached_property
    def _flat(self) -> _Flat:
        nodes = list(self._preorder())
        pos = {id(n): i for i, n in enumerate(nodes)}
        m = len(nodes)
        feature = np.full(m, -1, dtype=np.intp)
        threshold = np.zeros(m)
        left = np.full(m, -1, dtype=np.intp)
        right = np.full(m, -1, dtype=np.intp)
        leaf_index = np.full(m, -1, dtype=np.intp)
        n_leaves = 0
        for i, node in enumerate(nodes):
            if isinstance(node, Leaf):
                leaf_index[i] = n_leaves
                n_leaves += 1
            else:
                feature[i] = node.feature
                threshold[i] = node.threshold
                left[i] = pos[id(node.left)]
                right[i] = pos[id(node.right)]
        return _Flat(feature, threshold, left, right, leaf_index)

    def leaf_ids(self, X) -> np.ndarray:
        """Index into ``leaves()`` reached by every row of ``X``.

        Raises ``MissingValueError`` if any row needs a missing value.
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(f"expected rows of {self.n_features} features, got shape {X.shape}")
        flat = self._flat
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = np.flatnonzero(flat.feature[node] >= 0)
        while active.size:
            cur = node[active]
            f = flat.feature[cur]
            v = X[active, f]
            nan = np.isnan(v)
            if nan.any():
                raise MissingValueError(int(f[np.argmax(nan)]))
            node[active] = np.where(v <= flat.threshold[cur], flat.left[cur], flat.right[cur])
            active = active[flat.feature[node[active]] >= 0]
        return flat.leaf_index[node]

    def predict(self, sample) -> tuple[Leaf, list[Condition]]:
        return predict(self, sample)

    def classify(self, X) -> np.ndarray:
        """Majority-rule labels for every row (True = Positive)."""
        majority = np.array([majority_label(l) is Label.POSITIVE for l in self.leaves()])
        return majority[self.leaf_ids(X)]


def predict(tree: Tree, sample) -> tuple[Leaf, list[Condition]]:
    """Route ``sample`` to its leaf, returning the leaf and the conditions satisfied on the way."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.shape != (tree.n_features,):
        raise DataError(f"expected {tree.n_features} feature values, got {sample.shape[0] if sample.ndim else 1}")
    path = []
    node = tree.root
    while isinstance(node, Split):
        v = sample[node.feature]
        if math.isnan(v):
            raise MissingValueError(node.feature)
        if v <= node.threshold:
            path.append(Condition(node.feature, LE, node.threshold))
            node = node.left
        else:
            path.append(Condition(node.feature, GT, node.threshold))
            node = node.right
    return node, path


def majority_label(leaf: Leaf) -> Label:
    # ties go to Negative
    return Label.POSITIVE if leaf.positive_count > leaf.negative_count else Label.NEGATIVE
