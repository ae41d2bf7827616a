"""Cascading decision trees.

Training grows a depth-bounded tree, appends it, and removes from the
training set the Positive samples that land in a positive leaf (a leaf whose
Positive fraction is at least ``theta``). This repeats until a tree has no
positive leaf. Prediction walks the subtrees in order and stops at the first
one that routes the sample into a positive leaf; that subtree's decision path
is the explanation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dataset import Dataset, Label
from .errors import ConfigError, DomainError, MissingValueError
from .tree import Condition, Leaf, Tree, grow_tree, predict

DEFAULT_THETA = 0.8
DEFAULT_SUBTREE_DEPTH = 3


class Termination(str, enum.Enum):
    NO_POSITIVE_LEAF = "no_positive_leaf"
    # safeguards
    NO_PROGRESS = "no_progress"
    NO_POSITIVES_LEFT = "no_positives_left"
    ITERATION_CAP = "iteration_cap"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class IterationRecord:
    """Bookkeeping for one training round."""

    train_size: int
    positives: int
    negatives: int
    removed: int


@dataclass(frozen=True, eq=False)
class CascadeModel:
    subtrees: tuple[Tree, ...]
    theta: float
    subtree_max_depth: int
    feature_names: tuple[str, ...]
    criterion: str = "gini"
    min_samples_leaf: int = 1
    termination: Termination = Termination.NO_POSITIVE_LEAF
    history: tuple[IterationRecord, ...] = ()
    boolean_features: Optional[tuple[bool, ...]] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.subtrees:
            raise DomainError("a cascade needs at least one subtree")
        object.__setattr__(self, "subtrees", tuple(self.subtrees))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def truncated(self, count: int) -> "CascadeModel":
        """The model made of the first ``count`` subtrees."""
        return CascadeModel(
            self.subtrees[:count], self.theta, self.subtree_max_depth, self.feature_names,
            self.criterion, self.min_samples_leaf, self.termination, self.history[:count],
            self.boolean_features, dict(self.metadata),
        )

    def fire(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised cascade prediction.

        Returns the index of the subtree that fired for each row (-1 when none
        did) and the explanation depth (0 for rows that did not fire).
        """
        X = np.asarray(X, dtype=np.float64)
        fired = np.full(X.shape[0], -1, dtype=np.intp)
        depth = np.zeros(X.shape[0], dtype=np.intp)
        pending = np.arange(X.shape[0])
        for i, tree in enumerate(self.subtrees):
            if pending.size == 0:
                break
            ids = tree.leaf_ids(X[pending])
            hit = positive_leaf_mask(tree, self.theta)[ids]
            rows = pending[hit]
            fired[rows] = i
            depth[rows] = np.asarray(tree.leaf_depths(), dtype=np.intp)[ids[hit]]
            pending = pending[~hit]
        return fired, depth

    def classify(self, X) -> np.ndarray:
        return self.fire(X)[0] >= 0

    def predict(self, sample) -> "CascadePrediction":
        return predict_cascade(self, sample)


@dataclass(frozen=True)
class CascadePrediction:
    label: Label
    fired_subtree: Optional[int] = None
    path: Optional[tuple[Condition, ...]] = None

    @property
    def depth(self) -> Optional[int]:
        return None if self.path is None else len(self.path)


NEGATIVE = CascadePrediction(Label.NEGATIVE)
UNKNOWN = CascadePrediction(Label.UNKNOWN)


def mixed(leaf: Leaf) -> float:
    """Fraction of the leaf's training samples that are Positive."""
    if leaf.total == 0:
        raise DomainError("mixed value of an empty leaf is undefined")
    return leaf.positive_count / leaf.total


def is_positive_leaf(leaf: Leaf, theta: float) -> bool:
    return mixed(leaf) >= theta


def positive_leaf_mask(tree: Tree, theta: float) -> np.ndarray:
    return np.array([is_positive_leaf(l, theta) for l in tree.leaves()], dtype=bool)


def _true_positive_mask(tree: Tree, data: Dataset, theta: float) -> np.ndarray:
    return positive_leaf_mask(tree, theta)[tree.leaf_ids(data.X)] & data.y


def remove_true_positives(tree: Tree, trainset: Dataset, theta: float) -> Optional[Dataset]:
    """Drop the Positive samples that ``tree`` routes to a positive leaf.

    Negative samples are always kept. Returns None if nothing is left.
    """
    keep = np.flatnonzero(~_true_positive_mask(tree, trainset, theta))
    if keep.size == 0:
        return None
    if keep.size == trainset.n_samples:
        return trainset
    return trainset.subset(keep)


def _check_theta(theta: float) -> None:
    if not 0.0 < theta <= 1.0:
        raise ConfigError(f"theta must lie in (0, 1], got {theta}")


def fit_cascade(
    trainset: Dataset,
    theta: float = DEFAULT_THETA,
    subtree_max_depth: int = DEFAULT_SUBTREE_DEPTH,
    criterion: str = "gini",
    min_samples_leaf: int = 1,
    max_iterations: Optional[int] = None,
    on_iteration: Optional[Callable[[int, Dataset, Tree], None]] = None,
) -> CascadeModel:
    """Train a cascade.

    ``on_iteration(i, trainset_i, tree_i)`` is called after each subtree is
    grown, with the training set that subtree saw. ``max_iterations`` caps the
    number of subtrees and defaults to ``n + 1``.
    """
    _check_theta(theta)
    if subtree_max_depth < 1:
        raise ConfigError(f"subtree_max_depth must be positive, got {subtree_max_depth}")
    if trainset.n_samples == 0:
        raise DomainError("cannot train on an empty training set")
    cap = trainset.n_samples + 1 if max_iterations is None else max_iterations

    subtrees: list[Tree] = []
    history: list[IterationRecord] = []
    current = trainset
    while True:
        if len(subtrees) >= cap:
            reason = Termination.ITERATION_CAP
            break
        tree = grow_tree(current, subtree_max_depth, criterion, min_samples_leaf)
        subtrees.append(tree)
        if on_iteration is not None:
            on_iteration(len(subtrees) - 1, current, tree)
        if not positive_leaf_mask(tree, theta).any():
            history.append(IterationRecord(current.n_samples, current.positive_count,
                                           current.negative_count, 0))
            reason = Termination.NO_POSITIVE_LEAF
            break
        remaining = remove_true_positives(tree, current, theta)
        left = 0 if remaining is None else remaining.n_samples
        history.append(IterationRecord(current.n_samples, current.positive_count,
                                       current.negative_count, current.n_samples - left))
        if left == current.n_samples:
            reason = Termination.NO_PROGRESS
            break
        if remaining is None or remaining.positive_count == 0:
            reason = Termination.NO_POSITIVES_LEFT
            break
        current = remaining

    return CascadeModel(
        tuple(subtrees), theta, subtree_max_depth, trainset.feature_names, criterion,
        min_samples_leaf, reason, tuple(history), trainset.boolean_columns(),
    )


def predict_cascade(model: CascadeModel, sample) -> CascadePrediction:
    for i, tree in enumerate(model.subtrees):
        leaf, path = predict(tree, sample)
        if is_positive_leaf(leaf, model.theta):
            return CascadePrediction(Label.POSITIVE, i, tuple(path))
    return NEGATIVE


def predict_cascade_tolerant(model: CascadeModel, sample) -> CascadePrediction:
    """Like ``predict_cascade`` but skips any subtree that needs a missing value.

    Returns ``UNKNOWN`` when no subtree fired and at least one was skipped.
    """
    skipped = False
    for i, tree in enumerate(model.subtrees):
        try:
            leaf, path = predict(tree, sample)
        except MissingValueError:
            skipped = True
            continue
        if is_positive_leaf(leaf, model.theta):
            return CascadePrediction(Label.POSITIVE, i, tuple(path))
    return UNKNOWN if skipped else NEGATIVE
