"""Explanation masks, exhaustive validity checking, and depth statistics.

A mask marks the features an explanation fixes. It is valid for an input
``x`` when every way of changing the unmarked features leaves the model's
classification of ``x`` unchanged. Checking enumerates all
``2 ** (k - |mask|)`` perturbations, so it is restricted to Boolean features
and a capped ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .cascade import CascadeModel, CascadePrediction
from .dataset import Label
from .errors import DomainError, ResourceError
from .tree import GT, LE, Condition, Tree

DEFAULT_CAP = 20
_CHUNK = 1 << 15


@dataclass(frozen=True)
class ExplanationMask:
    mask: tuple[bool, ...]

    @property
    def size(self) -> int:
        return sum(self.mask)

    @property
    def k(self) -> int:
        return len(self.mask)

    def as_array(self) -> np.ndarray:
        return np.array(self.mask, dtype=bool)

    @classmethod
    def full(cls, k: int) -> "ExplanationMask":
        return cls((True,) * k)

    def __str__(self):
        return "[" + ",".join("1" if m else "0" for m in self.mask) + "]"


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    counterexample: Optional[tuple[float, ...]]
    checked_count: int


def mask_from_path(path: Iterable[Condition], k: int) -> ExplanationMask:
    mask = [False] * k
    for cond in path:
        if not 0 <= cond.feature < k:
            raise DomainError(f"condition on feature {cond.feature} outside [0, {k})")
        mask[cond.feature] = True
    return ExplanationMask(tuple(mask))


def classifier_of(model) -> Callable[[np.ndarray], np.ndarray]:
    """Batch classification function (rows -> Positive flags) for a tree or cascade."""
    if isinstance(model, (Tree, CascadeModel)):
        return model.classify
    raise TypeError(f"no classifier for {type(model).__name__}")


def is_valid(classify, mask: ExplanationMask, x, cap: int = DEFAULT_CAP) -> ValidityReport:
    """Exhaustively check that ``mask`` is a valid explanation of ``classify(x)``.

    ``classify`` takes an ``(m, k)`` array and returns ``m`` labels. Free
    features are enumerated as a binary counter with the lowest free feature
    index as the most significant bit, and the first perturbation that changes
    the label is reported.
    """
    x = np.asarray(x, dtype=np.float64)
    k = x.shape[0]
    if mask.k != k:
        raise DomainError(f"mask covers {mask.k} features, sample has {k}")
    if k > cap:
        raise ResourceError(
            f"{k} features exceeds the enumeration cap of {cap}; raise the cap or reduce the feature count"
        )
    if not np.isin(x, (0.0, 1.0)).all():
        raise DomainError("validity checking needs a Boolean sample (values 0/1)")

    free = np.flatnonzero(~mask.as_array())
    m = free.size
    reference = np.asarray(classify(x[None, :]))[0]
    total = 1 << m
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        Z = np.repeat(x[None, :], codes.size, axis=0)
        if m:
            Z[:, free] = (codes[:, None] >> shifts) & 1
        labels = np.asarray(classify(Z))
        bad = np.flatnonzero(labels != reference)
        if bad.size:
            i = int(bad[0])
            return ValidityReport(False, tuple(float(v) for v in Z[i]), start + i + 1)
    return ValidityReport(True, None, total)


@dataclass(frozen=True)
class DepthStats:
    mean: Optional[float]
    count: int

    @property
    def defined(self) -> bool:
        return self.count > 0


def depth_stats(predictions: Iterable) -> DepthStats:
    """Mean explanation length over Positive predictions.

    Items may be ``CascadePrediction`` objects (only Positive ones count),
    paths (sequences of conditions, already known to be Positive), plain
    integer depths, or None for a negative prediction.
    """
    total = 0
    count = 0
    for item in predictions:
        if item is None:
            continue
        if isinstance(item, CascadePrediction):
            if item.label is not Label.POSITIVE:
                continue
            d = len(item.path)
        elif isinstance(item, (int, np.integer)):
            d = int(item)
        else:
            d = len(item)
        total += d
        count += 1
    return DepthStats(total / count if count else None, count)


def render_condition(cond: Condition, feature_names: Sequence[str], boolean: bool = False) -> str:
    name = feature_names[cond.feature]
    if boolean and 0.0 < cond.threshold < 1.0:
        return f"{name} = {'T' if cond.op == GT else 'F'}"
    op = "≤" if cond.op == LE else ">"
    return f"{name} {op} {cond.threshold:.6g}"


def render_path(path: Iterable[Condition], feature_names: Sequence[str], boolean_features=None) -> str:
    parts = []
    for cond in path:
        boolean = bool(boolean_features[cond.feature]) if boolean_features is not None else False
        parts.append(render_condition(cond, feature_names, boolean))
    return " AND ".join(parts)
