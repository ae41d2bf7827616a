"""Confusion matrices, k-fold evaluation and classic-vs-cascade comparison reports.

Aggregate precision/recall/F1 are computed from confusion counts pooled over
folds. Per-fold metrics and the per-fold mean of each count are reported
alongside. Metrics whose denominator is zero are undefined (None, shown as
``n/a``), never 0.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .cascade import DEFAULT_SUBTREE_DEPTH, DEFAULT_THETA, fit_cascade
from .dataset import Dataset, FoldSplit, Label, make_folds, split_by_fold
from .errors import ConfigError, DomainError
from .tree import grow_tree

CLASSIC = "classic"
CLASSIC_BOUNDED = "classic_depth_bounded"
CASCADE = "cascade"
MODEL_KINDS = (CLASSIC, CLASSIC_BOUNDED, CASCADE)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


def _is_positive(v) -> bool:
    if isinstance(v, Label):
        return v is Label.POSITIVE
    if isinstance(v, str):
        return v == Label.POSITIVE.value
    return bool(v)


def confusion(predictions: Sequence, truths: Sequence) -> ConfusionMatrix:
    if len(predictions) != len(truths):
        raise DomainError(f"{len(predictions)} predictions for {len(truths)} truths")
    p = np.array([_is_positive(v) for v in predictions], dtype=bool)
    t = np.array([_is_positive(v) for v in truths], dtype=bool)
    return ConfusionMatrix(
        int((p & t).sum()), int((~p & ~t).sum()), int((p & ~t).sum()), int((~p & t).sum())
    )


def _ratio(num, den) -> Optional[float]:
    return num / den if den else None


def derived_metrics(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise DomainError("metrics of an empty confusion matrix are undefined")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics((cm.tp + cm.tn) / cm.total, precision, recall, f1)


@dataclass(frozen=True)
class ModelConfig:
    kind: str = CASCADE
    theta: float = DEFAULT_THETA
    max_depth: Optional[int] = DEFAULT_SUBTREE_DEPTH
    criterion: str = "gini"
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.kind == CLASSIC:
            object.__setattr__(self, "max_depth", None)
        elif self.max_depth is None:
            raise ConfigError(f"{self.kind} needs a max_depth")

    @classmethod
    def classic(cls, criterion="gini", min_samples_leaf=1):
        return cls(CLASSIC, criterion=criterion, min_samples_leaf=min_samples_leaf)

    @classmethod
    def classic_bounded(cls, max_depth=DEFAULT_SUBTREE_DEPTH, criterion="gini", min_samples_leaf=1):
        return cls(CLASSIC_BOUNDED, max_depth=max_depth, criterion=criterion, min_samples_leaf=min_samples_leaf)

    @classmethod
    def cascade(cls, theta=DEFAULT_THETA, max_depth=DEFAULT_SUBTREE_DEPTH, criterion="gini", min_samples_leaf=1):
        return cls(CASCADE, theta, max_depth, criterion, min_samples_leaf)

    def label(self) -> str:
        if self.kind == CLASSIC:
            return "classic"
        if self.kind == CLASSIC_BOUNDED:
            return f"classic (max_depth={self.max_depth})"
        return f"cascade (theta={self.theta:g}, depth={self.max_depth})"


@dataclass(frozen=True)
class FoldResult:
    fold: int
    confusion: ConfusionMatrix
    metrics: Metrics
    depth_sum: int
    explained: int
    train_seconds: float
    n_trees: int

    @property
    def mean_depth(self) -> Optional[float]:
        return self.depth_sum / self.explained if self.explained else None


@dataclass(frozen=True)
class EvalReport:
    dataset_name: str
    dataset_fingerprint: str
    config: ModelConfig
    fold_count: int
    seed: int
    folds_fingerprint: str
    folds: tuple[FoldResult, ...]

    @property
    def model_kind(self) -> str:
        return self.config.kind

    @property
    def confusion(self) -> ConfusionMatrix:
        total = ConfusionMatrix()
        for f in self.folds:
            total = total + f.confusion
        return total

    @property
    def metrics(self) -> Metrics:
        return derived_metrics(self.confusion)

    @property
    def fold_mean_metrics(self) -> Metrics:
        def mean(attr):
            vals = [getattr(f.metrics, attr) for f in self.folds if getattr(f.metrics, attr) is not None]
            return sum(vals) / len(vals) if vals else None

        return Metrics(mean("accuracy"), mean("precision"), mean("recall"), mean("f1"))

    @property
    def mean_counts(self) -> dict:
        cm = self.confusion
        k = len(self.folds)
        return {"tp": cm.tp / k, "tn": cm.tn / k, "fp": cm.fp / k, "fn": cm.fn / k}

    @property
    def explained(self) -> int:
        return sum(f.explained for f in self.folds)

    @property
    def mean_explanation_depth(self) -> Optional[float]:
        n = self.explained
        return sum(f.depth_sum for f in self.folds) / n if n else None

    @property
    def runtime_seconds(self) -> float:
        return sum(f.train_seconds for f in self.folds)


def _evaluate_fold(train: Dataset, test: Dataset, config: ModelConfig):
    start = time.perf_counter()
    if config.kind == CASCADE:
        model = fit_cascade(train, config.theta, config.max_depth, config.criterion, config.min_samples_leaf)
        elapsed = time.perf_counter() - start
        fired, depth = model.fire(test.X)
        predicted = fired >= 0
        n_trees = len(model.subtrees)
    else:
        tree = grow_tree(train, config.max_depth, config.criterion, config.min_samples_leaf)
        elapsed = time.perf_counter() - start
        ids = tree.leaf_ids(test.X)
        predicted = tree.classify(test.X)
        depth = np.asarray(tree.leaf_depths())[ids]
        n_trees = 1
    cm = confusion(predicted, test.y)
    return cm, int(depth[predicted].sum()), int(predicted.sum()), elapsed, n_trees


def cross_validate(
    dataset: Dataset,
    fold_count: int = 5,
    seed: int = 0,
    config: ModelConfig = ModelConfig(),
    folds: Optional[FoldSplit] = None,
    dataset_name: str = "dataset",
) -> EvalReport:
    if folds is None:
        folds = make_folds(dataset, fold_count, seed)
    elif folds.fold_count != fold_count or folds.seed != seed:
        raise ConfigError("fold split does not match fold_count/seed")
    results = []
    for i in range(folds.fold_count):
        train, test = split_by_fold(dataset, folds, i)
        cm, depth_sum, explained, elapsed, n_trees = _evaluate_fold(train, test, config)
        results.append(FoldResult(i, cm, derived_metrics(cm), depth_sum, explained, elapsed, n_trees))
    return EvalReport(
        dataset_name, dataset.fingerprint(), config, folds.fold_count, folds.seed,
        folds.fingerprint(), tuple(results),
    )


def improvement(classic_depth: Optional[float], cascade_depth: Optional[float]) -> Optional[float]:
    """Relative shortening of the explanation, ``(classic - cascade) / classic``."""
    if classic_depth is None or cascade_depth is None or classic_depth == 0:
        return None
    return (classic_depth - cascade_depth) / classic_depth


def _fmt_pct(v: Optional[float]) -> str:
    return "n/a" if v is None else f"{100 * v:.2f}%"


def _fmt(v: Optional[float], spec=".3f") -> str:
    return "n/a" if v is None else format(v, spec)


@dataclass
class Comparison:
    reports: list[EvalReport]
    improvements: dict = field(default_factory=dict)  # classic kind -> fraction or None

    def records(self, include_timing: bool = True) -> list[dict]:
        out = []
        for r in self.reports:
            base = {
                "dataset": r.dataset_name,
                "model_kind": r.model_kind,
                "model": r.config.label(),
                "seed": r.seed,
                "fold_count": r.fold_count,
            }
            for f in r.folds:
                rec = {"record": "fold", **base, "fold": f.fold, **asdict(f.confusion), **asdict(f.metrics),
                       "explained_positives": f.explained, "mean_explanation_depth": f.mean_depth,
                       "n_trees": f.n_trees}
                if include_timing:
                    rec["train_seconds"] = f.train_seconds
                out.append(rec)
            rec = {"record": "aggregate", **base, **asdict(r.confusion), **asdict(r.metrics),
                   **{f"mean_{k}": v for k, v in r.mean_counts.items()},
                   **{f"fold_mean_{k}": v for k, v in asdict(r.fold_mean_metrics).items()},
                   "explained_positives": r.explained, "mean_explanation_depth": r.mean_explanation_depth}
            if include_timing:
                rec["runtime_seconds"] = r.runtime_seconds
            out.append(rec)
        for kind, value in self.improvements.items():
            out.append({"record": "improvement", "dataset": self.reports[0].dataset_name,
                        "baseline": kind, "improvement": value})
        return out

    def to_json_lines(self, include_timing: bool = True) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records(include_timing))

    def to_text(self, include_timing: bool = True) -> str:
        header = ["model", "depth", "accuracy", "TP", "TN", "FP", "FN", "precision", "recall", "F1"]
        if include_timing:
            header.insert(3, "runtime(s)")
        rows = []
        for r in self.reports:
            m, c = r.metrics, r.mean_counts
            row = [r.config.label(), _fmt(r.mean_explanation_depth), _fmt_pct(m.accuracy),
                   f"{c['tp']:.1f}", f"{c['tn']:.1f}", f"{c['fp']:.1f}", f"{c['fn']:.1f}",
                   _fmt_pct(m.precision), _fmt_pct(m.recall), _fmt_pct(m.f1)]
            if include_timing:
                row.insert(3, f"{r.runtime_seconds:.3f}")
            rows.append(row)
        widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
        first = self.reports[0]
        lines = [f"dataset: {first.dataset_name}  folds: {first.fold_count}  seed: {first.seed}",
                 "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in rows]
        for kind, value in self.improvements.items():
            lines.append(f"explanation depth improvement vs {kind}: {_fmt_pct(value)}")
        return "\n".join(lines) + "\n"


def compare_report(reports: Sequence[EvalReport]) -> Comparison:
    reports = list(reports)
    cascades = [r for r in reports if r.model_kind == CASCADE]
    classics = [r for r in reports if r.model_kind != CASCADE]
    if not cascades or not classics:
        raise ConfigError("comparison needs at least one classic and one cascade report")
    ref = reports[0]
    for r in reports[1:]:
        if r.dataset_fingerprint != ref.dataset_fingerprint:
            raise ConfigError("reports were built from different datasets")
        if r.folds_fingerprint != ref.folds_fingerprint:
            raise ConfigError("reports were built from different fold assignments")
    cascade = cascades[0]
    imps = {}
    for r in classics:
        key = r.config.label()
        imps[key] = improvement(r.mean_explanation_depth, cascade.mean_explanation_depth)
    return Comparison(reports, imps)


@dataclass(frozen=True)
class PooledSummary:
    """Counts and depths pooled over several reports (e.g. repeated seeds)."""

    confusion: ConfusionMatrix
    depth_sum: int
    explained: int
    runtime_seconds: float

    @property
    def metrics(self) -> Metrics:
        return derived_metrics(self.confusion)

    @property
    def mean_explanation_depth(self) -> Optional[float]:
        return self.depth_sum / self.explained if self.explained else None


def pool(reports: Iterable[EvalReport]) -> PooledSummary:
    cm = ConfusionMatrix()
    depth_sum = explained = 0
    runtime = 0.0
    for r in reports:
        cm = cm + r.confusion
        depth_sum += sum(f.depth_sum for f in r.folds)
        explained += r.explained
        runtime += r.runtime_seconds
    return PooledSummary(cm, depth_sum, explained, runtime)
