"""Cascading decision trees: short, verifiable explanations for positive classifications."""

from .cascade import (
    CascadeModel,
    CascadePrediction,
    Termination,
    fit_cascade,
    is_positive_leaf,
    mixed,
    predict_cascade,
    predict_cascade_tolerant,
    remove_true_positives,
)
from .dataset import Dataset, FoldSplit, Label, load_csv, make_folds, split_by_fold, write_csv
from .errors import (
    CascadeError,
    ConfigError,
    DataError,
    DomainError,
    EmptyDatasetError,
    MissingValueError,
    ResourceError,
)
from .explanation import ExplanationMask, ValidityReport, depth_stats, is_valid, mask_from_path
from .metrics import ConfusionMatrix, EvalReport, ModelConfig, compare_report, confusion, cross_validate, derived_metrics
from .tree import Condition, Leaf, Split, Tree, best_split, grow_tree, impurity, majority_label, predict

__version__ = "0.1.0"
