"""JSON model files for classic trees and cascades.

Thresholds are written with Python's shortest round-trip float repr, so a
reloaded model routes every input exactly like the original.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .cascade import CascadeModel, IterationRecord, Termination
from .dataset import Dataset
from .errors import DataError
from .tree import Leaf, Node, Split, Tree, grow_tree

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ClassicModel:
    """A single decision tree plus the naming needed to render its paths."""

    tree: Tree
    feature_names: tuple[str, ...]
    boolean_features: Optional[tuple[bool, ...]] = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def classify(self, X) -> np.ndarray:
        return self.tree.classify(X)


def fit_classic(trainset: Dataset, max_depth=None, criterion="gini", min_samples_leaf=1) -> ClassicModel:
    tree = grow_tree(trainset, max_depth, criterion, min_samples_leaf)
    return ClassicModel(tree, trainset.feature_names, trainset.boolean_columns())


Model = Union[ClassicModel, CascadeModel]


def node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"positive_count": node.positive_count, "negative_count": node.negative_count}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def node_from_dict(d: dict, k: int) -> Node:
    if "positive_count" in d:
        return Leaf(int(d["positive_count"]), int(d["negative_count"]))
    feature = int(d["feature"])
    if not 0 <= feature < k:
        raise DataError(f"model file: feature index {feature} out of range")
    return Split(feature, float(d["threshold"]), node_from_dict(d["left"], k), node_from_dict(d["right"], k))


def to_dict(model: Model) -> dict:
    if isinstance(model, CascadeModel):
        meta = {
            "termination_reason": model.termination.value,
            "history": [vars(h) for h in model.history],
            **model.metadata,
        }
        return {
            "format_version": FORMAT_VERSION,
            "model_kind": "cascade",
            "feature_names": list(model.feature_names),
            "boolean_features": None if model.boolean_features is None else list(model.boolean_features),
            "criterion": model.criterion,
            "min_samples_leaf": model.min_samples_leaf,
            "theta": model.theta,
            "subtree_max_depth": model.subtree_max_depth,
            "subtrees": [node_to_dict(t.root) for t in model.subtrees],
            "metadata": meta,
        }
    tree = model.tree
    return {
        "format_version": FORMAT_VERSION,
        "model_kind": "classic",
        "feature_names": list(model.feature_names),
        "boolean_features": None if model.boolean_features is None else list(model.boolean_features),
        "criterion": tree.criterion,
        "max_depth": tree.max_depth,
        "subtrees": [node_to_dict(tree.root)],
        "metadata": dict(model.metadata),
    }


def from_dict(d: dict) -> Model:
    try:
        version = d["format_version"]
        if version != FORMAT_VERSION:
            raise DataError(f"model file: unsupported format_version {version}")
        names = tuple(d["feature_names"])
        k = len(names)
        booleans = d.get("boolean_features")
        booleans = None if booleans is None else tuple(bool(b) for b in booleans)
        meta = dict(d.get("metadata") or {})
        kind = d["model_kind"]
        if kind == "cascade":
            depth = int(d["subtree_max_depth"])
            trees = tuple(Tree(node_from_dict(s, k), depth, d["criterion"], k) for s in d["subtrees"])
            termination = Termination(meta.pop("termination_reason", Termination.NO_POSITIVE_LEAF.value))
            history = tuple(IterationRecord(**h) for h in meta.pop("history", []))
            return CascadeModel(trees, float(d["theta"]), depth, names, d["criterion"],
                                int(d.get("min_samples_leaf", 1)), termination, history, booleans, meta)
        if kind == "classic":
            (root,) = d["subtrees"]
            tree = Tree(node_from_dict(root, k), d.get("max_depth"), d["criterion"], k)
            return ClassicModel(tree, names, booleans, meta)
        raise DataError(f"model file: unknown model_kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"model file is malformed: {exc!r}") from exc


def dumps(model: Model) -> str:
    return json.dumps(to_dict(model), indent=2) + "\n"


def loads(text: str) -> Model:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid JSON: {exc}") from exc
    return from_dict(data)


def save(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def load(path) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc.strerror or exc}") from exc
