"""``cascading-trees`` command line interface.

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 training/model error (including an invalid explanation found by
``check-validity``).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import modelfile
from .cascade import (
    DEFAULT_SUBTREE_DEPTH,
    DEFAULT_THETA,
    CascadeModel,
    fit_cascade,
    positive_leaf_mask,
    predict_cascade,
    predict_cascade_tolerant,
)
from .dataset import Label, load_csv, make_folds, parse_cell, write_csv
from .errors import CascadeError, ConfigError, DataError, MissingValueError
from .explanation import DEFAULT_CAP, is_valid, mask_from_path, render_path
from .metrics import (
    CASCADE,
    CLASSIC,
    CLASSIC_BOUNDED,
    MODEL_KINDS,
    ModelConfig,
    compare_report,
    cross_validate,
)
from .tree import majority_label, predict

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _label_column(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="CSV dataset (relative paths also searched in $CASCADING_TREES_DATA_DIR)")
    p.add_argument("--label-column", type=_label_column, default=-1,
                   help="label column name or index (default: last column)")
    p.add_argument("--positive-label", default="Positive", help="label value treated as Positive")
    p.add_argument("--no-header", dest="has_header", action="store_false", help="the CSV has no header row")


def _add_model_args(p):
    p.add_argument("--theta", type=float, default=DEFAULT_THETA, help="positive-leaf threshold (default 0.8)")
    p.add_argument("--max-depth", type=int, default=None,
                   help="depth bound (cascade subtrees default 3; classic default unbounded)")
    p.add_argument("--criterion", choices=("gini", "entropy"), default="gini")
    p.add_argument("--min-samples-leaf", type=int, default=1)


def _load(args):
    return load_csv(args.data, args.label_column, args.positive_label, args.has_header)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cascading-trees", description="Cascading decision trees for succinct explanations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a cascade or a classic tree")
    _add_data_args(p)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--cascade", dest="kind", action="store_const", const="cascade")
    kind.add_argument("--classic", dest="kind", action="store_const", const="classic")
    p.set_defaults(kind="cascade")
    _add_model_args(p)
    p.add_argument("--seed", type=int, default=0, help="recorded in the model metadata")
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("predict", help="classify samples and print explanations")
    p.add_argument("--model", required=True)
    p.add_argument("--sample", action="append", default=[],
                   help="comma-separated feature values (T/F, numbers, ? for missing); repeatable")
    p.add_argument("--input", help="file with one comma-separated sample per line (no header, no label)")
    p.add_argument("--tolerant", action="store_true", help="skip subtrees that need a missing value")

    p = sub.add_parser("eval", help="k-fold comparison of classic and cascade models")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--models", default=",".join(MODEL_KINDS),
                   help=f"comma-separated subset of {', '.join(MODEL_KINDS)}")
    p.add_argument("--name", help="dataset name used in reports (default: file stem)")
    p.add_argument("--out", help="write OUT.txt and OUT.jsonl reports")
    p.add_argument("--no-timing", dest="timing", action="store_false", help="omit runtime fields")

    p = sub.add_parser("check-validity", help="exhaustively verify every positive explanation")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum feature count to enumerate")

    p = sub.add_parser("export", help="rewrite a dataset in the canonical CSV dialect")
    _add_data_args(p)
    p.add_argument("--out", required=True)
    return parser


def _describe(model) -> list[str]:
    if isinstance(model, CascadeModel):
        lines = [f"cascade: {len(model.subtrees)} subtrees (theta={model.theta:g}, "
                 f"max depth {model.subtree_max_depth}, {model.criterion})"]
        for i, tree in enumerate(model.subtrees, 1):
            leaves = tree.leaves()
            pos = positive_leaf_mask(tree, model.theta)
            summary = " ".join(f"[{l.positive_count}/{l.negative_count}{'*' if p else ''}]"
                               for l, p in zip(leaves, pos))
            lines.append(f"  subtree {i}: depth {tree.depth()}, {len(leaves)} leaves, "
                         f"{int(pos.sum())} positive  {summary}")
        lines.append(f"termination: {model.termination.value}")
        return lines
    tree = model.tree
    return [f"classic tree: depth {tree.depth()}, {len(tree.leaves())} leaves ({tree.criterion})"]


def cmd_train(args) -> int:
    data = _load(args)
    meta = {"seed": args.seed, "dataset_fingerprint": data.fingerprint(), "dataset": str(args.data)}
    if args.kind == "cascade":
        depth = DEFAULT_SUBTREE_DEPTH if args.max_depth is None else args.max_depth
        model = fit_cascade(data, args.theta, depth, args.criterion, args.min_samples_leaf)
        model.metadata.update(meta)
    else:
        model = modelfile.fit_classic(data, args.max_depth, args.criterion, args.min_samples_leaf)
        model.metadata.update(meta)
    modelfile.save(model, args.out)
    for line in _describe(model):
        print(line)
    print(f"model written to {args.out}")
    return 0


def _parse_sample(text: str, k: int) -> np.ndarray:
    cells = text.split(",")
    if len(cells) != k:
        raise DataError(f"sample has {len(cells)} values, model expects {k}")
    try:
        return np.array([parse_cell(c) for c in cells])
    except ValueError as exc:
        raise DataError(f"cannot parse sample {text!r}: {exc}") from None


def _format_prediction(model, sample, tolerant: bool) -> str:
    names, booleans = model.feature_names, model.boolean_features
    if isinstance(model, CascadeModel):
        pred = predict_cascade_tolerant(model, sample) if tolerant else predict_cascade(model, sample)
        if pred.label is Label.POSITIVE:
            return f"Positive — subtree {pred.fired_subtree + 1}: {render_path(pred.path, names, booleans)}"
        return pred.label.value
    leaf, path = predict(model.tree, sample)
    if majority_label(leaf) is Label.POSITIVE:
        return f"Positive — {render_path(path, names, booleans)}"
    return "Negative"


def cmd_predict(args) -> int:
    model = modelfile.load(args.model)
    texts = list(args.sample)
    if args.input:
        try:
            texts += [ln.strip() for ln in Path(args.input).read_text().splitlines() if ln.strip()]
        except OSError as exc:
            raise DataError(f"cannot read {args.input}: {exc.strerror}") from exc
    if not texts:
        raise DataError("no samples given (use --sample or --input)")
    for text in texts:
        sample = _parse_sample(text, model.n_features)
        try:
            print(_format_prediction(model, sample, args.tolerant))
        except MissingValueError as exc:
            hint = "" if args.tolerant else " (use --tolerant with a cascade model)"
            raise DataError(f"sample {text!r}: value of {model.feature_names[exc.feature]} is missing{hint}") from None
    return 0


def cmd_eval(args) -> int:
    data = _load(args)
    kinds = [k.strip() for k in args.models.split(",") if k.strip()]
    for k in kinds:
        if k not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {k!r}")
    depth = DEFAULT_SUBTREE_DEPTH if args.max_depth is None else args.max_depth
    configs = {
        CLASSIC: ModelConfig.classic(args.criterion, args.min_samples_leaf),
        CLASSIC_BOUNDED: ModelConfig.classic_bounded(depth, args.criterion, args.min_samples_leaf),
        CASCADE: ModelConfig.cascade(args.theta, depth, args.criterion, args.min_samples_leaf),
    }
    folds = make_folds(data, args.folds, args.seed)
    name = args.name or Path(args.data).stem
    reports = [cross_validate(data, args.folds, args.seed, configs[k], folds, name) for k in kinds]
    comparison = compare_report(reports)
    text = comparison.to_text(args.timing)
    sys.stdout.write(text)
    if args.out:
        Path(args.out + ".txt").write_text(text)
        Path(args.out + ".jsonl").write_text(comparison.to_json_lines(args.timing))
    return 0


def cmd_check_validity(args) -> int:
    model = modelfile.load(args.model)
    data = _load(args)
    if data.n_features != model.n_features:
        raise DataError(f"dataset has {data.n_features} features, model expects {model.n_features}")
    if not data.is_boolean or data.has_missing:
        raise DataError("validity checking needs Boolean features (T/F or 0/1) with no missing values")
    classify = model.classify
    positives = valid = 0
    for i, x in enumerate(data.X):
        if isinstance(model, CascadeModel):
            pred = predict_cascade(model, x)
            if pred.label is not Label.POSITIVE:
                continue
            path = pred.path
        else:
            leaf, path = predict(model.tree, x)
            if majority_label(leaf) is not Label.POSITIVE:
                continue
        positives += 1
        mask = mask_from_path(path, model.n_features)
        report = is_valid(classify, mask, x, cap=args.cap)
        if report.valid:
            valid += 1
        else:
            cex = ",".join("T" if v else "F" for v in report.counterexample)
            print(f"row {i + 1}: explanation {mask} INVALID, counterexample {cex}")
    if positives == 0:
        print("0 positive explanations")
    else:
        print(f"{valid}/{positives} positive explanations valid")
    return 0 if valid == positives else EXIT_MODEL


def cmd_export(args) -> int:
    data = _load(args)
    write_csv(data, args.out)
    print(f"wrote {data.n_samples} rows to {args.out}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "check-validity": cmd_check_validity,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CascadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
