import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascading_trees.cascade import NEGATIVE, fit_cascade, predict_cascade
from cascading_trees.dataset import Label
from cascading_trees.errors import DomainError, ResourceError
from cascading_trees.explanation import (
    ExplanationMask,
    classifier_of,
    depth_stats,
    is_valid,
    mask_from_path,
    render_condition,
    render_path,
)
from cascading_trees.tree import GT, LE, Condition, grow_tree, predict

from conftest import SAMPLE11, random_boolean_dataset
from oracles import brute_is_valid, cascade_fire, cascade_label, tree_label


def r_mask(bits):
    return [b == "1" for b in bits]


def mask(bits):
    return ExplanationMask(tuple(r_mask(bits)))


def test_mask_from_classic_path(classic_synth):
    _, path = predict(classic_synth, SAMPLE11)
    m = mask_from_path(path, 4)
    assert str(m) == "[1,1,1,0]" and m.size == 3


def test_mask_from_cascade_path(cascade_synth):
    m = mask_from_path(predict_cascade(cascade_synth, SAMPLE11).path, 4)
    assert str(m) == "[0,0,0,1]"


def test_mask_repeated_feature_counts_once():
    path = [Condition(1, LE, 0.5), Condition(1, GT, 0.2)]
    assert mask_from_path(path, 3) == mask("010")


def test_empty_path():
    m = mask_from_path([], 4)
    assert m.size == 0 and m == mask("0000")


def test_mask_out_of_range():
    with pytest.raises(DomainError):
        mask_from_path([Condition(4, LE, 0.5)], 4)


def test_trivial_mask_checks_once(cascade_synth):
    r = is_valid(cascade_synth.classify, ExplanationMask.full(4), SAMPLE11)
    assert r.valid and r.checked_count == 1 and r.counterexample is None


def test_cascade_feature4_valid(cascade_synth):
    r = is_valid(cascade_synth.classify, mask("0001"), SAMPLE11)
    assert r.valid and r.checked_count == 8
    assert brute_is_valid(lambda z: cascade_label(cascade_synth, z), r_mask("0001"), SAMPLE11)


def test_classic_feature4_invalid(classic_synth):
    r = is_valid(classic_synth.classify, mask("0001"), SAMPLE11)
    assert not r.valid
    cex = list(r.counterexample)
    assert cex[3] == 1.0
    assert tree_label(classic_synth, cex) != tree_label(classic_synth, SAMPLE11)
    assert not brute_is_valid(lambda z: tree_label(classic_synth, z), r_mask("0001"), SAMPLE11)


def test_first_counterexample_is_lexicographic(classic_synth):
    # free features F1..F3 counted with F1 as the high bit; 000 keeps Positive,
    # 001 sets F3=T and lands in the {S8,S9} leaf
    r = is_valid(classic_synth.classify, mask("0001"), SAMPLE11)
    assert r.counterexample == (0.0, 0.0, 1.0, 1.0)
    assert r.checked_count == 2


def test_cap_exceeded():
    x = np.zeros(21)
    with pytest.raises(ResourceError):
        is_valid(lambda Z: np.zeros(len(Z), bool), ExplanationMask.full(21), x)
    assert is_valid(lambda Z: np.zeros(len(Z), bool), ExplanationMask.full(21), x, cap=21).valid


def test_non_boolean_sample():
    with pytest.raises(DomainError):
        is_valid(lambda Z: np.zeros(len(Z), bool), mask("00"), [0.5, 1.0])


def test_mask_length_mismatch():
    with pytest.raises(DomainError):
        is_valid(lambda Z: np.zeros(len(Z), bool), mask("000"), [0.0, 1.0])


def test_classifier_of(cascade_synth, classic_synth):
    assert classifier_of(cascade_synth)(np.array([SAMPLE11])).tolist() == [True]
    with pytest.raises(TypeError):
        classifier_of(object())


@pytest.mark.parametrize("items, mean, count", [
    ([[1], [1, 2], [1, 2, 3]], 2.0, 3),
    ([], None, 0),
    ([None, NEGATIVE], None, 0),
    ([2, 4, None], 3.0, 2),
])
def test_depth_stats(items, mean, count):
    s = depth_stats(items)
    assert (s.mean, s.count) == (mean, count)
    assert s.defined is (count > 0)


def test_depth_stats_synthetic_replay(synth, cascade_synth):
    positives = [x for x, y in zip(synth.X, synth.y) if y]
    preds = [predict_cascade(cascade_synth, x) for x in positives]
    s = depth_stats(preds)
    # route S1..S6 independently: S1-S4 depth 2, S5 depth 1, S6 never fires
    oracle = [cascade_fire(cascade_synth, x)[1] for x in positives]
    assert oracle == [2, 2, 2, 2, 1, None]
    assert s.count == 5
    assert s.mean == pytest.approx(9 / 5)


def test_render_boolean_and_numeric():
    names = ["Feature4", "radius"]
    assert render_condition(Condition(0, GT, 0.5), names, True) == "Feature4 = T"
    assert render_condition(Condition(0, LE, 0.5), names, True) == "Feature4 = F"
    assert render_condition(Condition(1, LE, 0.23), names) == "radius ≤ 0.23"
    path = [Condition(0, GT, 0.5), Condition(1, GT, 14.5)]
    assert render_path(path, names, (True, False)) == "Feature4 = T AND radius > 14.5"


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_validity_agrees_with_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = random_boolean_dataset(rng, n_max=20, k_max=7)
    model = fit_cascade(d)
    tree = grow_tree(d)
    for x in d.X[:6]:
        bits = rng.integers(0, 2, size=d.n_features).astype(bool)
        m = ExplanationMask(tuple(bits))
        assert is_valid(model.classify, m, x).valid == brute_is_valid(
            lambda z: cascade_label(model, z), bits, x)
        assert is_valid(tree.classify, m, x).valid == brute_is_valid(
            lambda z: tree_label(tree, z), bits, x)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_superset_of_valid_mask_is_valid(seed):
    rng = np.random.default_rng(seed)
    d = random_boolean_dataset(rng, n_max=20, k_max=8)
    model = fit_cascade(d)
    for x in d.X:
        pred = predict_cascade(model, x)
        if pred.label is not Label.POSITIVE:
            continue
        base = mask_from_path(pred.path, d.n_features)
        assert is_valid(model.classify, base, x).valid
        extra = base.as_array() | rng.integers(0, 2, size=d.n_features).astype(bool)
        assert is_valid(model.classify, ExplanationMask(tuple(extra)), x).valid
