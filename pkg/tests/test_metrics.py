import itertools

import numpy as np
import pytest

from ordcd.errors import (
    DegenerateLabels,
    LengthMismatch,
    NodeCountMismatch,
    NotNormalized,
    ShapeMismatch,
    ValidationError,
)
from ordcd.graph import Dag, enumerate_dags
from ordcd.metrics import PairDecision, accuracy, auc_ranked, forced_decision, shd, total_variation


def _dec(c):
    return PairDecision("forward" if c >= 0 else "backward", c, 0.0, c)


# -- shd -------------------------------------------------------------------


def test_shd_examples():
    g = Dag(3, frozenset({(1, 2), (2, 3)}))
    assert shd(g, g) == 0
    assert shd(Dag(2, frozenset({(1, 2)})), Dag(2, frozenset({(2, 1)}))) == 1
    assert shd(g, Dag.empty(3)) == 2
    with pytest.raises(NodeCountMismatch):
        shd(g, Dag.empty(4))


def test_shd_is_metric_on_all_p3_dags():
    dags = list(enumerate_dags(3))
    assert len(dags) == 25
    for a, b in itertools.product(dags, repeat=2):
        d = shd(a, b)
        assert d >= 0
        assert (d == 0) == (a == b)
        assert d == shd(b, a)
    for a, b, c in itertools.product(dags, repeat=3):
        assert shd(a, c) <= shd(a, b) + shd(b, c)


# -- accuracy / auc ---------------------------------------------------------


def test_accuracy_examples():
    decs = [_dec(1.0)] * 100
    assert accuracy(decs, ["forward"] * 100) == 1.0
    assert accuracy(decs, ["backward"] * 100) == 0.0
    assert accuracy(decs, ["forward"] * 73 + ["backward"] * 27) == pytest.approx(0.73)
    with pytest.raises(LengthMismatch):
        accuracy(decs, ["forward"])
    with pytest.raises(ValidationError):
        accuracy([_dec(1.0)], ["sideways"])


def test_auc_examples():
    decs = [_dec(2.0), _dec(-1.0), _dec(0.5)]
    assert auc_ranked(decs, ["forward", "backward", "forward"]) == 1.0
    assert auc_ranked(decs, ["backward", "forward", "backward"]) == 0.0
    with pytest.raises(DegenerateLabels):
        auc_ranked(decs, ["forward"] * 3)
    with pytest.raises(LengthMismatch):
        auc_ranked(decs, ["forward"])


def _auc_threshold_sweep(scores, y):
    # brute force: P(score_pos > score_neg) + 0.5 P(tie)
    pos = [s for s, t in zip(scores, y) if t]
    neg = [s for s, t in zip(scores, y) if not t]
    tot = sum((a > b) + 0.5 * (a == b) for a in pos for b in neg)
    return tot / (len(pos) * len(neg))


def test_auc_matches_pairwise_oracle_with_ties(rng):
    scores = rng.integers(-3, 4, 60).astype(float)
    y = rng.random(60) < 0.5
    labels = ["forward" if t else "backward" for t in y]
    decs = [_dec(s) for s in scores]
    assert auc_ranked(decs, labels) == pytest.approx(_auc_threshold_sweep(scores, y))


def test_auc_null_and_invariances(rng):
    scores = rng.normal(size=4000)
    labels = ["forward" if t else "backward" for t in rng.random(4000) < 0.5]
    decs = [_dec(s) for s in scores]
    base = auc_ranked(decs, labels)
    assert abs(base - 0.5) < 0.03
    assert auc_ranked([_dec(np.tanh(s) * 3 + 1) for s in scores], labels) == pytest.approx(base, abs=1e-12)
    perm = rng.permutation(4000)
    assert auc_ranked([decs[i] for i in perm], [labels[i] for i in perm]) == pytest.approx(base, abs=1e-12)
    assert accuracy([decs[i] for i in perm], [labels[i] for i in perm]) == accuracy(decs, labels)


# -- total variation --------------------------------------------------------


def test_total_variation_examples():
    a = np.array([[0.25, 0.25], [0.25, 0.25]])
    assert total_variation(a, a) == 0.0
    assert total_variation([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert total_variation([0.5, 0.5], [0.6, 0.4]) == pytest.approx(0.1)
    with pytest.raises(ShapeMismatch):
        total_variation([0.5, 0.5], [1.0])
    with pytest.raises(NotNormalized):
        total_variation([0.5, 0.6], [0.5, 0.5])
    with pytest.raises(NotNormalized):
        total_variation([1.5, -0.5], [0.5, 0.5])


# -- forced decisions -------------------------------------------------------


def test_forced_decision_fig1(fig1_10k):
    dec = forced_decision(fig1_10k)
    assert dec.direction == "forward"
    assert dec.confidence > 0
    assert dec.confidence == dec.bic_backward - dec.bic_forward


def test_forced_decision_antisymmetry(fig1_10k):
    dec = forced_decision(fig1_10k)
    swapped = forced_decision(fig1_10k.subset([2, 1]))
    assert swapped.direction == "backward"
    assert swapped.confidence == -dec.confidence


def test_forced_decision_needs_two_columns(fig1_10k):
    with pytest.raises(ValidationError):
        forced_decision(fig1_10k.subset([1]))


def test_binary_pairs_tie(rng):
    from .conftest import make_data

    x = rng.integers(1, 3, 500)
    y = np.where(rng.random(500) < 0.8, x, 3 - x)
    dec = forced_decision(make_data([x, y], (2, 2)))
    # both directions are saturated for two binary columns
    assert dec.tie and dec.confidence == 0.0 and dec.direction == "forward"
