import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from embedviz.errors import BadLabel, LengthMismatch, SingleClass
from embedviz.metrics import (
    ConfusionMatrix,
    auc_roc,
    balanced_accuracy,
    confusion,
    evaluate,
    f1,
    format_table,
    precision,
    recall,
    reports_from_json,
    reports_to_csv,
    reports_to_json,
)


def brute_auc(y, s):
    pos, neg = s[y == 1], s[y == -1]
    wins = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def test_confusion_examples():
    assert confusion([1, -1], [1, -1]) == ConfusionMatrix(1, 0, 1, 0)
    assert confusion([1, -1], [-1, 1]) == ConfusionMatrix(0, 1, 0, 1)
    with pytest.raises(LengthMismatch):
        confusion([1, -1], [1])
    with pytest.raises(BadLabel):
        confusion([1, 0], [1, 1])
    with pytest.raises(LengthMismatch):
        confusion([], [])


def test_precision_recall_f1():
    assert precision(ConfusionMatrix(8, 2, 0, 0)) == pytest.approx(0.8)
    assert precision(ConfusionMatrix(0, 0, 5, 5)) == 0.0
    assert recall(ConfusionMatrix(0, 3, 5, 0)) == 0.0
    # P = 0.8, R = 0.6
    cm = ConfusionMatrix(tp=24, fp=6, tn=0, fn=16)
    assert f1(cm) == pytest.approx(0.6857142857142857, abs=1e-15)
    assert f1(ConfusionMatrix(0, 0, 0, 0)) == 0.0


def test_balanced_accuracy_examples():
    assert balanced_accuracy(ConfusionMatrix(tp=10, fp=0, tn=90, fn=0)) == 1.0
    assert balanced_accuracy(ConfusionMatrix(tp=0, fp=0, tn=90, fn=10)) == 0.5
    assert balanced_accuracy(ConfusionMatrix(tp=5, fp=45, tn=45, fn=5)) == 0.5


def test_auc_examples():
    assert auc_roc([1, 1, -1, -1], [0.9, 0.8, 0.1, 0.2]) == 1.0
    assert auc_roc([1, 1, -1, -1], [0.8, 0.3, 0.6, 0.1]) == 0.75
    assert auc_roc([1, -1, 1, -1], [0.4] * 4) == 0.5
    with pytest.raises(SingleClass):
        auc_roc([1, 1], [0.1, 0.2])


labels_scores = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
        st.lists(st.integers(-5, 5).map(float), min_size=n, max_size=n),
    )
).filter(lambda t: 1 in t[0] and -1 in t[0])


@settings(max_examples=200, deadline=None)
@given(labels_scores)
def test_auc_equals_brute_force(t):
    y, s = np.array(t[0]), np.array(t[1])
    assert auc_roc(y, s) == brute_auc(y, s)


@settings(max_examples=100, deadline=None)
@given(labels_scores)
def test_auc_monotone_transform(t):
    y, s = np.array(t[0]), np.array(t[1])
    assert auc_roc(y, s) == auc_roc(y, np.exp(s) * 3 + 1)


label_pairs = st.integers(1, 80).flatmap(
    lambda n: st.tuples(
        st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
        st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
    )
)


@settings(max_examples=200, deadline=None)
@given(label_pairs)
def test_metric_invariants(t):
    y, p = np.array(t[0]), np.array(t[1])
    cm = confusion(y, p)
    assert cm.total == y.size
    swapped = confusion(-y, -p)
    assert balanced_accuracy(swapped) == balanced_accuracy(cm)
    v = f1(cm)
    assert 0 <= v <= 1
    assert (v == 0) == (cm.tp == 0)
    for m in (precision, recall, balanced_accuracy):
        assert 0 <= m(cm) <= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 100), st.integers(1, 100))
def test_all_majority_predictor_is_half(n_pos, n_neg):
    y = np.r_[np.ones(n_pos), -np.ones(n_neg)].astype(int)
    maj = 1 if n_pos > n_neg else -1
    assert balanced_accuracy(confusion(y, np.full(y.size, maj))) == 0.5


def sample_reports():
    y = np.array([1, 1, -1, -1, -1])
    return [
        evaluate(y, np.array([1, -1, -1, -1, 1]), np.array([0.9, 0.4, 0.2, 0.1, 0.7]), "KNN", 1),
        evaluate(y, np.array([1, 1, -1, -1, -1]), np.array([0.9, 0.8, 0.2, 0.1, 0.3]), "KNN", 2),
        evaluate(y, np.array([-1, -1, -1, -1, -1]), np.array([0.5] * 5), "SVM", 1),
    ]


def test_json_round_trip():
    reps = sample_reports()
    text = reports_to_json(reps)
    assert reports_from_json(text) == reps
    assert json.loads(text)[0]["confusion"] == {"fn": 1, "fp": 1, "tn": 2, "tp": 1}


def test_csv_layout():
    lines = reports_to_csv(sample_reports()).splitlines()
    assert lines[0] == (
        "classifier,option1_pre,option1_rec,option1_f1,option1_acc,option1_auc,"
        "option2_pre,option2_rec,option2_f1,option2_acc,option2_auc"
    )
    assert lines[1] == "KNN,0.50,0.50,0.50,0.58,0.83,1.00,1.00,1.00,1.00,1.00"
    assert lines[2] == "SVM,0.00,0.00,0.00,0.50,0.50,,,,,"


def test_text_table():
    text = format_table(sample_reports())
    assert "option 1" in text and "option 2" in text
    assert text.splitlines()[3].startswith("KNN")
