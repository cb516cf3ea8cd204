"""Confusion-matrix statistics and ROC AUC for +-1 labelled predictions.

The positive class is +1. Any ratio with a zero denominator is reported as 0.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import BadLabel, LengthMismatch, SingleClass

METRIC_NAMES = ("precision", "recall", "f1", "balanced_accuracy", "auc")
# Column headers of the results table.
METRIC_SHORT = {"precision": "pre", "recall": "rec", "f1": "f1", "balanced_accuracy": "acc", "auc": "auc"}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _labels(a, name):
    a = np.asarray(a).reshape(-1)
    bad = np.flatnonzero((a != 1) & (a != -1))
    if bad.size:
        raise BadLabel(int(bad[0]), a[bad[0]].item())
    return a


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true).reshape(-1)
    p = np.asarray(y_pred).reshape(-1)
    if t.shape != p.shape:
        raise LengthMismatch(f"y_true has {t.size} entries, y_pred has {p.size}")
    if t.size == 0:
        raise LengthMismatch("need at least one sample")
    t = _labels(t, "y_true")
    p = _labels(p, "y_pred")
    return ConfusionMatrix(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == -1) & (p == 1))),
        tn=int(np.sum((t == -1) & (p == -1))),
        fn=int(np.sum((t == 1) & (p == -1))),
    )


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def precision(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn)


def f1(cm: ConfusionMatrix) -> float:
    p, r = precision(cm), recall(cm)
    return _ratio(2 * p * r, p + r)


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean of sensitivity and specificity; an empty class contributes 0."""
    return 0.5 * (_ratio(cm.tp, cm.tp + cm.fn) + _ratio(cm.tn, cm.tn + cm.fp))


def auc_roc(y_true, scores) -> float:
    """Probability that a random positive outscores a random negative, ties
    counted as 1/2 (Mann-Whitney U over average ranks)."""
    t = np.asarray(y_true).reshape(-1)
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if t.shape != s.shape:
        raise LengthMismatch(f"y_true has {t.size} entries, scores has {s.size}")
    t = _labels(t, "y_true")
    pos = t == 1
    n_pos = int(pos.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes present")
    ranks = rankdata(s, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class MetricsReport:
    classifier: str
    option: int
    confusion: ConfusionMatrix
    precision: float
    recall: float
    f1: float
    balanced_accuracy: float
    auc: float

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(y_true, y_pred, scores, classifier: str = "", option: int = 0) -> MetricsReport:
    cm = confusion(y_true, y_pred)
    return MetricsReport(
        classifier=classifier,
        option=option,
        confusion=cm,
        precision=precision(cm),
        recall=recall(cm),
        f1=f1(cm),
        balanced_accuracy=balanced_accuracy(cm),
        auc=auc_roc(y_true, scores),
    )


def reports_to_json(reports) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def reports_from_json(text: str) -> list[MetricsReport]:
    out = []
    for d in json.loads(text):
        d = dict(d)
        d["confusion"] = ConfusionMatrix(**d["confusion"])
        out.append(MetricsReport(**d))
    return out


def _layout(reports):
    classifiers, options = [], []
    cells = {}
    for r in reports:
        if r.classifier not in classifiers:
            classifiers.append(r.classifier)
        if r.option not in options:
            options.append(r.option)
        cells[(r.classifier, r.option)] = r
    return classifiers, sorted(options), cells


def reports_to_csv(reports, decimals: int = 2) -> str:
    """One row per classifier, five metric columns per option."""
    classifiers, options, cells = _layout(reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["classifier"] + [f"option{o}_{METRIC_SHORT[m]}" for o in options for m in METRIC_NAMES])
    for c in classifiers:
        row = [c]
        for o in options:
            r = cells.get((c, o))
            row += [("" if r is None else f"{getattr(r, m):.{decimals}f}") for m in METRIC_NAMES]
        w.writerow(row)
    return buf.getvalue()


def format_table(reports, decimals: int = 2) -> str:
    """Aligned plain-text version of ``reports_to_csv``."""
    classifiers, options, cells = _layout(reports)
    width = max([len("classifier")] + [len(c) for c in classifiers])
    col = decimals + 3
    head1 = " " * width + " | " + " | ".join(f"option {o}".center(5 * (col + 1) - 1) for o in options)
    head2 = "classifier".ljust(width) + " | " + " | ".join(
        " ".join(METRIC_SHORT[m].rjust(col) for m in METRIC_NAMES) for _ in options
    )
    lines = [head1, head2, "-" * len(head2)]
    for c in classifiers:
        blocks = []
        for o in options:
            r = cells.get((c, o))
            blocks.append(" ".join(
                ("-" if r is None else f"{getattr(r, m):.{decimals}f}").rjust(col) for m in METRIC_NAMES
            ))
        lines.append(c.ljust(width) + " | " + " | ".join(blocks))
    return "\n".join(lines) + "\n"
