"""Cutoff metrics, ROC/AUC and the comparison tables."""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import SingleClass


@dataclass
class EvalReport:
    label: str
    auc: float
    sensitivity: float
    specificity: float
    cutoff: float
    roc: list
    n_pos: int
    n_neg: int
    provenance: dict = field(default_factory=dict)


@dataclass
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def sensitivity(self):
        return self.tp / (self.tp + self.fn)

    @property
    def specificity(self):
        return self.tn / (self.tn + self.fp)


def _check(probs, labels):
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    if probs.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos + n_neg != labels.size:
        raise ValueError("labels must be 0/1")
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("both classes are needed to evaluate")
    return probs, labels, n_pos, n_neg


def confusion_at_cutoff(probs, labels, cutoff=0.5):
    """Counts with ``prob >= cutoff`` predicted positive."""
    probs, labels, _, _ = _check(probs, labels)
    pred = probs >= cutoff
    pos = labels == 1
    return Confusion(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def roc_counts(scores, labels):
    """Cumulative (FP, TP) counts at every distinct threshold, from (0, 0)."""
    scores, labels, n_pos, n_neg = _check(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = (labels[order] == 1).astype(np.int64)
    tp = np.cumsum(pos)
    fp = np.cumsum(1 - pos)
    # keep the last index of each run of tied scores
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    fp = np.r_[0, fp[last]]
    tp = np.r_[0, tp[last]]
    return fp, tp, n_pos, n_neg


def auc_fraction(scores, labels):
    """Trapezoidal AUC as an exact fraction (ties get half credit)."""
    fp, tp, n_pos, n_neg = roc_counts(scores, labels)
    twice = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    return Fraction(twice, 2 * n_pos * n_neg)


def roc_auc(scores, labels):
    """Return ``(auc, roc_points)``; points are (FPR, TPR) pairs sorted by FPR."""
    fp, tp, n_pos, n_neg = roc_counts(scores, labels)
    twice = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    points = list(zip((fp / n_neg).tolist(), (tp / n_pos).tolist()))
    return twice / (2 * n_pos * n_neg), points


def evaluate(label, probs, labels, cutoff=0.5, provenance=None):
    auc, points = roc_auc(probs, labels)
    conf = confusion_at_cutoff(probs, labels, cutoff)
    return EvalReport(
        label=label, auc=auc, sensitivity=conf.sensitivity, specificity=conf.specificity,
        cutoff=cutoff, roc=points, n_pos=conf.tp + conf.fn, n_neg=conf.tn + conf.fp,
        provenance=dict(provenance or {}),
    )


COMPARE_HEADER = ("label", "AUC", "Sens", "Spec", "best")


def compare_models(reports):
    """Rows ``(label, AUC, Sens, Spec, best)`` with 4-decimal strings.

    The first report with the highest AUC is flagged with ``*``.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to compare")
    best = max(range(len(reports)), key=lambda i: (reports[i].auc, -i))
    return [
        (r.label, f"{r.auc:.4f}", f"{r.sensitivity:.4f}", f"{r.specificity:.4f}",
         "*" if i == best else "")
        for i, r in enumerate(reports)
    ]


def markdown_table(header, rows):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]

    def line(cells):
        return "| " + " | ".join(str(c).ljust(w) for c, w in zip(cells, widths)) + " |"

    sep = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    return "\n".join([line(header), sep] + [line(r) for r in rows]) + "\n"
