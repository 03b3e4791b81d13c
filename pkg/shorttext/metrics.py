"""
Weighted multiclass precision, recall and F-beta
"""
from dataclasses import dataclass, field

import numpy as np

from shorttext.errors import ContractError, DataError


@dataclass
class ConfusionMatrix:
    """counts[t, p] = samples with true label t predicted as p"""
    counts: np.ndarray

    @property
    def num_labels(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def support(self):
        return self.counts.sum(axis=1)

    @property
    def predicted(self):
        return self.counts.sum(axis=0)

    @property
    def true_positives(self):
        return np.diag(self.counts)

    def to_list(self):
        return self.counts.astype(int).tolist()


@dataclass
class MetricsReport:
    precision: list
    recall: list
    f_beta: list
    support: list
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    accuracy: float
    beta: float = 1.0
    confusion: list = field(default=None, repr=False)

    def to_dict(self, include_confusion=False):
        data = {
            "precision_weighted": self.precision_weighted,
            "recall_weighted": self.recall_weighted,
            "f1_weighted": self.f1_weighted,
            "accuracy": self.accuracy,
            "beta": self.beta,
            "per_class": {
                str(label): {
                    "p": self.precision[label],
                    "r": self.recall[label],
                    "f": self.f_beta[label],
                    "support": self.support[label],
                }
                for label in range(len(self.support))
            },
        }
        if include_confusion and self.confusion is not None:
            data["confusion"] = self.confusion
        return data

    @classmethod
    def from_dict(cls, data):
        labels = sorted(data["per_class"], key=int)
        per_class = [data["per_class"][label] for label in labels]
        return cls(
            precision=[c["p"] for c in per_class],
            recall=[c["r"] for c in per_class],
            f_beta=[c["f"] for c in per_class],
            support=[c["support"] for c in per_class],
            precision_weighted=data["precision_weighted"],
            recall_weighted=data["recall_weighted"],
            f1_weighted=data["f1_weighted"],
            accuracy=data["accuracy"],
            beta=data.get("beta", 1.0),
            confusion=data.get("confusion"),
        )

    def to_text(self):
        """Flat ``key = value`` lines"""
        lines = [
            f"precision_weighted = {self.precision_weighted!r}",
            f"recall_weighted = {self.recall_weighted!r}",
            f"f1_weighted = {self.f1_weighted!r}",
            f"accuracy = {self.accuracy!r}",
        ]
        for label in range(len(self.support)):
            lines.append(f"per_class.{label}.p = {self.precision[label]!r}")
            lines.append(f"per_class.{label}.r = {self.recall[label]!r}")
            lines.append(f"per_class.{label}.f = {self.f_beta[label]!r}")
        return "\n".join(lines) + "\n"


def confusion(y_true, y_pred, num_labels):
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ContractError(f"y_true and y_pred differ in length ({len(y_true)} vs {len(y_pred)})")
    for name, labels in (("y_true", y_true), ("y_pred", y_pred)):
        if labels.size and (labels.min() < 0 or labels.max() >= num_labels):
            raise DataError(f"{name} holds a label outside [0, {num_labels})")
    counts = np.zeros((num_labels, num_labels), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts)


def _safe_ratio(numerator, denominator):
    numerator = np.asarray(numerator, dtype=np.float64)
    denominator = np.asarray(denominator, dtype=np.float64)
    out = np.zeros_like(numerator)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def per_class_pr(cm):
    """(precision, recall) arrays; a zero denominator gives 0"""
    tp = cm.true_positives
    return _safe_ratio(tp, cm.predicted), _safe_ratio(tp, cm.support)


def f_beta(precision, recall, beta=1.0):
    """(1 + b^2) P R / (b^2 P + R), 0 when both are 0"""
    if not beta > 0:
        raise ContractError(f"beta must be positive, got {beta}")
    b2 = beta * beta
    precision = np.asarray(precision, dtype=np.float64)
    recall = np.asarray(recall, dtype=np.float64)
    score = _safe_ratio((1 + b2) * precision * recall, b2 * precision + recall)
    return float(score) if score.ndim == 0 else score


def weighted_metrics(cm, beta=1.0):
    """Support-weighted precision, recall and F-beta plus accuracy"""
    total = cm.total
    if total == 0:
        raise DataError("cannot compute metrics over an empty confusion matrix")
    precision, recall = per_class_pr(cm)
    scores = f_beta(precision, recall, beta)
    weights = cm.support / total
    return MetricsReport(
        precision=precision.tolist(),
        recall=recall.tolist(),
        f_beta=np.atleast_1d(scores).tolist(),
        support=cm.support.astype(int).tolist(),
        precision_weighted=float(np.dot(weights, precision)),
        recall_weighted=float(np.dot(weights, recall)),
        f1_weighted=float(np.dot(weights, scores)),
        accuracy=float(np.trace(cm.counts) / total),
        beta=beta,
        confusion=cm.to_list(),
    )


def majority_baseline(labels):
    """Accuracy of always predicting the most frequent label"""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise DataError("majority baseline needs at least one label")
    return float(np.bincount(labels).max() / labels.size)
