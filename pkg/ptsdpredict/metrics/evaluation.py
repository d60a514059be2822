"""Binary confusion matrix and the scores derived from it.

Class 1 is the positive (PTSD) class. Rates with a zero denominator are
reported as 0.0 and named in ``EvaluationReport.undefined``.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ptsdpredict.errors import LengthMismatch
from ptsdpredict.tabular.table import as_labels

AVERAGING_MODES = ("macro", "weighted")
CONFUSION_HEADER = ("actual", "predicted_0", "predicted_1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def swapped(self) -> "ConfusionMatrix":
        """The same matrix with the class labels exchanged."""
        return ConfusionMatrix(tn=self.tp, fp=self.fn, fn=self.fp, tp=self.tn)

    def to_dict(self) -> dict:
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}

    @classmethod
    def from_dict(cls, document) -> "ConfusionMatrix":
        return cls(**{key: int(document[key]) for key in ("tn", "fp", "fn", "tp")})


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape[0] != y_pred.shape[0]:
        raise LengthMismatch(y_true.shape[0], y_pred.shape[0])
    y_true = as_labels(y_true)
    y_pred = as_labels(y_pred)
    return ConfusionMatrix(
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
    )


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class AveragedScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    per_class: Tuple[ClassScores, ClassScores]
    macro: AveragedScores
    weighted: AveragedScores
    undefined: Tuple[str, ...] = field(default_factory=tuple)

    def averaged(self, mode: str = "weighted") -> AveragedScores:
        if mode not in AVERAGING_MODES:
            raise ValueError(f"Unknown averaging mode {mode!r}, expected one of {AVERAGING_MODES}")
        return self.macro if mode == "macro" else self.weighted


def _ratio(numerator, denominator, name, undefined: List[str]) -> float:
    if denominator == 0:
        undefined.append(name)
        return 0.0
    return numerator / denominator


def _class_scores(tp, fp, fn, support, label, undefined) -> ClassScores:
    precision = _ratio(tp, tp + fp, f"precision_{label}", undefined)
    recall = _ratio(tp, tp + fn, f"recall_{label}", undefined)
    f1 = _ratio(2.0 * precision * recall, precision + recall, f"f1_{label}", undefined)
    return ClassScores(precision, recall, f1, support)


def scores(cm: ConfusionMatrix) -> EvaluationReport:
    """
    Accuracy, per-class precision/recall/F1 and their macro and weighted means.

    Class 0 is scored by reading the matrix from the negative side:
    its true positives are ``tn``, its false positives ``fn`` and its false
    negatives ``fp``.
    """
    undefined = []
    accuracy = _ratio(cm.tp + cm.tn, cm.total, "accuracy", undefined)
    class0 = _class_scores(cm.tn, cm.fn, cm.fp, cm.tn + cm.fp, 0, undefined)
    class1 = _class_scores(cm.tp, cm.fp, cm.fn, cm.tp + cm.fn, 1, undefined)
    per_class = (class0, class1)

    macro = AveragedScores(
        precision=(class0.precision + class1.precision) / 2.0,
        recall=(class0.recall + class1.recall) / 2.0,
        f1=(class0.f1 + class1.f1) / 2.0,
    )
    total = cm.total
    if total:
        w0, w1 = class0.support / total, class1.support / total
    else:
        w0 = w1 = 0.0
    weighted = AveragedScores(
        precision=w0 * class0.precision + w1 * class1.precision,
        recall=w0 * class0.recall + w1 * class1.recall,
        f1=w0 * class0.f1 + w1 * class1.f1,
    )
    return EvaluationReport(cm, accuracy, per_class, macro, weighted, tuple(undefined))


def evaluate(model, X, y_true, threshold: float = 0.5) -> EvaluationReport:
    """Score any fitted classifier or ensemble on labelled rows."""
    return scores(confusion(y_true, model.predict(X, threshold)))


def report_to_dict(report: EvaluationReport) -> dict:
    def averaged(a):
        return {"precision": a.precision, "recall": a.recall, "f1": a.f1}

    return {
        "confusion": report.confusion.to_dict(),
        "accuracy": report.accuracy,
        "per_class": {
            str(label): {
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
                "support": s.support,
            }
            for label, s in enumerate(report.per_class)
        },
        "macro": averaged(report.macro),
        "weighted": averaged(report.weighted),
        "undefined": list(report.undefined),
    }


def report_from_dict(document) -> EvaluationReport:
    per_class = tuple(
        ClassScores(
            precision=float(entry["precision"]),
            recall=float(entry["recall"]),
            f1=float(entry["f1"]),
            support=int(entry["support"]),
        )
        for entry in (document["per_class"]["0"], document["per_class"]["1"])
    )
    return EvaluationReport(
        confusion=ConfusionMatrix.from_dict(document["confusion"]),
        accuracy=float(document["accuracy"]),
        per_class=per_class,
        macro=AveragedScores(**document["macro"]),
        weighted=AveragedScores(**document["weighted"]),
        undefined=tuple(document.get("undefined", ())),
    )


def confusion_rows(cm: ConfusionMatrix) -> list:
    """2x2 matrix rows under ``CONFUSION_HEADER``: actual class, then predicted 0 and 1 counts."""
    return [[0, cm.tn, cm.fp], [1, cm.fn, cm.tp]]
