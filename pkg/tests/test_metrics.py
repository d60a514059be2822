import json

import numpy as np
import pytest

from ptsdpredict.errors import LengthMismatch
from ptsdpredict.metrics import (
    COMPARISON_HEADER,
    ConfusionMatrix,
    compare_table,
    confusion,
    confusion_rows,
    evaluate,
    report_from_dict,
    report_to_dict,
    scores,
)

# 401 test rows: 337 true negatives, 51 true positives, 13 missed positives
HELD_OUT = ConfusionMatrix(tn=337, fp=0, fn=13, tp=51)


def _brute_force(y_true, y_pred):
    """Scores computed straight from the label vectors."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    out = {"accuracy": np.mean(y_true == y_pred)}
    for label in (0, 1):
        predicted = y_pred == label
        actual = y_true == label
        hits = np.sum(predicted & actual)
        precision = hits / predicted.sum() if predicted.sum() else 0.0
        recall = hits / actual.sum() if actual.sum() else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label] = (precision, recall, f1, int(actual.sum()))
    return out


def test_confusion_counts():
    cm = confusion([1, 0, 1], [1, 0, 1])
    assert cm == ConfusionMatrix(tn=1, fp=0, fn=0, tp=2)
    assert cm.total == 3


def test_confusion_of_inverted_predictions():
    y = np.array([1, 0, 1, 1, 0])
    cm = confusion(y, 1 - y)
    assert cm.tp == 0 and cm.tn == 0
    assert cm.fp == 2 and cm.fn == 3


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])


def test_scores_of_held_out_matrix():
    report = scores(HELD_OUT)
    assert HELD_OUT.total == 401
    assert round(100 * report.accuracy, 2) == 96.76
    class0, class1 = report.per_class
    assert class1.precision == 1.0
    assert round(class1.recall, 2) == 0.80
    assert round(class1.f1, 2) == 0.89
    assert round(class0.precision, 2) == 0.96
    assert class0.recall == 1.0
    assert round(class0.f1, 2) == 0.98
    assert (class0.support, class1.support) == (337, 64)
    assert report.undefined == ()


def test_averaging_modes():
    report = scores(HELD_OUT)
    class0, class1 = report.per_class
    assert report.macro.recall == pytest.approx((class0.recall + class1.recall) / 2)
    assert report.weighted.recall == pytest.approx(report.accuracy)
    assert report.averaged("macro") is report.macro
    with pytest.raises(ValueError):
        report.averaged("micro")


def test_zero_denominators_are_reported():
    report = scores(confusion([0, 0, 0], [0, 0, 0]))
    assert report.per_class[1].precision == 0.0
    assert set(report.undefined) == {"precision_1", "recall_1", "f1_1"}
    assert report.accuracy == 1.0


def test_scores_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(500):
        size = int(rng.integers(1, 1001))
        # Skewed rates reach empty classes and empty predictions
        y_true = (rng.random(size) < rng.random()).astype(np.int64)
        y_pred = (rng.random(size) < rng.random()).astype(np.int64)
        report = scores(confusion(y_true, y_pred))
        expected = _brute_force(y_true, y_pred)
        assert report.accuracy == pytest.approx(expected["accuracy"])
        for label in (0, 1):
            got = report.per_class[label]
            assert (got.precision, got.recall, got.f1) == pytest.approx(expected[label][:3])
            assert got.support == expected[label][3]


def test_f1_lies_between_precision_and_recall():
    rng = np.random.default_rng(1)
    for _ in range(500):
        cm = ConfusionMatrix(*(int(count) for count in rng.integers(0, 50, size=4)))
        if cm.total == 0:
            continue
        for per_class in scores(cm).per_class:
            low = min(per_class.precision, per_class.recall)
            high = max(per_class.precision, per_class.recall)
            assert low - 1e-12 <= per_class.f1 <= high + 1e-12


def test_macro_equals_weighted_when_supports_are_equal():
    rng = np.random.default_rng(2)
    for _ in range(200):
        half = int(rng.integers(1, 200))
        y_true = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(half, dtype=np.int64)])
        y_pred = rng.integers(0, 2, size=2 * half)
        report = scores(confusion(y_true, y_pred))
        assert report.per_class[0].support == report.per_class[1].support
        for metric in ("precision", "recall", "f1"):
            assert getattr(report.macro, metric) == pytest.approx(getattr(report.weighted, metric))


def test_swapping_labels_swaps_per_class_scores():
    cm = ConfusionMatrix(tn=40, fp=7, fn=3, tp=10)
    original, swapped = scores(cm), scores(cm.swapped())
    assert original.per_class[0] == swapped.per_class[1]
    assert original.per_class[1] == swapped.per_class[0]
    assert original.accuracy == swapped.accuracy


def test_evaluate_uses_threshold():
    class Fixed:
        def predict(self, X, threshold=0.5):
            return (np.array([0.2, 0.6, 0.8]) >= threshold).astype(int)

    assert evaluate(Fixed(), None, [0, 1, 1]).accuracy == 1.0
    assert evaluate(Fixed(), None, [0, 1, 1], threshold=0.7).confusion.fn == 1


def test_report_document_round_trip():
    report = scores(HELD_OUT)
    document = json.loads(json.dumps(report_to_dict(report)))
    assert report_from_dict(document) == report


def test_confusion_rows_layout():
    assert confusion_rows(HELD_OUT) == [[0, 337, 0], [1, 13, 51]]


def test_compare_table_single_row():
    table = compare_table([("Ensemble Model", scores(HELD_OUT))])
    assert table.csv_rows()[0][:2] == ["Ensemble Model", "96.76"]
    assert table.to_csv().splitlines()[0] == ",".join(COMPARISON_HEADER)


def test_compare_table_identical_reports_and_unnamed():
    report = scores(HELD_OUT)
    table = compare_table([("A", report), ("A", report), ("", report)])
    rows = table.csv_rows()
    assert rows[0] == rows[1]
    assert rows[2][0] == "(unnamed)"


def test_compare_table_macro_differs_from_weighted():
    report = scores(HELD_OUT)
    weighted = compare_table([("m", report)], averaging="weighted").csv_rows()[0]
    macro = compare_table([("m", report)], averaging="macro").csv_rows()[0]
    assert weighted[1] == macro[1]
    assert weighted[2:] != macro[2:]
    with pytest.raises(ValueError):
        compare_table([("m", report)], averaging="micro")


def test_compare_table_failed_rows():
    table = compare_table([("Logistic Regression", scores(HELD_OUT)), ("SVM", None)])
    assert table.csv_rows()[1] == ["SVM", "", "", "", ""]
    assert table.status_csv().splitlines()[1:] == ["Logistic Regression,ok", "SVM,failed"]
    assert table.bars_csv().splitlines() == ["model,accuracy", "Logistic Regression,96.76"]
    text = table.to_text()
    assert text.splitlines()[0] == "Averaging: weighted"
    assert "failed" in text
