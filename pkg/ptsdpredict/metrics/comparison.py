from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ptsdpredict.file_manager import format_csv
from ptsdpredict.metrics.evaluation import AVERAGING_MODES, EvaluationReport

COMPARISON_HEADER = ("model", "accuracy", "precision", "recall", "f1")
BARS_HEADER = ("model", "accuracy")
STATUS_HEADER = ("model", "status")
UNNAMED = "(unnamed)"


def percent(rate: float) -> str:
    return f"{100.0 * rate:.2f}"


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    report: Optional[EvaluationReport]
    status: str = "ok"

    def cells(self, averaging: str) -> List[str]:
        if self.report is None:
            return [self.name, "", "", "", ""]
        averaged = self.report.averaged(averaging)
        return [
            self.name,
            percent(self.report.accuracy),
            percent(averaged.precision),
            percent(averaged.recall),
            percent(averaged.f1),
        ]


@dataclass(frozen=True)
class ComparisonTable:
    rows: Tuple[ComparisonRow, ...]
    averaging: str = "weighted"

    def csv_rows(self) -> List[List[str]]:
        return [row.cells(self.averaging) for row in self.rows]

    def to_csv(self) -> str:
        return format_csv(COMPARISON_HEADER, self.csv_rows())

    def bars_csv(self) -> str:
        """``model,accuracy`` rows of the completed models, for bar charts."""
        return format_csv(BARS_HEADER, [row.cells(self.averaging)[:2] for row in self.rows if row.report])

    def status_csv(self) -> str:
        return format_csv(STATUS_HEADER, [[row.name, row.status] for row in self.rows])

    def to_text(self) -> str:
        header = ["Model", "Accuracy (%)", "Precision (%)", "Recall (%)", "F1 (%)", "Status"]
        body = [row.cells(self.averaging) + [row.status] for row in self.rows]
        widths = [max(len(str(line[i])) for line in [header] + body) for i in range(len(header))]

        def render(line):
            first = str(line[0]).ljust(widths[0])
            numbers = [str(cell).rjust(width) for cell, width in zip(line[1:5], widths[1:5])]
            return "  ".join([first, *numbers, str(line[5]).ljust(widths[5])]).rstrip()

        rule = "  ".join("-" * width for width in widths)
        lines = [f"Averaging: {self.averaging}", render(header), rule]
        lines.extend(render(line) for line in body)
        return "\n".join(lines) + "\n"


def compare_table(
    reports: Sequence[Tuple[str, Optional[EvaluationReport]]],
    averaging: str = "weighted",
    statuses: Sequence[str] = None,
) -> ComparisonTable:
    """
    Comparison table of named reports, rows in the given order.

    Args:
        reports: (name, report) pairs; a None report marks a failed model
        averaging: ``"weighted"`` (support-weighted) or ``"macro"``
        statuses: optional status text per row, "ok" or "failed" by default
    """
    if averaging not in AVERAGING_MODES:
        raise ValueError(f"Unknown averaging mode {averaging!r}, expected one of {AVERAGING_MODES}")
    rows = []
    for index, (name, report) in enumerate(reports):
        if statuses is not None:
            status = statuses[index]
        else:
            status = "ok" if report is not None else "failed"
        rows.append(ComparisonRow(name or UNNAMED, report, status))
    return ComparisonTable(tuple(rows), averaging)
