from ptsdpredict.metrics.comparison import (
    COMPARISON_HEADER,
    ComparisonRow,
    ComparisonTable,
    compare_table,
)
from ptsdpredict.metrics.evaluation import (
    AVERAGING_MODES,
    CONFUSION_HEADER,
    AveragedScores,
    ClassScores,
    ConfusionMatrix,
    EvaluationReport,
    confusion,
    confusion_rows,
    evaluate,
    report_from_dict,
    report_to_dict,
    scores,
)
