"""Exception hierarchy for the pipeline.

Every error the pipeline raises belongs to one of three families; the family
decides the process exit code (see ``experiment.exit_codes``).
"""


class PtsdError(Exception):
    """Base class for all pipeline errors."""


# ---------------------------------------------------------------------------
# Configuration errors (exit code 2)
# ---------------------------------------------------------------------------
class ConfigError(PtsdError):
    """Invalid experiment configuration."""


class SchemaError(ConfigError):
    """Invalid column schema."""


class UnknownModel(ConfigError):
    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"Unknown model kind: {kind!r}")


class EmptyEnsemble(ConfigError):
    def __init__(self, n_members=0):
        self.n_members = n_members
        super().__init__(
            f"An ensemble needs at least 2 members, got {n_members}"
        )


# ---------------------------------------------------------------------------
# Data errors (exit code 3)
# ---------------------------------------------------------------------------
class DataError(PtsdError):
    """Input data does not satisfy a precondition."""


class MissingColumn(DataError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"Column {name!r} is missing from the data")


class RaggedRow(DataError):
    def __init__(self, line, expected, found):
        self.line = line
        self.expected = expected
        self.found = found
        super().__init__(
            f"Row on line {line} has {found} fields, expected {expected}"
        )


class TargetMissingEntries(DataError):
    def __init__(self, column, count):
        self.column = column
        self.count = count
        super().__init__(f"Target column {column!r} has {count} missing entries")


class UnexpectedMissing(DataError):
    def __init__(self, column, count):
        self.column = column
        self.count = count
        super().__init__(f"Column {column!r} does not allow missing cells but has {count}")


class InvalidTargetCategory(DataError):
    def __init__(self, column, value):
        self.column = column
        self.value = value
        super().__init__(f"Target column {column!r} holds unknown category {value!r}")


class AllMissingColumn(DataError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"Column {name!r} has no observed values")


class UnknownColumn(DataError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"Column {name!r} is not covered by the fitted state")


class MissingCell(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"Column {column!r} still holds missing cells")


class UnseenCategory(DataError):
    def __init__(self, value, column=None):
        self.value = value
        self.column = column
        where = f" in column {column!r}" if column else ""
        super().__init__(f"Category {value!r}{where} was not seen at fit time")


class DegenerateSplit(DataError):
    """Train or test split would be empty."""


class TooFewMinority(DataError):
    def __init__(self, count):
        self.count = count
        super().__init__(f"SMOTE needs at least 2 minority samples, got {count}")


class DimensionMismatch(DataError):
    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(f"Expected {expected} features, got {found}")


class LengthMismatch(DataError):
    def __init__(self, left, right):
        super().__init__(f"Length mismatch: {left} != {right}")


class BatchTooSmall(DataError):
    def __init__(self, size):
        self.size = size
        super().__init__(f"Train-mode batch needs at least 2 rows, got {size}")


# ---------------------------------------------------------------------------
# Training divergence (exit code 4)
# ---------------------------------------------------------------------------
class TrainingDivergence(PtsdError):
    """Training produced unusable parameters."""


class NonFiniteLoss(TrainingDivergence):
    def __init__(self, model, step):
        self.model = model
        self.step = step
        super().__init__(
            f"{model} loss became non-finite at step {step}; "
            "the learning rate is probably too high"
        )
