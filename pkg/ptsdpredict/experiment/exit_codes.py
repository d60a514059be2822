from enum import IntEnum

from ptsdpredict.errors import ConfigError, DataError, TrainingDivergence


class ExitCodes(IntEnum):
    """Process exit codes of the experiment CLI"""

    SUCCESS = 0
    # Bad config file, flag or preset
    CONFIG_ERROR = 2
    # Unreadable or inconsistent dataset
    DATA_ERROR = 3
    # A learner diverged (non-finite loss)
    TRAINING_DIVERGENCE = 4

    def __str__(self) -> str:
        """Override the str method
        :return: the name of the enum as string
        """
        return self.name

    @classmethod
    def for_error(cls, error: Exception) -> "ExitCodes":
        if isinstance(error, ConfigError):
            return cls.CONFIG_ERROR
        if isinstance(error, DataError):
            return cls.DATA_ERROR
        if isinstance(error, TrainingDivergence):
            return cls.TRAINING_DIVERGENCE
        raise error
