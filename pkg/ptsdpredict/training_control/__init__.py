from ptsdpredict.training_control.callbacks import (
    Callback,
    EarlyStopDecision,
    EarlyStopping,
    EarlyStopState,
    PlateauState,
    ReduceLROnPlateau,
    callbacks_from_config,
    early_stop_step,
    plateau_step,
)
from ptsdpredict.training_control.search import (
    TRIAL_LOG_HEADER,
    SearchResult,
    SearchSpace,
    Trial,
    TrialConfig,
    mlp_trial_evaluator,
    random_search,
)
