from ptsdpredict.ensemble.voting import (
    PRESETS,
    MemberConfig,
    VotingEnsemble,
    ensemble_history,
    fit_ensemble,
    load_ensemble,
    member_configs,
    normalise_weights,
    save_ensemble,
    soft_vote,
)
