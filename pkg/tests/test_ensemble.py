import numpy as np
import pytest

from conftest import blobs

from ptsdpredict.ensemble import (
    PRESETS,
    VotingEnsemble,
    ensemble_history,
    fit_ensemble,
    load_ensemble,
    member_configs,
    normalise_weights,
    save_ensemble,
    soft_vote,
)
from ptsdpredict.errors import ConfigError, EmptyEnsemble, UnknownModel
from ptsdpredict.learners import LogisticHyper, fit_logistic

FAST_MODELS = {
    "logistic": {"epochs": 100},
    "svm": {"epochs": 100},
    "forest": {"n_trees": 5, "max_depth": 3},
    "gbt_xgb": {"n_rounds": 5},
    "gbt_lgbm": {"n_rounds": 5},
    "mlp": {"hidden_widths": [8, 4], "max_epochs": 3, "batch_size": 16},
}


class ConstantMember:
    """Returns fixed probabilities, one per row."""

    kind = "constant"

    def __init__(self, proba):
        self.proba = np.asarray(proba, dtype=np.float64)
        self.n_features_ = 1

    def predict_proba(self, X):
        return self.proba[: X.shape[0]]


X_DUMMY = np.zeros((3, 1))


def test_uniform_soft_vote():
    ensemble = VotingEnsemble([ConstantMember([0.2, 0.6, 1.0]), ConstantMember([0.4, 0.2, 0.0])])
    assert soft_vote(ensemble, X_DUMMY).tolist() == pytest.approx([0.3, 0.4, 0.5])


def test_weighted_soft_vote():
    ensemble = VotingEnsemble(
        [ConstantMember([0.0, 1.0, 0.5]), ConstantMember([1.0, 1.0, 0.5])], weights=[3, 1]
    )
    assert ensemble.weights == [0.75, 0.25]
    assert ensemble.predict_proba(X_DUMMY).tolist() == pytest.approx([0.25, 1.0, 0.5])


def test_vote_stays_within_member_range():
    values = [0.1, 0.7, 0.3]
    members = [ConstantMember([v, v, v]) for v in values]
    proba = VotingEnsemble(members, weights=[1, 2, 3]).predict_proba(X_DUMMY)
    assert np.all(proba >= min(values)) and np.all(proba <= max(values))


def test_vote_of_identical_members_is_exact():
    proba = [0.1 + 0.2, 1.0 / 3.0, 0.7]
    members = [ConstantMember(proba) for _ in range(3)]
    assert VotingEnsemble(members, weights=[0.1, 0.2, 0.7]).predict_proba(X_DUMMY).tolist() == proba


def test_vote_does_not_depend_on_member_order():
    a, b, c = ConstantMember([0.1, 0.9, 0.33]), ConstantMember([0.5, 0.2, 0.71]), ConstantMember([0.8, 0.3, 0.05])
    first = VotingEnsemble([a, b, c], weights=[1, 2, 3]).predict_proba(X_DUMMY)
    second = VotingEnsemble([c, a, b], weights=[3, 1, 2]).predict_proba(X_DUMMY)
    assert first.tolist() == second.tolist()


def test_predict_thresholds_the_vote():
    ensemble = VotingEnsemble([ConstantMember([0.5, 0.49, 0.9]), ConstantMember([0.5, 0.49, 0.9])])
    assert ensemble.predict(X_DUMMY).tolist() == [1, 0, 1]
    assert ensemble.predict(X_DUMMY, threshold=0.95).tolist() == [0, 0, 0]


@pytest.mark.parametrize(
    "weights,n_members,error",
    [
        (None, 1, EmptyEnsemble),
        (None, 0, EmptyEnsemble),
        ([1.0], 2, ConfigError),
        ([1.0, -1.0], 2, ConfigError),
        ([0.0, 0.0], 2, ConfigError),
        ([float("nan"), 1.0], 2, ConfigError),
    ],
)
def test_normalise_weights_errors(weights, n_members, error):
    with pytest.raises(error):
        normalise_weights(weights, n_members)


def test_normalise_weights_sums_to_one():
    assert normalise_weights([1, 1, 2], 3) == [0.25, 0.25, 0.5]
    assert normalise_weights(None, 4) == [0.25] * 4


def test_single_member_ensemble_is_rejected():
    with pytest.raises(EmptyEnsemble):
        VotingEnsemble([ConstantMember([0.5])])


def test_member_configs_presets():
    configs = member_configs("ensemble3", {"forest": {"n_trees": 7}})
    assert [c.kind for c in configs] == ["mlp", "forest", "gbt_xgb"]
    assert configs[1].params == {"n_trees": 7}
    assert len(member_configs("ensemble6")) == 6
    assert [c.kind for c in member_configs(["logistic", "svm"])] == ["logistic", "svm"]
    with pytest.raises(ConfigError):
        member_configs("ensemble4")
    with pytest.raises(UnknownModel):
        member_configs(["logistic", "knn"])


def test_presets_match_model_lists():
    assert set(PRESETS["ensemble3"]) <= set(PRESETS["ensemble6"])
    assert len(set(PRESETS["ensemble6"])) == 6


def test_fit_ensemble_needs_two_members(separable):
    X, y = separable
    with pytest.raises(EmptyEnsemble):
        fit_ensemble(X, y, member_configs(["logistic"]))


def test_fit_ensemble_six_members_save_and_load(separable, tmp_path):
    X, y = separable
    configs = member_configs("ensemble6", FAST_MODELS)
    ensemble = fit_ensemble(X, y, configs, seed=3, weights=[1, 1, 2, 2, 2, 2])
    proba = ensemble.predict_proba(X)
    assert np.mean(ensemble.predict(X) == y) > 0.9
    assert ensemble.member_probabilities(X).shape == (X.shape[0], 6)
    assert ensemble_history(ensemble) is not None

    manifest = save_ensemble(ensemble, tmp_path / "models")
    assert manifest.name == "ensemble.json"
    assert (tmp_path / "models" / "member_0_logistic.json").exists()
    restored = load_ensemble(manifest)
    assert restored.names == ensemble.names
    assert restored.weights == pytest.approx(ensemble.weights)
    assert np.allclose(restored.predict_proba(X), proba)


def test_fit_ensemble_does_not_depend_on_thread_count(separable):
    X, y = separable
    configs = member_configs(["forest", "gbt_xgb", "mlp"], FAST_MODELS)
    serial = fit_ensemble(X, y, configs, seed=8, n_jobs=1)
    threaded = fit_ensemble(X, y, configs, seed=8, n_jobs=3)
    assert np.array_equal(serial.predict_proba(X), threaded.predict_proba(X))


def test_ensemble_of_one_model_twice_matches_the_model():
    X, y = blobs(n_per_class=20, n_features=3, seed=1)
    model = fit_logistic(X, y, LogisticHyper(epochs=50))
    ensemble = VotingEnsemble([model, model], weights=[0.3, 0.7])
    assert ensemble.predict_proba(X).tolist() == model.predict_proba(X).tolist()


def test_ensemble_history_is_none_without_network(separable):
    X, y = separable
    ensemble = fit_ensemble(X, y, member_configs(["logistic", "forest"], FAST_MODELS))
    assert ensemble_history(ensemble) is None
