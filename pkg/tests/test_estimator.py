"""The scikit-learn adapter: fit/predict contracts and posterior parity."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import cross_val_score

from qmrdx import Evidence, posterior, sample_cases
from qmrdx.estimator import NoisyOrDiagnosisClassifier


def make_xy(net, n, seed):
    cases = sample_cases(net, n, seed=seed)
    X = np.array([c.finding_states for c in cases], dtype=float)
    y = np.array([net.diseases[c.true_disease].name for c in cases])
    return X, y


@pytest.fixture(scope="module")
def trained(snapshot_net):
    X, y = make_xy(snapshot_net, 400, seed=81)
    names = [f.name for f in snapshot_net.findings]
    model = NoisyOrDiagnosisClassifier(feature_names=names).fit(X, y)
    return model, X, y


class TestFitPredict:
    def test_classes_sorted(self, trained):
        model, _, _ = trained
        assert list(model.classes_) == sorted(model.classes_)

    def test_predict_proba_rows_normalized(self, trained):
        model, X, _ = trained
        proba = model.predict_proba(X[:50])
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    def test_predict_shape_and_labels(self, trained):
        model, X, y = trained
        pred = model.predict(X[:50])
        assert set(pred) <= set(y)
        assert pred.shape == (50,)

    def test_fully_observed_accuracy_beats_priors(self, trained):
        model, X, y = trained
        assert (model.predict(X) == y).mean() > 0.6

    def test_nan_means_unobserved(self, trained, snapshot_net):
        model, _, _ = trained
        row = np.full((1, snapshot_net.n_findings), np.nan)
        proba_blank = model.predict_proba(row)
        np.testing.assert_allclose(proba_blank, [[0.5, 0.5]], atol=1e-9)

    def test_not_fitted_error(self):
        with pytest.raises(NotFittedError):
            NoisyOrDiagnosisClassifier().predict_proba([[1.0]])

    def test_bad_width_rejected(self, trained):
        model, _, _ = trained
        with pytest.raises(ValueError):
            model.predict_proba(np.zeros((2, 3)))


class TestFromNetwork:
    def test_matches_library_posterior(self, snapshot_net, snap_ids):
        model = NoisyOrDiagnosisClassifier.from_network(snapshot_net)
        row = np.full((1, snapshot_net.n_findings), np.nan)
        row[0, snap_ids["sharp"]] = 1.0
        proba = model.predict_proba(row)[0]
        want = posterior(
            snapshot_net, Evidence(frozenset({snap_ids["sharp"]}))
        ).probs
        np.testing.assert_allclose(proba, want, atol=0)

    def test_negative_evidence(self, snapshot_net, snap_ids):
        model = NoisyOrDiagnosisClassifier.from_network(snapshot_net)
        row = np.full((1, snapshot_net.n_findings), np.nan)
        row[0, snap_ids["back"]] = 0.0
        row[0, snap_ids["sharp"]] = 1.0
        want = posterior(
            snapshot_net,
            Evidence(frozenset({snap_ids["sharp"]}), frozenset({snap_ids["back"]})),
        ).probs
        np.testing.assert_allclose(model.predict_proba(row)[0], want, atol=0)


class TestSklearnContract:
    def test_get_set_params_and_clone(self):
        model = NoisyOrDiagnosisClassifier(prior_mode="empirical")
        assert model.get_params()["prior_mode"] == "empirical"
        cloned = clone(model)
        assert cloned.get_params() == model.get_params()

    def test_cross_validation_runs(self, snapshot_net):
        X, y = make_xy(snapshot_net, 200, seed=82)
        names = [f.name for f in snapshot_net.findings]
        scores = cross_val_score(
            NoisyOrDiagnosisClassifier(feature_names=names), X, y, cv=3
        )
        assert scores.shape == (3,)
        assert scores.mean() > 0.5
