"""scikit-learn adapter around the network and its posterior.

Fitting estimates the noisy-OR edge probabilities from labeled cases
(rows of finding states, one disease label each); prediction runs the
exact posterior per row. Finding states are 1 (present), 0 (absent), or
NaN (never observed), so partially observed rows are first-class. The
usual estimator contract (``get_params``/``set_params``, ``classes_``,
clonability) is honored so the model drops into pipelines and
cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .inference import Evidence, posterior
from .network import DialogueCase, QmrNetwork, build_network_from_cases


class NoisyOrDiagnosisClassifier(BaseEstimator, ClassifierMixin):
    """Diagnosis as a classifier over partially observed binary findings.

    Parameters
    ----------
    prior_mode:
        "uniform" or "empirical" disease priors, estimated at fit time.
    feature_names:
        Optional finding names (defaults to ``finding_0`` ... style names).
    """

    def __init__(self, prior_mode: str = "uniform", feature_names=None):
        self.prior_mode = prior_mode
        self.feature_names = feature_names

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array of finding states")
        y = np.asarray(y)
        if len(y) != X.shape[0]:
            raise ValueError("X and y disagree on the number of cases")
        names = self._feature_names(X.shape[1])
        cases = []
        for row, label in zip(X, y):
            recorded = {
                names[i]: bool(row[i]) for i in range(len(names)) if not np.isnan(row[i])
            }
            cases.append(DialogueCase(str(label), recorded, {}))
        self.network_ = build_network_from_cases(cases, prior_mode=self.prior_mode)
        self.classes_ = np.array(sorted({str(label) for label in y}))
        self._class_rows = np.array(
            [self.network_.disease_id(name) for name in self.classes_]
        )
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_network(cls, net: QmrNetwork) -> "NoisyOrDiagnosisClassifier":
        """Wrap an existing network (e.g. loaded from a file) as a fitted model."""
        model = cls(feature_names=[f.name for f in net.findings])
        model.network_ = net
        model.classes_ = np.array([d.name for d in net.diseases])
        model._class_rows = np.arange(net.n_diseases)
        model.n_features_in_ = net.n_findings
        return model

    def _feature_names(self, n_features: int) -> list[str]:
        if self.feature_names is not None:
            if len(self.feature_names) != n_features:
                raise ValueError("feature_names length does not match X")
            return [str(n) for n in self.feature_names]
        width = len(str(max(n_features - 1, 0)))
        return [f"finding_{i:0{width}d}" for i in range(n_features)]

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise NotFittedError("fit the classifier (or use from_network) first")

    def _row_evidence(self, row) -> Evidence:
        names = self._feature_names(self.n_features_in_)
        pos, neg = set(), set()
        for i, value in enumerate(row):
            if np.isnan(value):
                continue
            if not self.network_.has_finding(names[i]):
                continue  # finding never seen positive at fit time
            fid = self.network_.finding_id(names[i])
            (pos if value else neg).add(fid)
        return Evidence(frozenset(pos), frozenset(neg))

    def predict_proba(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(f"X must have {self.n_features_in_} columns")
        out = np.empty((X.shape[0], len(self.classes_)))
        for r, row in enumerate(X):
            post = posterior(self.network_, self._row_evidence(row))
            out[r] = post.probs[self._class_rows]
        return out

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]
