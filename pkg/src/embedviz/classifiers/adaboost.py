import numpy as np

from ..errors import DegenerateError
from .base import Classifier
from .tree import DecisionTreeClassifier

ERROR_CLAMP = 1e-10


def adaboost_stage_weight(error: float) -> float:
    """alpha = 1/2 ln((1 - error) / error); negative for worse-than-chance learners."""
    if not 0.0 < error < 1.0:
        raise DegenerateError(f"weighted error must lie in (0, 1), got {error}")
    return 0.5 * float(np.log((1.0 - error) / error))


class AdaBoostClassifier(Classifier):
    """Discrete AdaBoost over depth-1 Gini stumps.

    Each round fits a stump to the current sample weights, weights it by
    ``adaboost_stage_weight`` of its (clamped) weighted error and reweights
    samples by exp(-alpha y h(x)). Boosting stops early only when a stump is
    perfect. The score is sum(alpha_t h_t(x)).
    """

    kind = "ADABOOST"
    threshold = 0.0

    def __init__(self, n_estimators=50, max_depth=1):
        super().__init__()
        if n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        self.n_estimators = n_estimators
        self.max_depth = max_depth

    def get_params(self):
        return {"n_estimators": self.n_estimators, "max_depth": self.max_depth}

    def _fit(self, X, y):
        n = X.shape[0]
        w = np.full(n, 1.0 / n)
        self.estimators_, self.estimator_weights_, self.estimator_errors_ = [], [], []
        for _ in range(self.n_estimators):
            stump = DecisionTreeClassifier(max_depth=self.max_depth)
            stump.needs_both_classes = False
            stump.fit(X, y, sample_weight=w)
            h = stump.predict(X)
            miss = h != y
            err = float(np.dot(w, miss) / w.sum())
            alpha = adaboost_stage_weight(min(max(err, ERROR_CLAMP), 1.0 - ERROR_CLAMP))
            self.estimators_.append(stump)
            self.estimator_weights_.append(alpha)
            self.estimator_errors_.append(err)
            if err == 0.0:
                break
            w = w * np.exp(-alpha * y * h)
            w /= w.sum()
        self.estimator_weights_ = np.array(self.estimator_weights_)
        self.estimator_errors_ = np.array(self.estimator_errors_)

    def _score(self, X):
        score = np.zeros(X.shape[0])
        for alpha, stump in zip(self.estimator_weights_, self.estimators_):
            score += alpha * np.where(stump._score(X) >= stump.threshold, 1.0, -1.0)
        return score
