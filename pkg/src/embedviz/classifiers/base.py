from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, PreconditionError, SingleClass


def check_Xy(X, y, need_both=True):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise PreconditionError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise PreconditionError("training data must be non-empty with d >= 1")
    if np.any((y != 1) & (y != -1)):
        raise PreconditionError("labels must be -1 or +1")
    if need_both and (np.all(y == 1) or np.all(y == -1)):
        raise SingleClass("training data must contain both classes")
    return X, y.astype(np.int64)


class Classifier:
    """Common fit / predict / predict_score surface.

    ``predict`` is +1 exactly where ``predict_score >= threshold``; subclasses
    implement ``_fit`` and ``_score``.
    """

    kind = None
    threshold = 0.5
    needs_both_classes = True

    def __init__(self):
        self.d_ = None
        self.n_train_ = None
        self.converged_ = True

    def fit(self, X, y):
        X, y = check_Xy(X, y, self.needs_both_classes)
        self.n_train_, self.d_ = X.shape
        self._fit(X, y)
        return self

    def _check_X(self, X):
        if self.d_ is None:
            raise PreconditionError(f"{type(self).__name__} is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1) if X.size == self.d_ else X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[1] != self.d_:
            raise DimensionMismatch(f"model was trained on d={self.d_}, got input with shape {X.shape}")
        return X

    def predict_score(self, X) -> np.ndarray:
        return self._score(self._check_X(X))

    def predict(self, X) -> np.ndarray:
        return np.where(self.predict_score(X) >= self.threshold, 1, -1)

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({params})"

    def get_params(self):
        return {}
