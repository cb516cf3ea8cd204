import numpy as np
from scipy.spatial.distance import cdist

from .base import Classifier

_CHUNK = 2048


def _k_smallest(D, k):
    """Column indices of the k smallest entries per row, ties to the lower index."""
    if k == D.shape[1]:
        return np.argsort(D, axis=1, kind="stable")
    idx = np.argpartition(D, k - 1, axis=1)[:, :k]
    kth = np.take_along_axis(D, idx, axis=1).max(axis=1)
    # argpartition picks arbitrarily among entries equal to the k-th distance
    ambiguous = np.flatnonzero((D <= kth[:, None]).sum(axis=1) > k)
    if ambiguous.size:
        idx[ambiguous] = np.argsort(D[ambiguous], axis=1, kind="stable")[:, :k]
    return idx


class KNNClassifier(Classifier):
    """Majority vote among the k nearest training rows (Euclidean).

    The score is the fraction of +1 labels among the neighbours. Distance
    ties go to the lower training row index; a 0.5 score predicts +1.
    """

    kind = "KNN"
    threshold = 0.5
    needs_both_classes = False

    def __init__(self, k=3):
        super().__init__()
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k

    def get_params(self):
        return {"k": self.k}

    def _fit(self, X, y):
        self.X_ = X.copy()
        self.y_ = y.copy()

    def neighbors(self, X):
        X = self._check_X(X)
        k = min(self.k, self.n_train_)
        out = np.empty((X.shape[0], k), dtype=np.int64)
        for s in range(0, X.shape[0], _CHUNK):
            out[s:s + _CHUNK] = _k_smallest(cdist(X[s:s + _CHUNK], self.X_, "sqeuclidean"), k)
        return out

    def _score(self, X):
        if X.shape[0] == 0:
            return np.empty(0)
        return (self.y_[self.neighbors(X)] == 1).mean(axis=1)
