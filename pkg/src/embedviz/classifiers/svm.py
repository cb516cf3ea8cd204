"""RBF-kernel SVM trained by sequential minimal optimization.

Solves the dual

    min_a  1/2 a^T Q a - sum(a)   s.t.  0 <= a_i <= C,  sum(a_i y_i) = 0,

with Q_ij = y_i y_j exp(-gamma |x_i - x_j|^2). Each step updates the
maximal violating pair (i from I_up, j from I_low) analytically and stops
when the KKT gap m(a) - M(a) drops below ``tol``.
"""

import logging
from collections import OrderedDict

import numpy as np

from .base import Classifier

log = logging.getLogger(__name__)

_TAU = 1e-12
_CACHE_BYTES = 256 * 2**20


def rbf_kernel(A, B, gamma):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sa = np.einsum("ij,ij->i", A, A)
    sb = np.einsum("ij,ij->i", B, B)
    D = sa[:, None] + sb[None, :] - 2.0 * (A @ B.T)
    np.maximum(D, 0.0, out=D)
    return np.exp(-gamma * D)


class _KernelColumns:
    """Kernel columns K[:, i] computed on demand with an LRU cache."""

    def __init__(self, X, gamma):
        self.X = X
        self.gamma = gamma
        self.sq = np.einsum("ij,ij->i", X, X)
        self.cache = OrderedDict()
        self.capacity = max(2, _CACHE_BYTES // (8 * X.shape[0]))

    def __call__(self, i):
        col = self.cache.get(i)
        if col is not None:
            self.cache.move_to_end(i)
            return col
        d = self.sq + self.sq[i] - 2.0 * (self.X @ self.X[i])
        np.maximum(d, 0.0, out=d)
        d[i] = 0.0
        col = np.exp(-self.gamma * d)
        self.cache[i] = col
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return col


class SVMClassifier(Classifier):
    """Soft-margin SVM with an RBF kernel. Score is the signed margin f(x)."""

    kind = "SVM_RBF"
    threshold = 0.0

    def __init__(self, gamma=2.0, C=1.0, tol=1e-3, max_passes=100, max_iter=None):
        super().__init__()
        if gamma <= 0:
            raise ValueError("gamma must be > 0")
        if C <= 0:
            raise ValueError("C must be > 0")
        self.gamma = gamma
        self.C = C
        self.tol = tol
        self.max_passes = max_passes
        self.max_iter = max_iter

    def get_params(self):
        return {"gamma": self.gamma, "C": self.C, "tol": self.tol,
                "max_passes": self.max_passes, "max_iter": self.max_iter}

    def _fit(self, X, y):
        n = X.shape[0]
        C = float(self.C)
        yf = y.astype(np.float64)
        kcol = _KernelColumns(X, self.gamma)
        alpha = np.zeros(n)
        G = -np.ones(n)
        max_iter = self.max_iter if self.max_iter is not None else self.max_passes * n
        converged = False
        it = 0
        while it < max_iter:
            pos_free = alpha < C
            neg_free = alpha > 0
            up = np.where(yf > 0, pos_free, neg_free)
            low = np.where(yf > 0, neg_free, pos_free)
            v = -yf * G
            i = int(np.argmax(np.where(up, v, -np.inf)))
            j = int(np.argmin(np.where(low, v, np.inf)))
            if not (up[i] and low[j]) or v[i] - v[j] < self.tol:
                converged = True
                break
            it += 1
            Ki, Kj = kcol(i), kcol(j)
            ai_old, aj_old = alpha[i], alpha[j]
            if yf[i] != yf[j]:
                quad = max(Ki[i] + Kj[j] + 2.0 * (-Ki[j]), _TAU)
                delta = (-G[i] - G[j]) / quad
                diff = ai_old - aj_old
                ai, aj = ai_old + delta, aj_old + delta
                if diff > 0:
                    if aj < 0:
                        aj, ai = 0.0, diff
                elif ai < 0:
                    ai, aj = 0.0, -diff
                if diff > 0:
                    if ai > C:
                        ai, aj = C, C - diff
                elif aj > C:
                    aj, ai = C, C + diff
            else:
                quad = max(Ki[i] + Kj[j] - 2.0 * Ki[j], _TAU)
                delta = (G[i] - G[j]) / quad
                total = ai_old + aj_old
                ai, aj = ai_old - delta, aj_old + delta
                if total > C:
                    if ai > C:
                        ai, aj = C, total - C
                elif aj < 0:
                    aj, ai = 0.0, total
                if total > C:
                    if aj > C:
                        aj, ai = C, total - C
                elif ai < 0:
                    ai, aj = 0.0, total
            alpha[i], alpha[j] = ai, aj
            # G = Q a - 1 and Q[:, t] = y * y_t * K[:, t]
            G += yf * (yf[i] * (ai - ai_old) * Ki + yf[j] * (aj - aj_old) * Kj)
        if not converged:
            log.warning("SMO stopped after %d iterations without meeting tol=%g", it, self.tol)
        self.converged_ = converged
        self.n_iter_ = it
        self.alpha_ = alpha
        self.y_train_ = y.copy()
        self.rho_ = self._rho(alpha, yf, G, C)
        sv = np.flatnonzero(alpha > 0)
        self.support_ = sv
        self.support_vectors_ = X[sv].copy()
        self.dual_coef_ = alpha[sv] * yf[sv]

    @staticmethod
    def _rho(alpha, yf, G, C):
        yG = yf * G
        at_upper = alpha >= C
        at_lower = alpha <= 0
        free = ~at_upper & ~at_lower
        if free.any():
            return float(yG[free].mean())
        ub_mask = (at_upper & (yf < 0)) | (at_lower & (yf > 0))
        lb_mask = (at_upper & (yf > 0)) | (at_lower & (yf < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        if not np.isfinite(ub + lb):
            return float(ub if np.isfinite(ub) else lb)
        return float(0.5 * (ub + lb))

    def kkt_residual(self) -> float:
        """|sum(alpha_i y_i)| at the stored solution."""
        return float(abs(np.dot(self.alpha_, self.y_train_)))

    def _score(self, X):
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], 4096):
            K = rbf_kernel(X[s:s + 4096], self.support_vectors_, self.gamma)
            out[s:s + 4096] = K @ self.dual_coef_ - self.rho_
        return out
