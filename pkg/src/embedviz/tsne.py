"""Exact (O(n^2)) t-SNE producing 2-D embeddings.

Per-sample Gaussian bandwidths are found by bisection on log(sigma) so that
each conditional row has the requested perplexity. Map-point similarities
use the Student-t kernel 1 / (1 + |y_i - y_j|^2) normalized over all
off-diagonal pairs, and the KL divergence between the two is minimized by
momentum gradient descent with early exaggeration and per-coordinate gains.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateRow, NonFinite, PreconditionError

log = logging.getLogger(__name__)

Q_FLOOR = 1e-12

# Rows are calibrated in blocks to bound memory at n in the thousands.
_ROW_BLOCK = 512


class CalibrationWarning(RuntimeWarning):
    """Bisection stopped before reaching the target perplexity."""


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration_factor: float = 12.0
    exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    init_stddev: float = 1e-4
    seed: int = 0
    calibration_tolerance: float = 1e-5
    calibration_max_steps: int = 64
    adaptive_gains: bool = True
    min_gain: float = 0.01

    def validate(self, n: int | None = None) -> None:
        if self.perplexity < 2:
            raise PreconditionError(f"perplexity must be >= 2, got {self.perplexity}")
        if n is not None and self.perplexity > n - 1:
            raise PreconditionError(f"perplexity {self.perplexity} exceeds n - 1 = {n - 1}")
        if self.iterations < 1:
            raise PreconditionError("iterations must be >= 1")
        rates = (
            self.learning_rate,
            self.early_exaggeration_factor,
            self.momentum_initial,
            self.momentum_final,
            self.init_stddev,
            self.calibration_tolerance,
        )
        if min(rates) <= 0:
            raise PreconditionError("all rates must be > 0")
        if self.calibration_max_steps < 1 or self.exaggeration_iters < 0 or self.momentum_switch_iter < 0:
            raise PreconditionError("step counts must be non-negative (max_steps >= 1)")


@dataclass(frozen=True, eq=False)
class ConditionalAffinities:
    """Row-stochastic p_{j|i} (row i, column j) with the bandwidth of each row."""

    p_cond: np.ndarray
    sigmas: np.ndarray
    converged: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class AffinityMatrix:
    p: np.ndarray


@dataclass(frozen=True, eq=False)
class Embedding:
    points: np.ndarray
    final_kl: float
    history: np.ndarray = field(default_factory=lambda: np.empty(0))
    perplexity: float | None = None
    seed: int | None = None


def squared_distances(A) -> np.ndarray:
    """Pairwise squared Euclidean distances via |a|^2 + |b|^2 - 2 a.b,
    clamped at zero, exactly symmetric with a zero diagonal."""
    A = np.asarray(A, dtype=np.float64)
    sq = np.einsum("ij,ij->i", A, A)
    D = sq[:, None] + sq[None, :] - 2.0 * (A @ A.T)
    np.maximum(D, 0.0, out=D)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def _row_perplexity(shifted, inv_two_var):
    """exp(entropy) of Gaussian rows; ``shifted`` is d^2 - min(d^2) per row."""
    w = np.exp(-shifted * inv_two_var[:, None])
    s = w.sum(axis=1)
    p = w / s[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    return np.exp(-plogp.sum(axis=1)), p


def _calibrate_block(D2, perplexity, tol, max_steps):
    """Bisection on log(sigma) for each row of ``D2`` (self-distance excluded).

    Returns (sigmas, probs, converged). Rows that never get within ``tol``
    keep the best sigma seen.
    """
    m = D2.shape[0]
    dmin = D2.min(axis=1)
    dmax = D2.max(axis=1)
    shifted = D2 - dmin[:, None]
    # Smallest positive gap above the nearest neighbour sets the small-sigma end
    # of the bracket, the full spread sets the large end.
    gap = np.where(shifted > 0, shifted, np.inf).min(axis=1)
    spread = dmax - dmin
    uniform = ~np.isfinite(gap)
    gap = np.where(uniform, 1.0, gap)
    spread = np.where(uniform, 1.0, spread)
    lo = 0.5 * np.log(gap) - 5.0
    hi = 0.5 * np.log(spread) + 15.0

    best_sigma = np.exp(0.5 * (lo + hi))
    best_err = np.full(m, np.inf)
    best_p = None
    done = np.zeros(m, dtype=bool)
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        sigma = np.exp(mid)
        perp, p = _row_perplexity(shifted, 0.5 / sigma**2)
        err = np.abs(perp - perplexity)
        better = (err < best_err) & ~done
        best_err = np.where(better, err, best_err)
        best_sigma = np.where(better, sigma, best_sigma)
        best_p = p if best_p is None else np.where(better[:, None], p, best_p)
        done |= best_err <= tol
        if done.all():
            break
        too_wide = perp > perplexity
        hi = np.where(too_wide & ~done, mid, hi)
        lo = np.where(~too_wide & ~done, mid, lo)
    return best_sigma, best_p, best_err <= tol


def _check_row_inputs(D2, perplexity):
    if not np.all(np.isfinite(D2)) or np.any(D2 < 0):
        raise PreconditionError("squared distances must be finite and non-negative")
    if not 1.0 < perplexity <= D2.shape[-1]:
        raise PreconditionError(
            f"perplexity must lie in (1, {D2.shape[-1]}], got {perplexity}"
        )


def calibrate_sigma(sq_distances_row, perplexity: float, tol: float = 1e-5, max_steps: int = 64):
    """Find the Gaussian bandwidth of one row for a target perplexity.

    Parameters
    ----------
    sq_distances_row : array of shape (n - 1,)
        Squared distances from one sample to every other sample.
    perplexity : float
        Target value of 2 ** H(probs), H in bits.

    Returns
    -------
    sigma : float
    probs : ndarray of shape (n - 1,)
        The calibrated conditional row p_{j|i}.
    """
    D2 = np.asarray(sq_distances_row, dtype=np.float64).reshape(1, -1)
    _check_row_inputs(D2, perplexity)
    if not np.any(D2 > 0):
        raise DegenerateRow()
    sigma, probs, ok = _calibrate_block(D2, perplexity, tol, max_steps)
    if not ok[0]:
        warnings.warn(
            f"perplexity calibration did not reach {perplexity} within {tol} "
            f"after {max_steps} steps",
            CalibrationWarning,
            stacklevel=2,
        )
    return float(sigma[0]), probs[0]


def conditional_affinities(X, cfg: TsneConfig) -> ConditionalAffinities:
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 3:
        raise PreconditionError("t-SNE needs at least 3 samples")
    cfg.validate(n)
    D = squared_distances(X)
    offdiag = ~np.eye(n, dtype=bool)
    P = np.zeros((n, n))
    sigmas = np.empty(n)
    converged = np.empty(n, dtype=bool)
    for start in range(0, n, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, n)
        D2 = D[start:stop][offdiag[start:stop]].reshape(stop - start, n - 1)
        zero = np.flatnonzero(~np.any(D2 > 0, axis=1))
        if zero.size:
            raise DegenerateRow(start + int(zero[0]))
        s, p, ok = _calibrate_block(
            D2, cfg.perplexity, cfg.calibration_tolerance, cfg.calibration_max_steps
        )
        P[start:stop][offdiag[start:stop]] = p.ravel()
        sigmas[start:stop] = s
        converged[start:stop] = ok
    if not converged.all():
        warnings.warn(
            f"{int((~converged).sum())} rows did not reach perplexity {cfg.perplexity}",
            CalibrationWarning,
            stacklevel=2,
        )
    return ConditionalAffinities(P, sigmas, converged)


def symmetrize(cond: ConditionalAffinities) -> AffinityMatrix:
    """p_ij = (p_{i|j} + p_{j|i}) / (2n)."""
    C = np.asarray(cond.p_cond, dtype=np.float64)
    n = C.shape[0]
    return AffinityMatrix((C + C.T) / (2.0 * n))


def _map_sq_distances(Y, out=None):
    # Direct differences: exact symmetry and no cancellation for 2-D points.
    n = Y.shape[0]
    if out is None:
        out = np.empty((n, n))
    tmp = np.subtract.outer(Y[:, 0], Y[:, 0])
    np.multiply(tmp, tmp, out=out)
    np.subtract.outer(Y[:, 1], Y[:, 1], out=tmp)
    tmp *= tmp
    out += tmp
    return out


def low_dim_affinities(Y):
    """Student-t similarities of map points; returns ``(q, kernel)``."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] < 2:
        raise PreconditionError("need at least 2 map points")
    if Y.shape[1] == 2:
        D = _map_sq_distances(Y)
    else:
        D = squared_distances(Y)
    D += 1.0
    kernel = np.reciprocal(D, out=D)
    np.fill_diagonal(kernel, 0.0)
    return kernel / kernel.sum(), kernel


def kl_divergence(P, q) -> float:
    """sum over i != j of p_ij log(p_ij / q_ij), natural log.

    Terms with p_ij == 0 contribute nothing; q is floored at 1e-12.
    """
    P = np.asarray(getattr(P, "p", P), dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if P.shape != q.shape:
        raise PreconditionError(f"shape mismatch: P {P.shape} vs q {q.shape}")
    mask = P > 0
    np.fill_diagonal(mask, False)
    p = P[mask]
    return float(np.sum(p * np.log(p / np.maximum(q[mask], Q_FLOOR))))


def tsne_gradient(P, q, kernel, Y) -> np.ndarray:
    """dKL/dY = 4 sum_j (p_ij - q_ij) kernel_ij (y_i - y_j)."""
    P = np.asarray(getattr(P, "p", P), dtype=np.float64)
    W = (P - q) * kernel
    Y = np.asarray(Y, dtype=np.float64)
    return 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)


class _Workspace:
    """Preallocated n x n buffers for the optimization loop."""

    def __init__(self, P):
        n = P.shape[0]
        self.P = P
        self.kernel = np.empty((n, n))
        self.q = np.empty((n, n))
        self.buf = np.empty((n, n))
        pos = P > 0
        self.plogp = float(np.sum(P[pos] * np.log(P[pos])))

    def affinities(self, Y):
        K = _map_sq_distances(Y, out=self.kernel)
        K += 1.0
        np.reciprocal(K, out=K)
        np.fill_diagonal(K, 0.0)
        np.divide(K, K.sum(), out=self.q)

    def kl(self):
        # Same quantity as kl_divergence(P, q); P's diagonal is zero so the
        # floored diagonal of q contributes nothing.
        np.maximum(self.q, Q_FLOOR, out=self.buf)
        np.log(self.buf, out=self.buf)
        return self.plogp - float(np.vdot(self.P, self.buf))

    def gradient(self, Y, exaggeration):
        W = np.multiply(self.P, exaggeration, out=self.buf)
        W -= self.q
        W *= self.kernel
        return 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)


def _optimize(P, cfg: TsneConfig, n: int) -> Embedding:
    rng = np.random.default_rng(cfg.seed)
    Y = rng.normal(0.0, cfg.init_stddev, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    history = np.empty(cfg.iterations)
    ws = _Workspace(P)
    for it in range(cfg.iterations):
        ws.affinities(Y)
        if it > 0:
            history[it - 1] = ws.kl()
        exag = cfg.early_exaggeration_factor if it < cfg.exaggeration_iters else 1.0
        grad = ws.gradient(Y, exag)
        momentum = cfg.momentum_initial if it < cfg.momentum_switch_iter else cfg.momentum_final
        if cfg.adaptive_gains:
            flip = np.sign(grad) != np.sign(update)
            gains = np.where(flip, gains + 0.2, gains * 0.8)
            np.maximum(gains, cfg.min_gain, out=gains)
        update = momentum * update - cfg.learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)
        if not np.all(np.isfinite(Y)):
            raise NonFinite(
                f"map points became non-finite at iteration {it}; lower the learning rate"
            )
        if it % 100 == 0 and it > 0:
            log.debug("iteration %d: KL %.6f", it, history[it - 1])
    del ws
    q, _ = low_dim_affinities(Y)
    final_kl = kl_divergence(P, q)
    history[-1] = final_kl
    return Embedding(Y, final_kl, history, cfg.perplexity, cfg.seed)


def run_tsne(X, cfg: TsneConfig | None = None) -> Embedding:
    """Embed the rows of ``X`` in 2-D. Deterministic for a fixed config.

    ``history[t]`` is the KL divergence (against the un-exaggerated P) after
    update ``t``; ``history[-1] == final_kl``.
    """
    cfg = cfg or TsneConfig()
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 3:
        raise PreconditionError("t-SNE needs at least 3 samples")
    cfg.validate(n)
    P = symmetrize(conditional_affinities(X, cfg)).p
    log.info("t-SNE: n=%d perplexity=%g iterations=%d", n, cfg.perplexity, cfg.iterations)
    # divergence is detected by the finiteness check in the loop
    with np.errstate(over="ignore", invalid="ignore"):
        return _optimize(P, cfg, n)


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def perplexity_sweep(X, cfg: TsneConfig | None = None, values=(5, 30, 50, 100)) -> list[Embedding]:
    """One embedding per perplexity value, each with its own derived seed."""
    cfg = cfg or TsneConfig()
    n = np.asarray(X).shape[0]
    values = list(values)
    for v in values:
        if not 2 <= v <= n - 1:
            raise PreconditionError(f"perplexity {v} outside [2, {n - 1}]")
    return [
        run_tsne(X, replace(cfg, perplexity=float(v), seed=derive_seed(cfg.seed, i)))
        for i, v in enumerate(values)
    ]


def save_embedding_csv(points, labels, path) -> None:
    """Write map points as ``x,y,label`` rows."""
    points = np.asarray(points, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "label"])
        for (x, y), lab in zip(points.tolist(), np.asarray(labels).tolist()):
            w.writerow([repr(x), repr(y), str(int(lab))])
