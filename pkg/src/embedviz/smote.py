"""SMOTE: oversample the minority class by interpolating between minority
samples and their minority-class nearest neighbours."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset, round_half_up
from .errors import InsufficientMinority, PreconditionError, SingleClass

log = logging.getLogger(__name__)

SYNTHETIC_ROW_ID = -1


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0
    target_ratio: float = 1.0

    def validate(self):
        if self.k_neighbors < 1:
            raise PreconditionError("k_neighbors must be >= 1")
        if not 0.0 < self.target_ratio <= 1.0:
            raise PreconditionError("target_ratio must lie in (0, 1]")


def minority_neighbors(Xm, k):
    """Indices of the ``k`` nearest other minority rows, ties to the lower index."""
    D = cdist(Xm, Xm, "sqeuclidean")
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def smote_oversample(train: Dataset, cfg: SmoteConfig | None = None) -> Dataset:
    """Append synthetic minority rows until minority/majority ~= target_ratio.

    Donors are taken round-robin over the minority rows (in row order); each
    donor ``x`` is paired with one of its ``k`` minority neighbours ``x_nn``
    chosen uniformly and a new row ``x + u (x_nn - x)``, ``u ~ U[0, 1)``, is
    emitted. Original rows come first and are untouched; synthetic rows get
    ``row_id == -1``.
    """
    cfg = cfg or SmoteConfig()
    cfg.validate()
    y = train.labels
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == -1))
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("SMOTE needs both classes present")
    minority_label = 1 if n_pos <= n_neg else -1
    n_min, n_maj = min(n_pos, n_neg), max(n_pos, n_neg)
    if n_min < 2:
        raise InsufficientMinority(f"minority class has {n_min} sample(s); SMOTE needs >= 2")

    quota = round_half_up(cfg.target_ratio * n_maj) - n_min
    if quota <= 0:
        return train

    k = cfg.k_neighbors
    if k > n_min - 1:
        warnings.warn(
            f"k_neighbors={k} exceeds minority count - 1; using {n_min - 1}",
            RuntimeWarning,
            stacklevel=2,
        )
        k = n_min - 1

    min_idx = np.flatnonzero(y == minority_label)
    Xm = train.samples[min_idx]
    nbrs = minority_neighbors(Xm, k)

    rng = np.random.default_rng(cfg.seed)
    donors = np.arange(quota) % n_min
    picks = nbrs[donors, rng.integers(k, size=quota)]
    u = rng.random(quota)[:, None]
    base = Xm[donors]
    synth = base + u * (Xm[picks] - base)
    log.info("SMOTE: %d minority + %d synthetic vs %d majority", n_min, quota, n_maj)

    return Dataset(
        np.vstack([train.samples, synth]),
        np.concatenate([y, np.full(quota, minority_label)]),
        train.feature_names,
        np.concatenate([train.row_ids, np.full(quota, SYNTHETIC_ROW_ID)]),
    )
