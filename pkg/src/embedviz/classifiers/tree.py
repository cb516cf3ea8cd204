"""CART-style decision tree (Gini impurity) and a bagged random forest."""

from __future__ import annotations

import numpy as np

from .base import Classifier


def best_split(X, pos, w, features):
    """Exhaustive search for the lowest weighted child Gini impurity.

    Thresholds are midpoints between consecutive distinct values; the rule is
    ``x <= threshold`` goes left. ``features`` are visited in the given order
    and only a strictly better impurity replaces the incumbent, so ties go to
    the earlier feature, then the lower threshold.

    Returns ``(feature, threshold, impurity)`` or ``None`` if every feature is
    constant on this node.
    """
    W = w.sum()
    PW = np.dot(w, pos)
    best = None
    for f in features:
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        cw = np.cumsum(w[order])[:-1]
        cp = np.cumsum((w * pos)[order])[:-1]
        wl, pl = cw[valid], cp[valid]
        wr, pr = W - wl, PW - pl
        with np.errstate(divide="ignore", invalid="ignore"):
            fl = np.where(wl > 0, pl / wl, 0.0)
            fr = np.where(wr > 0, pr / wr, 0.0)
        impurity = (wl * 2.0 * fl * (1.0 - fl) + wr * 2.0 * fr * (1.0 - fr)) / W
        k = int(np.argmin(impurity))
        if best is None or impurity[k] < best[2]:
            lo = xs[:-1][valid][k]
            hi = xs[1:][valid][k]
            thr = 0.5 * (lo + hi)
            if not lo <= thr < hi:
                thr = lo
            best = (int(f), float(thr), float(impurity[k]))
    return best


class DecisionTreeClassifier(Classifier):
    """Greedy binary tree grown to ``max_depth`` (root at depth 0).

    Leaves store the (weighted) fraction of +1 samples, which is the score.
    With ``max_features`` set, each node examines a random subset of
    features: a random permutation is walked until ``max_features``
    non-constant features have been found, and those are searched in index
    order.
    """

    kind = "DECISION_TREE"
    threshold = 0.5

    def __init__(self, max_depth=5, min_split=2, max_features=None, seed=None):
        super().__init__()
        if max_depth < 0 or min_split < 2:
            raise ValueError("max_depth must be >= 0 and min_split >= 2")
        self.max_depth = max_depth
        self.min_split = min_split
        self.max_features = max_features
        self.seed = seed

    def get_params(self):
        return {"max_depth": self.max_depth, "min_split": self.min_split,
                "max_features": self.max_features, "seed": self.seed}

    def fit(self, X, y, sample_weight=None, rng=None):
        self._sample_weight = sample_weight
        self._rng = rng
        try:
            return super().fit(X, y)
        finally:
            del self._sample_weight, self._rng

    def _candidate_features(self, Xn, rng):
        d = Xn.shape[1]
        if self.max_features is None or self.max_features >= d:
            return range(d)
        chosen = []
        for f in rng.permutation(d):
            if len(chosen) == self.max_features:
                break
            if Xn[:, f].min() != Xn[:, f].max():
                chosen.append(int(f))
        return sorted(chosen)

    def _fit(self, X, y):
        w = self._sample_weight
        w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
        rng = self._rng
        if rng is None and self.max_features is not None:
            # same stream as tree 0 of a forest built with this seed
            rng = np.random.default_rng(np.random.SeedSequence(self.seed).spawn(1)[0])
        pos = (y == 1).astype(np.float64)
        feature, thresh, left, right, value = [], [], [], [], []

        def grow(idx, depth):
            node = len(feature)
            wn, pn = w[idx], pos[idx]
            W = wn.sum()
            frac = float(np.dot(wn, pn) / W) if W > 0 else 0.0
            feature.append(-1)
            thresh.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(frac)
            if depth >= self.max_depth or idx.size < self.min_split or frac in (0.0, 1.0):
                return node
            Xn = X[idx]
            split = best_split(Xn, pn, wn, self._candidate_features(Xn, rng))
            if split is None:
                return node
            f, t, _ = split
            go_left = Xn[:, f] <= t
            feature[node], thresh[node] = f, t
            left[node] = grow(idx[go_left], depth + 1)
            right[node] = grow(idx[~go_left], depth + 1)
            return node

        grow(np.arange(X.shape[0]), 0)
        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(thresh)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.value_ = np.array(value)

    @property
    def n_nodes(self):
        return self.feature_.size

    def apply(self, X):
        """Leaf index reached by each row."""
        X = self._check_X(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature_[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            nd = node[rows]
            go_left = X[rows, self.feature_[nd]] <= self.threshold_[nd]
            node[rows] = np.where(go_left, self.left_[nd], self.right_[nd])
            active = self.feature_[node] >= 0
        return node

    def _score(self, X):
        return self.value_[self.apply(X)]


class RandomForestClassifier(Classifier):
    """Bagged trees with per-split feature subsampling; score is the mean of
    the trees' leaf fractions."""

    kind = "RANDOM_FOREST"
    threshold = 0.5

    def __init__(self, max_depth=5, n_estimators=10, max_features=1, bootstrap=True,
                 min_split=2, seed=0):
        super().__init__()
        if n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        self.max_depth = max_depth
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.min_split = min_split
        self.seed = seed

    def get_params(self):
        return {"max_depth": self.max_depth, "n_estimators": self.n_estimators,
                "max_features": self.max_features, "bootstrap": self.bootstrap,
                "min_split": self.min_split, "seed": self.seed}

    def _fit(self, X, y):
        n = X.shape[0]
        self.trees_ = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_estimators):
            rng = np.random.default_rng(child)
            if self.bootstrap:
                idx = rng.integers(n, size=n)
                # a one-class bootstrap sample still yields a valid (constant) tree
                Xb, yb = X[idx], y[idx]
            else:
                Xb, yb = X, y
            tree = DecisionTreeClassifier(self.max_depth, self.min_split, self.max_features)
            tree.needs_both_classes = False
            self.trees_.append(tree.fit(Xb, yb, rng=rng))

    def _score(self, X):
        return np.mean([t._score(X) for t in self.trees_], axis=0)
