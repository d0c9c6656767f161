"""Calibrated posterior probability that a sample pair shares a class.

Pipeline: pseudo-label the data with k-means, form training pairs from the
kNN graph (target = same pseudo-label), fit a non-increasing isotonic
regressor distance -> probability, and materialize a sparse store over the
kNN pairs. Multi-view datasets fit one regressor per view and fuse the
per-view probabilities with a product-ratio rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .data import Dataset, NeighborGraph

EPSILON = 1e-4  # probability clip bound; keeps log-odds arithmetic finite

DEFAULT_NEIGHBORS = 50


def logit(p):
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


def sigmoid(x):
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def default_pseudo_k(n: int) -> int:
    """Pseudo-label cluster count when unspecified: round(sqrt(N)), >= 2."""
    return max(2, int(round(np.sqrt(n))))


def generate_pseudo_labels(dataset: Dataset, k: int, seed: int,
                           features: np.ndarray | None = None) -> np.ndarray:
    """Seeded k-means pseudo-labels used only to calibrate the regressor."""
    feats = dataset.features if features is None else features
    n = feats.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"pseudo-label k must lie in [1, {n}], got {k}")
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    km = KMeans(n_clusters=k, random_state=seed, n_init=1)
    return km.fit_predict(feats).astype(np.int64)


def build_training_pairs(graph: NeighborGraph, pseudo: np.ndarray,
                         distances: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicated kNN pairs as (distance, same-pseudo-label target) arrays.

    `distances` overrides the graph's own distances (used per view, where the
    pair set comes from the base features but distances are view-specific).
    """
    pseudo = np.asarray(pseudo)
    if pseudo.shape[0] != graph.n_samples:
        raise ValueError("pseudo labels and graph cover different sample counts")
    s, t, d = graph.pairs()
    if distances is not None:
        d = distances
    targets = (pseudo[s] == pseudo[t]).astype(np.float64)
    return d.astype(np.float64), targets


@dataclass
class IsotonicModel:
    """Piecewise-linear non-increasing map distance -> probability.

    Knots are the unique training distances; values are the pool-adjacent-
    violators fit clipped to [epsilon, 1 - epsilon]. Queries interpolate
    linearly between knots and clamp beyond the knot range.
    """

    knots: np.ndarray
    values: np.ndarray
    epsilon: float = EPSILON

    def predict(self, d):
        d_arr = np.asarray(d, dtype=np.float64)
        if np.any(d_arr < 0):
            raise ValueError("distances must be non-negative")
        out = np.interp(d_arr, self.knots, self.values)
        return float(out) if np.isscalar(d) or d_arr.ndim == 0 else out

    def to_table(self) -> str:
        """Two-column text export (knot distance, probability)."""
        lines = [f"{float(k)!r} {float(v)!r}" for k, v in zip(self.knots, self.values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text: str, epsilon: float = EPSILON) -> "IsotonicModel":
        rows = [line.split() for line in text.strip().splitlines()]
        knots = np.array([float(r[0]) for r in rows])
        values = np.array([float(r[1]) for r in rows])
        return cls(knots, values, epsilon)


def _pav_nonincreasing(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted least-squares non-increasing fit (pool adjacent violators)."""
    # Blocks as (mean, weight, count) on a stack; merge while increasing.
    means: list[float] = []
    weights: list[float] = []
    counts: list[int] = []
    for yi, wi in zip(y, w):
        means.append(float(yi))
        weights.append(float(wi))
        counts.append(1)
        while len(means) > 1 and means[-2] < means[-1]:
            m2, w2, c2 = means.pop(), weights.pop(), counts.pop()
            m1, w1, c1 = means.pop(), weights.pop(), counts.pop()
            wt = w1 + w2
            means.append((m1 * w1 + m2 * w2) / wt)
            weights.append(wt)
            counts.append(c1 + c2)
    return np.repeat(means, counts)


def fit_isotonic(distances: np.ndarray, targets: np.ndarray,
                 epsilon: float = EPSILON) -> IsotonicModel:
    """Fit the non-increasing regressor; ties in distance are pre-averaged."""
    distances = np.asarray(distances, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if distances.size == 0:
        raise ValueError("cannot fit on an empty training set")
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    order = np.argsort(distances, kind="stable")
    d_sorted = distances[order]
    y_sorted = targets[order]
    knots, start = np.unique(d_sorted, return_index=True)
    # Per-knot mean target and weight (= multiplicity).
    sums = np.add.reduceat(y_sorted, start)
    weights = np.diff(np.append(start, d_sorted.size)).astype(np.float64)
    fitted = _pav_nonincreasing(sums / weights, weights)
    return IsotonicModel(knots, np.clip(fitted, epsilon, 1.0 - epsilon), epsilon)


def predict_pair_probability(model: IsotonicModel, d) :
    """Probability that a pair at distance d shares a class."""
    return model.predict(d)


def fuse_views(probs, epsilon: float = EPSILON) -> float:
    """Product-ratio fusion of per-view probabilities for one pair."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size < 1:
        raise ValueError("need at least one view probability")
    if np.any((probs <= 0.0) | (probs >= 1.0)):
        raise ValueError("view probabilities must lie strictly inside (0, 1)")
    fused = sigmoid(logit(probs).sum())
    return float(np.clip(fused, epsilon, 1.0 - epsilon))


class PairProbabilityStore:
    """Sparse symmetric map (s, t) -> calibrated P(same class) over kNN pairs.

    Pairs absent from the kNN graph default to `epsilon` ("almost surely
    different"), which keeps every downstream product total. Write-once,
    then read-only.
    """

    def __init__(self, n: int, pair_s: np.ndarray, pair_t: np.ndarray,
                 probs: np.ndarray, epsilon: float = EPSILON):
        self.n = n
        self.epsilon = epsilon
        self.pair_s = np.asarray(pair_s, dtype=np.int64)
        self.pair_t = np.asarray(pair_t, dtype=np.int64)
        self.probs = np.clip(np.asarray(probs, dtype=np.float64), epsilon, 1.0 - epsilon)
        self.logits = logit(self.probs)
        self.logit_default = float(logit(epsilon))
        keys = self.pair_s * n + self.pair_t
        self._index = {int(k): i for i, k in enumerate(keys)}
        # Per-sample adjacency into the pair arrays, for cluster-pair scans.
        order = np.argsort(np.concatenate([self.pair_s, self.pair_t]), kind="stable")
        partners = np.concatenate([self.pair_t, self.pair_s])[order]
        pair_idx = np.tile(np.arange(self.pair_s.size), 2)[order]
        ends = np.searchsorted(np.concatenate([self.pair_s, self.pair_t])[order],
                               np.arange(n + 1))
        self._adj_partners = partners
        self._adj_pair_idx = pair_idx
        self._adj_ends = ends

    def __len__(self) -> int:
        return self.pair_s.size

    def _key(self, s: int, t: int) -> int:
        if s > t:
            s, t = t, s
        return s * self.n + t

    def has_pair(self, s: int, t: int) -> bool:
        return self._key(s, t) in self._index

    def get(self, s: int, t: int) -> float:
        """P(same class) for the pair; epsilon when not a kNN pair."""
        i = self._index.get(self._key(s, t))
        return float(self.probs[i]) if i is not None else self.epsilon

    def get_logit(self, s: int, t: int) -> float:
        i = self._index.get(self._key(s, t))
        return float(self.logits[i]) if i is not None else self.logit_default

    def partners(self, s: int) -> tuple[np.ndarray, np.ndarray]:
        """(partner ids, logits) of every kNN pair containing s."""
        lo, hi = self._adj_ends[s], self._adj_ends[s + 1]
        sl = slice(lo, hi)
        return self._adj_partners[sl], self.logits[self._adj_pair_idx[sl]]


def build_store(graph: NeighborGraph, models: "IsotonicModel | list[IsotonicModel]",
                dataset: Dataset, epsilon: float = EPSILON) -> PairProbabilityStore:
    """Materialize the store over the kNN pairs, fusing views when present."""
    if isinstance(models, IsotonicModel):
        models = [models]
    views = dataset.view_matrices()
    if len(models) != len(views):
        raise ValueError(f"got {len(models)} models for {len(views)} views")
    s, t, d = graph.pairs()
    if len(models) == 1:
        probs = models[0].predict(d)
    else:
        log_odds = np.zeros(s.size, dtype=np.float64)
        for model, feats in zip(models, views):
            diffs = feats[s] - feats[t]
            view_d = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
            log_odds += logit(np.clip(model.predict(view_d), epsilon, 1.0 - epsilon))
        probs = sigmoid(log_odds)
    return PairProbabilityStore(graph.n_samples, s, t, probs, epsilon)


def calibrate(dataset: Dataset, graph: NeighborGraph, seed: int,
              pseudo_k: int | None = None, epsilon: float = EPSILON) -> PairProbabilityStore:
    """Full calibration pipeline: pseudo-labels, per-view isotonic fits, store."""
    views = dataset.view_matrices()
    s, t, _ = graph.pairs()
    models = []
    for feats in views:
        k = pseudo_k if pseudo_k is not None else default_pseudo_k(dataset.n_samples)
        pseudo = generate_pseudo_labels(dataset, k, seed, features=feats)
        diffs = feats[s] - feats[t]
        view_d = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        d, y = build_training_pairs(graph, pseudo, distances=view_d)
        models.append(fit_isotonic(d, y, epsilon))
    return build_store(graph, models, dataset, epsilon)
