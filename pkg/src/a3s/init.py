"""Initial clustering with an adaptively discovered cluster count.

The probabilistic method greedily merges the highest-aggregation-probability
cluster pair while it clears a threshold, starting from singletons; samples
that never clear it stay isolated, so noise lands in singleton clusters and
the final count adapts to the data. Conventional algorithms (k-means, Ward
agglomerative) can be substituted, seeded with the adaptive count times a
ratio factor.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import AgglomerativeClustering, KMeans

from .data import Clustering, Dataset
from .pairwise import PairProbabilityStore, logit

DEFAULT_MERGE_THRESHOLD = 0.6

INIT_METHODS = ("probabilistic", "kmeans", "agglomerative")


@dataclass
class InitConfig:
    method: str = "probabilistic"
    merge_threshold: float = DEFAULT_MERGE_THRESHOLD
    k_override: int | None = None
    ratio: float = 1.0

    def __post_init__(self):
        if self.method not in INIT_METHODS:
            raise ValueError(f"unknown init method {self.method!r}")
        if not 0.5 < self.merge_threshold < 1.0:
            raise ValueError("merge_threshold must lie in (0.5, 1)")
        if self.ratio <= 0:
            raise ValueError("ratio must be positive")


def probabilistic_cluster(store: PairProbabilityStore, n: int,
                          merge_threshold: float = DEFAULT_MERGE_THRESHOLD,
                          trace: list | None = None) -> Clustering:
    """Greedy highest-probability agglomeration over the kNN pair graph.

    Clusters are keyed by their minimum sample id. Only kNN-adjacent cluster
    pairs can ever clear the threshold (absent pairs carry the epsilon
    default), so the candidate set stays sparse. `trace` optionally collects
    (a, b, log_odds) per merge for audit.
    """
    thr_log_odds = float(logit(merge_threshold))
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    version: dict[int, int] = dict.fromkeys(range(n), 0)
    adj: dict[int, dict[int, tuple[float, int]]] = {i: {} for i in range(n)}
    for s, t, lo in zip(store.pair_s, store.pair_t, store.logits):
        adj[int(s)][int(t)] = (float(lo), 1)
        adj[int(t)][int(s)] = (float(lo), 1)

    def total_log_odds(a: int, b: int) -> float:
        sm, cnt = adj[a][b]
        return sm + (len(members[a]) * len(members[b]) - cnt) * store.logit_default

    heap = [(-total_log_odds(min(a, b), max(a, b)), min(a, b), max(a, b), 0, 0)
            for a in adj for b in adj[a] if a < b]
    heapq.heapify(heap)

    while heap:
        neg, a, b, va, vb = heapq.heappop(heap)
        if version.get(a) != va or version.get(b) != vb:
            continue
        if -neg <= thr_log_odds:
            break  # heap is ordered; nothing later can qualify
        if trace is not None:
            trace.append((a, b, -neg))
        keep, drop = (a, b) if a < b else (b, a)
        members[keep].extend(members.pop(drop))
        version[keep] += 1
        del version[drop]
        merged = adj.pop(drop)
        kept = adj[keep]
        kept.pop(drop, None)
        for other, (sm, cnt) in merged.items():
            if other == keep:
                continue
            cur = kept.get(other, (0.0, 0))
            kept[other] = (cur[0] + sm, cur[1] + cnt)
            adj[other].pop(drop, None)
        for other in kept:
            adj[other][keep] = kept[other]
            lo_pair = (keep, other) if keep < other else (other, keep)
            heapq.heappush(heap, (-total_log_odds(*lo_pair), *lo_pair,
                                  version[lo_pair[0]], version[lo_pair[1]]))

    assignment = np.empty(n, dtype=np.int64)
    for cid, mem in members.items():
        assignment[mem] = cid
    return Clustering(assignment)


def initialize(dataset: Dataset, store: PairProbabilityStore, config: InitConfig,
               seed: int) -> tuple[Clustering, int]:
    """Produce the initial clustering and the adaptive cluster count."""
    n = dataset.n_samples
    if config.k_override is not None and config.k_override > n:
        raise ValueError(f"k_override {config.k_override} exceeds sample count {n}")
    if config.method == "probabilistic":
        clustering = probabilistic_cluster(store, n, config.merge_threshold)
        return clustering, clustering.k
    if config.k_override is not None:
        k_adaptive = config.k_override
    else:
        k_adaptive = probabilistic_cluster(store, n, config.merge_threshold).k
    target = int(np.clip(round(config.ratio * k_adaptive), 1, n))
    if config.method == "kmeans":
        labels = KMeans(n_clusters=target, random_state=seed, n_init=1).fit_predict(
            dataset.features)
    else:
        labels = AgglomerativeClustering(n_clusters=target, linkage="ward").fit_predict(
            dataset.features)
    return Clustering(np.asarray(labels, dtype=np.int64)), k_adaptive
