"""Cluster-pair scoring and candidate selection.

The aggregation probability of two clusters multiplies the pairwise
probabilities over every cross pair (non-kNN pairs contribute the store
default), evaluated as a sum of log odds. Ranking couples that probability
with the entropy drop of the prospective merge; the pair maximizing the
product is queried next.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintStore, Relation
from .data import Clustering, Dataset, pairwise_distances
from .pairwise import PairProbabilityStore, sigmoid

DEFAULT_BATCH = 10
DEFAULT_KNN_KAPPA = 4


@dataclass
class CandidatePair:
    i: int
    j: int
    aggregation_log_odds: float
    aggregation_prob: float
    delta_h: float
    expected_gain: float


def aggregation_log_odds(members_i, members_j, store: PairProbabilityStore) -> float:
    """Sum over all cross pairs of logit P(same class), absent pairs at the default."""
    members_i = np.asarray(members_i, dtype=np.int64)
    members_j = np.asarray(members_j, dtype=np.int64)
    if members_i.size > members_j.size:
        members_i, members_j = members_j, members_i
    other = set(int(x) for x in members_j)
    total = 0.0
    hits = 0
    for s in members_i:
        partners, logits = store.partners(int(s))
        for t, lo in zip(partners, logits):
            if int(t) in other:
                total += float(lo)
                hits += 1
    n_cross = members_i.size * members_j.size
    return total + (n_cross - hits) * store.logit_default


def aggregation_probability(members_i, members_j, store: PairProbabilityStore) -> float:
    """Posterior probability that the two clusters share a dominant class."""
    if len(members_i) == 0 or len(members_j) == 0:
        raise ValueError("aggregation probability needs non-empty clusters")
    return float(sigmoid(aggregation_log_odds(members_i, members_j, store)))


def aggregation_log_odds_knn(members_i, members_j, store: PairProbabilityStore,
                             dataset: Dataset, kappa: int = DEFAULT_KNN_KAPPA) -> float:
    """Log odds restricted to each smaller-cluster sample's kappa nearest
    samples in the larger cluster (outlier-robust variant)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    small = np.asarray(members_i, dtype=np.int64)
    large = np.asarray(members_j, dtype=np.int64)
    if small.size > large.size:
        small, large = large, small
    large = np.sort(large)
    d = pairwise_distances(dataset.features[small], dataset.features[large])
    order = np.argsort(d, axis=1, kind="stable")[:, :kappa]  # ties to lower id
    total = 0.0
    for row, s in enumerate(small):
        for col in order[row]:
            total += store.get_logit(int(s), int(large[col]))
    return total


def aggregation_probability_knn(members_i, members_j, store: PairProbabilityStore,
                                dataset: Dataset, kappa: int = DEFAULT_KNN_KAPPA) -> float:
    return float(sigmoid(aggregation_log_odds_knn(members_i, members_j, store,
                                                  dataset, kappa)))


def delta_entropy(p: int, q: int, n: int) -> float:
    """Entropy drop (nats) from merging clusters of sizes p and q out of n."""
    if p < 1 or q < 1:
        raise ValueError("cluster sizes must be positive")
    if p + q > n:
        raise ValueError("merged size exceeds the sample count")
    s = p + q
    return (s * np.log(s) - p * np.log(p) - q * np.log(q)) / n


def expected_nmi_gain(prob: float, delta_h: float) -> float:
    """Ranking score: aggregation probability times entropy drop (the
    pair-independent normalization constant is dropped)."""
    return prob * delta_h


def check_aggregation_guarantee(t1: float, t2: float, n1: float) -> bool:
    """Sufficient condition under which merging two clusters with a common
    dominant class cannot reduce agreement with the ground truth."""
    t_min = min(t1, t2)
    return t_min >= 0.7 and n1 >= 2.0 * (1.0586 - t_min)


class CandidateIndex:
    """Incrementally maintained cluster-pair scores over the kNN adjacency.

    Cluster ids are retired on merge/split, so a heap entry is stale exactly
    when one of its ids is no longer live; sums for live pairs never change.
    Pairs already known cannot-linked are discarded lazily at pop time.
    """

    def __init__(self, clustering: Clustering, store: PairProbabilityStore,
                 dataset: Dataset | None = None, knn_kappa: int = 0):
        self.store = store
        self.dataset = dataset
        self.knn_kappa = knn_kappa  # 0 = full cross-pair product
        if knn_kappa > 0 and dataset is None:
            raise ValueError("the kNN-restricted variant needs the dataset")
        # adj[a][b] = (sum of cross-pair logits, number of kNN cross pairs)
        self.adj: dict[int, dict[int, tuple[float, int]]] = {c: {} for c in clustering.clusters}
        assign = clustering.assignment
        ps, pt = store.pair_s, store.pair_t
        cs, ct = assign[ps], assign[pt]
        cross = cs != ct
        lo = np.minimum(cs[cross], ct[cross])
        hi = np.maximum(cs[cross], ct[cross])
        stride = int(max(clustering.clusters, default=0)) + 1
        keys = lo * stride + hi
        uniq, inv = np.unique(keys, return_inverse=True)
        sums = np.bincount(inv, weights=store.logits[cross])
        counts = np.bincount(inv)
        self.heap: list[tuple[float, int, int]] = []
        for key, sm, ct_ in zip(uniq, sums, counts):
            a, b = int(key // stride), int(key % stride)
            self.adj[a][b] = (float(sm), int(ct_))
            self.adj[b][a] = (float(sm), int(ct_))
            self._push(a, b, clustering)
        heapq.heapify(self.heap)

    def _log_odds(self, a: int, b: int, clustering: Clustering) -> float:
        if self.knn_kappa > 0:
            return aggregation_log_odds_knn(clustering.members(a), clustering.members(b),
                                            self.store, self.dataset, self.knn_kappa)
        sm, cnt = self.adj[a].get(b, (0.0, 0))
        n_cross = clustering.sizes[a] * clustering.sizes[b]
        return sm + (n_cross - cnt) * self.store.logit_default

    def _push(self, a: int, b: int, clustering: Clustering) -> None:
        if a > b:
            a, b = b, a
        heapq.heappush(self.heap, (-self._log_odds(a, b, clustering), a, b))

    def on_merge(self, a: int, b: int, new_id: int, clustering: Clustering) -> None:
        merged: dict[int, tuple[float, int]] = {}
        for old in (a, b):
            for other, (sm, cnt) in self.adj.pop(old).items():
                if other in (a, b):
                    continue
                cur = merged.get(other, (0.0, 0))
                merged[other] = (cur[0] + sm, cur[1] + cnt)
                del self.adj[other][old]
        self.adj[new_id] = merged
        for other, val in merged.items():
            self.adj[other][new_id] = val
            self._push(new_id, other, clustering)

    def on_split(self, old_id: int, new_ids: list[int], clustering: Clustering) -> None:
        for other in self.adj.pop(old_id):
            del self.adj[other][old_id]
        for nid in new_ids:
            self.adj.setdefault(nid, {})
        assign = clustering.assignment
        new_set = set(new_ids)
        fresh: dict[tuple[int, int], tuple[float, int]] = {}
        for nid in new_ids:
            for s in clustering.members(nid):
                partners, logits = self.store.partners(int(s))
                for t, lo_val in zip(partners, logits):
                    t = int(t)
                    ct = int(assign[t])
                    if ct == nid:
                        continue
                    if ct in new_set and t < s:
                        continue  # both endpoints inside the split; count once
                    key = (nid, ct) if nid < ct else (ct, nid)
                    cur = fresh.get(key, (0.0, 0))
                    fresh[key] = (cur[0] + float(lo_val), cur[1] + 1)
        for (x, y), val in fresh.items():
            self.adj[x][y] = val
            self.adj[y][x] = val
            self._push(x, y, clustering)

    def _is_live(self, a: int, b: int) -> bool:
        return a in self.adj and b in self.adj[a]

    def top_batch(self, clustering: Clustering, constraints: ConstraintStore,
                  batch: int) -> list[tuple[float, int, int]]:
        """Up to `batch` eligible pairs by descending log odds; candidates are
        pushed back so the index survives the call."""
        taken: list[tuple[float, int, int]] = []
        seen: set[tuple[int, int]] = set()
        while self.heap and len(taken) < batch:
            neg, a, b = heapq.heappop(self.heap)
            if (a, b) in seen or not self._is_live(a, b):
                continue
            seen.add((a, b))
            rel = constraints.cluster_relation(clustering.members(a), clustering.members(b))
            if rel == Relation.CANNOT:
                continue  # permanently excluded; drop the entry
            taken.append((neg, a, b))
        for entry in taken:
            heapq.heappush(self.heap, entry)
        return taken

    def scored_batch(self, clustering: Clustering, constraints: ConstraintStore,
                     batch: int = DEFAULT_BATCH) -> list[CandidatePair]:
        """The top-`batch` eligible pairs, fully scored, best probability first."""
        out = []
        for neg, a, b in self.top_batch(clustering, constraints, batch):
            log_odds = -neg
            prob = float(sigmoid(log_odds))
            dh = delta_entropy(clustering.sizes[a], clustering.sizes[b], clustering.n)
            out.append(CandidatePair(a, b, log_odds, prob, dh,
                                     expected_nmi_gain(prob, dh)))
        return out

    @staticmethod
    def best_of(candidates: list[CandidatePair]) -> CandidatePair | None:
        if not candidates:
            return None
        return min(candidates, key=lambda c: (-c.expected_gain,
                                              -c.aggregation_log_odds, c.i, c.j))

    def best(self, clustering: Clustering, constraints: ConstraintStore,
             batch: int = DEFAULT_BATCH) -> CandidatePair | None:
        """Highest expected-gain pair among the top-`batch` by probability."""
        return self.best_of(self.scored_batch(clustering, constraints, batch))

    def random_eligible(self, clustering: Clustering, constraints: ConstraintStore,
                        rng: np.random.Generator) -> CandidatePair | None:
        """Uniform draw over all live cluster pairs not yet known cannot-linked
        (trivial baseline: no adjacency or score intelligence)."""
        ids = sorted(clustering.clusters)
        if len(ids) < 2:
            return None

        def relation(a, b):
            return constraints.cluster_relation(clustering.members(a),
                                                clustering.members(b))

        pair = None
        for _ in range(200):  # rejection sampling; scan fallback below
            i, j = rng.choice(len(ids), size=2, replace=False)
            a, b = ids[min(i, j)], ids[max(i, j)]
            if relation(a, b) != Relation.CANNOT:
                pair = (a, b)
                break
        if pair is None:
            open_pairs = [(a, b) for x, a in enumerate(ids) for b in ids[x + 1:]
                          if relation(a, b) != Relation.CANNOT]
            if not open_pairs:
                return None
            pair = open_pairs[rng.integers(len(open_pairs))]
        a, b = pair
        sm, cnt = self.adj.get(a, {}).get(b, (0.0, 0))
        if self.knn_kappa > 0:
            log_odds = self._log_odds(a, b, clustering)
        else:
            n_cross = clustering.sizes[a] * clustering.sizes[b]
            log_odds = sm + (n_cross - cnt) * self.store.logit_default
        prob = float(sigmoid(log_odds))
        dh = delta_entropy(clustering.sizes[a], clustering.sizes[b], clustering.n)
        return CandidatePair(a, b, log_odds, prob, dh, expected_nmi_gain(prob, dh))

    def neighbors_by_probability(self, cid: int, clustering: Clustering) -> list[tuple[float, int]]:
        """Adjacent clusters of cid as (log odds, other id), best first."""
        out = [(self._log_odds(cid, other, clustering), other)
               for other in self.adj.get(cid, {})]
        out.sort(key=lambda rec: (-rec[0], rec[1]))
        return out


def select_candidate(clustering: Clustering, store: PairProbabilityStore,
                     constraints: ConstraintStore, batch: int = DEFAULT_BATCH,
                     dataset: Dataset | None = None,
                     knn_kappa: int = 0) -> CandidatePair | None:
    """One-shot candidate selection (builds a fresh index; the engine keeps a
    live index instead)."""
    if clustering.k < 2:
        return None
    index = CandidateIndex(clustering, store, dataset=dataset, knn_kappa=knn_kappa)
    return index.best(clustering, constraints, batch)
