"""Dataset container, cluster partition, and the geometric primitives
(exact kNN graph, medoid, quantile-radius sample) shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# All distance/rank ties break toward the lower sample id so that runs
# are reproducible regardless of input ordering.


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus optional ground-truth labels / display assets / extra views.

    Labels are only ever consumed by the simulated oracle and the evaluation
    metrics; the engine itself never looks at them.
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    assets: list[str] | None = None
    views: list[np.ndarray] | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n, d = feats.shape
        if n < 2 or d < 1:
            raise ValueError(f"need N >= 2 and D >= 1, got N={n}, D={d}")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite entries")
        object.__setattr__(self, "features", feats)

        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValueError(f"labels must have length {n}")
            if labels.min() < 0:
                raise ValueError("labels must be non-negative integers")
            object.__setattr__(self, "labels", labels)
        if self.assets is not None and len(self.assets) != n:
            raise ValueError(f"assets must have length {n}")
        if self.views is not None:
            views = []
            for v, view in enumerate(self.views):
                view = np.asarray(view, dtype=np.float64)
                if view.ndim != 2 or view.shape[0] != n:
                    raise ValueError(f"view {v} must have {n} rows")
                if not np.all(np.isfinite(view)):
                    raise ValueError(f"view {v} contains non-finite entries")
                views.append(view)
            object.__setattr__(self, "views", views)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    def view_matrices(self) -> list[np.ndarray]:
        """Feature matrices to calibrate on: the views when present, else [features]."""
        return self.views if self.views else [self.features]


class Clustering:
    """A partition of sample ids 0..N-1 into disjoint clusters.

    Cluster ids are opaque ints; merge/split retire the ids of the clusters
    they consume and mint fresh ones, so downstream caches keyed by cluster
    id invalidate naturally.
    """

    def __init__(self, assignment: np.ndarray):
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.ndim != 1:
            raise ValueError("assignment must be 1-D")
        self.n = assignment.shape[0]
        self.assignment = assignment.copy()
        self.clusters: dict[int, np.ndarray] = {}
        for cid in np.unique(assignment):
            self.clusters[int(cid)] = np.flatnonzero(assignment == cid)
        self.sizes: dict[int, int] = {c: len(m) for c, m in self.clusters.items()}
        self._next_id = max(self.clusters) + 1 if self.clusters else 0

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "Clustering":
        return cls(np.asarray(labels, dtype=np.int64))

    @classmethod
    def singletons(cls, n: int) -> "Clustering":
        return cls(np.arange(n, dtype=np.int64))

    @property
    def k(self) -> int:
        return len(self.clusters)

    def members(self, cid: int) -> np.ndarray:
        return self.clusters[cid]

    def merge(self, a: int, b: int) -> int:
        """Replace clusters a and b with their union under a fresh id."""
        if a == b:
            raise ValueError("cannot merge a cluster with itself")
        if a not in self.clusters or b not in self.clusters:
            raise KeyError(f"unknown cluster id in merge({a}, {b})")
        new_id = self._next_id
        self._next_id += 1
        union = np.concatenate([self.clusters.pop(a), self.clusters.pop(b)])
        union.sort()
        self.clusters[new_id] = union
        self.sizes[new_id] = self.sizes.pop(a) + self.sizes.pop(b)
        self.assignment[union] = new_id
        return new_id

    def split(self, cid: int, parts: list[np.ndarray]) -> list[int]:
        """Replace cluster cid with the given disjoint parts (fresh ids)."""
        if cid not in self.clusters:
            raise KeyError(f"unknown cluster id {cid}")
        members = self.clusters[cid]
        merged = np.sort(np.concatenate([np.asarray(p, dtype=np.int64) for p in parts]))
        if len(merged) != len(members) or not np.array_equal(merged, members):
            raise ValueError("split parts do not partition the cluster members")
        del self.clusters[cid]
        del self.sizes[cid]
        new_ids = []
        for part in parts:
            part = np.sort(np.asarray(part, dtype=np.int64))
            nid = self._next_id
            self._next_id += 1
            self.clusters[nid] = part
            self.sizes[nid] = len(part)
            self.assignment[part] = nid
            new_ids.append(nid)
        return new_ids

    def validate(self) -> None:
        """Assert the partition invariants (used by tests and debug runs)."""
        total = sum(self.sizes.values())
        if total != self.n:
            raise AssertionError(f"sizes sum to {total}, expected {self.n}")
        seen = np.zeros(self.n, dtype=bool)
        for cid, members in self.clusters.items():
            if len(members) == 0:
                raise AssertionError(f"empty cluster {cid} retained")
            if seen[members].any():
                raise AssertionError("clusters overlap")
            seen[members] = True
            if not np.all(self.assignment[members] == cid):
                raise AssertionError("assignment inconsistent with cluster map")
        if not seen.all():
            raise AssertionError("partition does not cover all samples")


@dataclass
class NeighborGraph:
    """Exact kNN lists: for each sample, its M nearest neighbors sorted by
    ascending Euclidean distance (ties toward the lower sample id)."""

    neighbor_ids: np.ndarray  # (N, M) int64
    neighbor_dists: np.ndarray  # (N, M) float64
    _pairs: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def n_samples(self) -> int:
        return self.neighbor_ids.shape[0]

    @property
    def m(self) -> int:
        return self.neighbor_ids.shape[1]

    def pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Deduplicated undirected kNN pairs as (s, t, distance) with s < t."""
        if self._pairs is None:
            n, m = self.neighbor_ids.shape
            src = np.repeat(np.arange(n, dtype=np.int64), m)
            dst = self.neighbor_ids.reshape(-1)
            dist = self.neighbor_dists.reshape(-1)
            lo = np.minimum(src, dst)
            hi = np.maximum(src, dst)
            key = lo * n + hi
            _, idx = np.unique(key, return_index=True)
            self._pairs = (lo[idx], hi[idx], dist[idx])
        return self._pairs


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between rows of a and rows of b."""
    a2 = np.einsum("ij,ij->i", a, a)
    b2 = np.einsum("ij,ij->i", b, b)
    sq = a2[:, None] + b2[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def build_neighbor_graph(dataset: Dataset, m: int, block: int = 1024) -> NeighborGraph:
    """Exact kNN graph via blocked all-pairs distances.

    Ranking happens on squared distances (monotone, one less pass over the
    block buffer); within a block we argpartition for the M+1 smallest entries
    and repair the boundary when equal values straddle it, so the result is
    identical to a full (distance, id) lexicographic sort.
    """
    feats = dataset.features
    n = feats.shape[0]
    if m <= 0:
        raise ValueError("neighbor count must be positive")
    if m >= n:
        raise ValueError(f"neighbor count must satisfy M < N (M={m}, N={n})")

    k_sel = m + 1  # self rides along and is dropped at the end
    out_ids = np.empty((n, m), dtype=np.int64)
    out_dists = np.empty((n, m), dtype=np.float64)
    y2 = np.einsum("ij,ij->i", feats, feats)
    buf = np.empty((min(block, n), n), dtype=np.float64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        b = stop - start
        d = buf[:b]
        np.dot(feats[start:stop], feats.T, out=d)
        d *= -2.0
        d += y2[start:stop, None]
        d += y2[None, :]
        np.maximum(d, 0.0, out=d)
        rows = np.arange(b)
        d[rows, np.arange(start, stop)] = -1.0  # sentinel: self sorts first
        cand = np.argpartition(d, k_sel - 1, axis=1)[:, :k_sel]
        cand_d = d[rows[:, None], cand]
        boundary = cand_d.max(axis=1)
        inside = (cand_d == boundary[:, None]).sum(axis=1)
        total = (d == boundary[:, None]).sum(axis=1)
        for r in np.flatnonzero(total > inside):
            # Equal values straddle the partition boundary: rebuild the
            # candidate set as strict-closers plus the lowest-id ties.
            bv = boundary[r]
            strict = np.flatnonzero(d[r] < bv)
            ties = np.flatnonzero(d[r] == bv)[: k_sel - len(strict)]
            cand[r, : len(strict)] = strict
            cand[r, len(strict):] = ties
        cand.sort(axis=1)  # ascending id, so the stable sort below breaks ties by id
        cand_d = d[rows[:, None], cand]
        order = np.argsort(cand_d, axis=1, kind="stable")
        ordered = cand[rows[:, None], order]
        out_ids[start:stop] = ordered[:, 1:]
        np.sqrt(cand_d[rows[:, None], order][:, 1:],
                out=out_dists[start:stop])
    return NeighborGraph(out_ids, out_dists)


def medoid(members, dataset: Dataset) -> int:
    """The member minimizing the summed Euclidean distance to the others."""
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise ValueError("medoid of an empty cluster is undefined")
    if members.size == 1:
        return int(members[0])
    pts = dataset.features[members]
    sums = pairwise_distances(pts, pts).sum(axis=1)
    # argmin on the id-sorted member list breaks distance ties by lower id
    order = np.argsort(members, kind="stable")
    best = order[np.argmin(sums[order])]
    return int(members[best])


def radius_sample(members, center: int, rho: float, dataset: Dataset) -> int:
    """The member at rank ceil(rho * |members|) of the center's ascending
    distance ordering (rank 1 is the center itself)."""
    members = np.asarray(members, dtype=np.int64)
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if center not in members:
        raise ValueError(f"center {center} is not a cluster member")
    rank = int(np.ceil(rho * members.size))
    if rank <= 1:
        return int(center)
    others = np.sort(members[members != center])
    d = pairwise_distances(dataset.features[[center]], dataset.features[others])[0]
    order = np.argsort(d, kind="stable")  # ties to the lower id via the pre-sort
    return int(others[order[rank - 2]])
