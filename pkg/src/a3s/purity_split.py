"""Cluster purity screening and oracle-driven splitting.

A cluster first faces a free density test built from its internal pairwise
probabilities; only when that fails does one oracle query probe the pair
(medoid, 0.7-radius sample). Clusters failing the combined test are carved
into oracle-certified pure subclusters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import Relation
from .data import Clustering, Dataset, medoid, pairwise_distances, radius_sample
from .oracle import BudgetExceededError, OracleSession
from .pairwise import PairProbabilityStore

SMALL_CLUSTER = 3  # at or below this size the density statistic degenerates
DEFAULT_TAU = 0.5


@dataclass
class PurityVerdict:
    passed: bool
    density_value: float
    density_passed: bool
    oracle_queries_spent: int


@dataclass
class SubclusterResult:
    subclusters: list[list[int]]
    residual: list[int] | None
    queries_spent: int


def _internal_probabilities(members: np.ndarray, store: PairProbabilityStore) -> np.ndarray:
    """Dense member-by-member probability matrix (store default off-graph)."""
    m = members.size
    pos = {int(s): i for i, s in enumerate(members)}
    probs = np.full((m, m), store.epsilon)
    for i, s in enumerate(members):
        partners, _ = store.partners(int(s))
        for t in partners:
            j = pos.get(int(t))
            if j is not None:
                probs[i, j] = store.get(int(s), int(t))
    np.fill_diagonal(probs, 1.0)
    return probs


def density_value(members, store: PairProbabilityStore, dataset: Dataset) -> float:
    """Mean pairwise probability over each member's far half.

    For each member i, collect the members whose probability with i falls
    strictly below the probability between i and i's half-radius sample; the
    statistic averages the collected probabilities. Uniform internal
    probability leaves nothing below the cut and scores 1.0, as do clusters
    too small for the half-radius construction.
    """
    members = np.sort(np.asarray(members, dtype=np.int64))
    m = members.size
    if m == 0:
        raise ValueError("density of an empty cluster is undefined")
    if m <= SMALL_CLUSTER:
        return 1.0
    probs = _internal_probabilities(members, store)
    dists = pairwise_distances(dataset.features[members], dataset.features[members])
    np.fill_diagonal(dists, -1.0)  # the center ranks first in its own ordering
    order = np.argsort(dists, axis=1, kind="stable")
    half_rank = int(np.ceil(0.5 * m))
    half_pos = order[:, half_rank - 1]
    cutoff = probs[np.arange(m), half_pos]
    below = probs < cutoff[:, None]
    np.fill_diagonal(below, False)
    count = int(below.sum())
    if count == 0:
        return 1.0
    return float(probs[below].sum() / count)


def choose_tau(clustering: Clustering, store: PairProbabilityStore,
               dataset: Dataset) -> float:
    """Density threshold heuristic: mean cluster density minus 0.1."""
    densities = [density_value(members, store, dataset)
                 for members in clustering.clusters.values()
                 if len(members) > SMALL_CLUSTER]
    if not densities:
        return DEFAULT_TAU
    return float(np.clip(np.mean(densities) - 0.1, 0.0, 1.0))


def purity_test(members, tau: float, session: OracleSession,
                store: PairProbabilityStore, dataset: Dataset) -> PurityVerdict:
    """Density screen, falling back to one oracle probe of (medoid, 0.7-radius)."""
    members = np.asarray(members, dtype=np.int64)
    dens = density_value(members, store, dataset)
    if dens > tau:
        return PurityVerdict(True, dens, True, 0)
    center = medoid(members, dataset)
    probe = radius_sample(members, center, 0.7, dataset)
    if probe == center:
        return PurityVerdict(True, dens, False, 0)
    before = session.used
    rel = session.answer(center, probe, context="purity_test")
    return PurityVerdict(rel == Relation.MUST, dens, False, session.used - before)


def subcluster_partition(members, session: OracleSession,
                         dataset: Dataset) -> SubclusterResult:
    """Split a cluster into oracle-certified pure subclusters.

    Members are processed by ascending distance to the medoid; each is queried
    against one representative (the earliest-added member) of every existing
    subcluster in creation order until a must-link lands, else it opens a new
    subcluster. Budget exhaustion returns the partial partition with the
    unprocessed remainder as a single residual group.
    """
    members = np.sort(np.asarray(members, dtype=np.int64))
    if members.size < 2:
        raise ValueError("subcluster partition needs at least 2 members")
    center = medoid(members, dataset)
    d = pairwise_distances(dataset.features[[center]], dataset.features[members])[0]
    ordered = members[np.argsort(d, kind="stable")]

    before = session.used
    subclusters: list[list[int]] = []
    reps: list[int] = []
    for pos, sample in enumerate(ordered):
        sample = int(sample)
        try:
            home = None
            for k, rep in enumerate(reps):
                if session.answer(sample, rep, context="split") == Relation.MUST:
                    home = k
                    break
            if home is None:
                subclusters.append([sample])
                reps.append(sample)
            else:
                subclusters[home].append(sample)
        except BudgetExceededError:
            residual = [int(x) for x in ordered[pos:]]
            return SubclusterResult(subclusters, residual, session.used - before)
    return SubclusterResult(subclusters, None, session.used - before)
