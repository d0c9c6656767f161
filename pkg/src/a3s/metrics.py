"""Partition-quality measures: entropy, NMI, ARI, purity, fission rate,
entropy ratio. Natural logarithms throughout (NMI is base-invariant)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Clustering


def _compact(assignment: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary cluster ids to 0..k-1 codes; returns (codes, counts)."""
    _, codes, counts = np.unique(assignment, return_inverse=True, return_counts=True)
    return codes, counts


def _entropy_from_counts(counts: np.ndarray, n: int) -> float:
    p = counts / n
    return float(-(p * np.log(p)).sum())


def entropy(partition: Clustering) -> float:
    """Shannon entropy (nats) of the cluster-size distribution."""
    counts = np.array(list(partition.sizes.values()), dtype=np.float64)
    return _entropy_from_counts(counts, partition.n)


def contingency(a: Clustering, b: Clustering) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint contingency table plus the two marginal count vectors."""
    if a.n != b.n:
        raise ValueError(f"partitions cover different sample counts ({a.n} vs {b.n})")
    ca, counts_a = _compact(a.assignment)
    cb, counts_b = _compact(b.assignment)
    ka, kb = len(counts_a), len(counts_b)
    joint = np.bincount(ca * kb + cb, minlength=ka * kb).reshape(ka, kb)
    return joint, counts_a, counts_b


def mutual_information(a: Clustering, b: Clustering) -> float:
    joint, counts_a, counts_b = contingency(a, b)
    n = a.n
    nz = joint > 0
    pij = joint[nz] / n
    outer = np.outer(counts_a, counts_b)[nz] / (n * n)
    return float((pij * np.log(pij / outer)).sum())


def nmi(a: Clustering, b: Clustering) -> float:
    """2 I(a;b) / (H(a) + H(b)); 1.0 when both partitions are single-cluster,
    0.0 when exactly one of them is."""
    ha, hb = entropy(a), entropy(b)
    if ha + hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    return 2.0 * mutual_information(a, b) / (ha + hb)


def ari(a: Clustering, b: Clustering) -> float:
    """Adjusted Rand index under the permutation model."""
    joint, counts_a, counts_b = contingency(a, b)
    n = a.n

    def comb2(x):
        return x * (x - 1) / 2.0

    index = comb2(joint.astype(np.float64)).sum()
    sum_a = comb2(counts_a.astype(np.float64)).sum()
    sum_b = comb2(counts_b.astype(np.float64)).sum()
    expected = sum_a * sum_b / comb2(float(n))
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0  # both partitions degenerate in the same way
    return float((index - expected) / (max_index - expected))


def purity(clustering: Clustering, truth: Clustering) -> float:
    """Fraction of samples belonging to their cluster's dominant true class."""
    joint, _, _ = contingency(clustering, truth)
    return float(joint.max(axis=1).sum() / clustering.n)


def cluster_purities(clustering: Clustering, truth: Clustering) -> dict[int, float]:
    """Per-cluster purity: max over classes of the overlap fraction."""
    out = {}
    truth_assign = truth.assignment
    for cid, members in clustering.clusters.items():
        counts = np.bincount(truth_assign[members])
        out[cid] = float(counts.max() / len(members))
    return out


def fission_rate(k: int, true_k: int) -> float:
    if true_k < 1:
        raise ValueError("true class count must be >= 1")
    return k / true_k


def entropy_ratio(omega: Clustering, truth: Clustering) -> float:
    h_truth = entropy(truth)
    if h_truth == 0.0:
        raise ValueError("entropy ratio undefined: ground truth has zero entropy")
    return entropy(omega) / h_truth


def snapshot_metrics(clustering: Clustering, truth_codes: np.ndarray,
                     truth_counts: np.ndarray) -> dict:
    """One metrics row against precompacted truth codes (engine hot path)."""
    n = clustering.n
    kt = truth_counts.size
    row_of = np.full(clustering._next_id, -1, dtype=np.int64)
    counts_a = np.empty(clustering.k, dtype=np.int64)
    for row, (cid, size) in enumerate(clustering.sizes.items()):
        row_of[cid] = row
        counts_a[row] = size
    rows = row_of[clustering.assignment]
    joint = np.bincount(rows * kt + truth_codes, minlength=clustering.k * kt)
    joint = joint.reshape(clustering.k, kt)

    ha = _entropy_from_counts(counts_a, n)
    hb = _entropy_from_counts(truth_counts, n)
    nz = joint > 0
    pij = joint[nz] / n
    outer = np.outer(counts_a, truth_counts)[nz] / (n * n)
    mi = float((pij * np.log(pij / outer)).sum())
    if ha + hb == 0.0:
        nmi_val = 1.0
    elif ha == 0.0 or hb == 0.0:
        nmi_val = 0.0
    else:
        nmi_val = 2.0 * mi / (ha + hb)

    def comb2(x):
        return x * (x - 1) / 2.0

    index = comb2(joint[nz].astype(np.float64)).sum()
    sum_a = comb2(counts_a.astype(np.float64)).sum()
    sum_b = comb2(truth_counts.astype(np.float64)).sum()
    expected = sum_a * sum_b / comb2(float(n))
    max_index = 0.5 * (sum_a + sum_b)
    ari_val = 1.0 if max_index == expected else float((index - expected) / (max_index - expected))

    return {
        "nmi": float(nmi_val),
        "ari": ari_val,
        "purity": float(joint.max(axis=1).sum() / n),
        "upsilon": clustering.k / kt,
        "r": (ha / hb) if hb > 0.0 else None,
    }


@dataclass
class MetricsReport:
    nmi: float
    ari: float
    purity: float
    fission_rate: float
    entropy_ratio: float
    cluster_count: int


def compute_report(clustering: Clustering, truth: Clustering) -> MetricsReport:
    return MetricsReport(
        nmi=nmi(clustering, truth),
        ari=ari(clustering, truth),
        purity=purity(clustering, truth),
        fission_rate=fission_rate(clustering.k, truth.k),
        entropy_ratio=entropy_ratio(omega=clustering, truth=truth),
        cluster_count=clustering.k,
    )
