"""Independent brute-force reference implementations.

Everything here recomputes results from first principles (direct loops,
explicit enumeration, fixpoint iteration) without touching the library code
under test, so a disagreement always implicates the implementation.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np


# -- geometry -----------------------------------------------------------


def brute_knn(features: np.ndarray, m: int):
    """Per-sample neighbor lists via full (distance, id) sorting."""
    n = features.shape[0]
    out = []
    for i in range(n):
        ranked = sorted(
            (math.dist(features[i], features[j]), j) for j in range(n) if j != i
        )
        out.append([j for _, j in ranked[:m]])
    return out


def brute_medoid(members, features) -> int:
    best = None
    for i in sorted(members):
        total = sum(math.dist(features[i], features[j]) for j in members)
        if best is None or total < best[0]:
            best = (total, i)
    return best[1]


def brute_radius_sample(members, center, rho, features) -> int:
    ranked = [center] + sorted(
        (i for i in members if i != center),
        key=lambda i: (math.dist(features[center], features[i]), i),
    )
    rank = math.ceil(rho * len(members))
    return ranked[rank - 1]


# -- partition metrics --------------------------------------------------


def brute_entropy(labels) -> float:
    n = len(labels)
    return -sum((c / n) * math.log(c / n) for c in Counter(labels).values())


def brute_nmi(a, b) -> float:
    n = len(a)
    ha, hb = brute_entropy(a), brute_entropy(b)
    if ha + hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    joint = Counter(zip(a, b))
    ca, cb = Counter(a), Counter(b)
    mi = 0.0
    for (x, y), c in joint.items():
        mi += (c / n) * math.log((c / n) / ((ca[x] / n) * (cb[y] / n)))
    return 2 * mi / (ha + hb)


def brute_ari(a, b) -> float:
    """Pair-counting form: classify every unordered sample pair directly."""
    n = len(a)
    ss = sd = ds = dd = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_a = a[i] == a[j]
            same_b = b[i] == b[j]
            if same_a and same_b:
                ss += 1
            elif same_a:
                sd += 1
            elif same_b:
                ds += 1
            else:
                dd += 1
    num = 2.0 * (ss * dd - sd * ds)
    den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd)
    if den == 0:
        return 1.0
    return num / den


def brute_purity(assignment, truth) -> float:
    clusters = {}
    for i, c in enumerate(assignment):
        clusters.setdefault(c, []).append(truth[i])
    return sum(Counter(v).most_common(1)[0][1] for v in clusters.values()) / len(truth)


# -- constraint closure -------------------------------------------------


class InconsistentConstraints(Exception):
    pass


def brute_closure(n: int, constraints) -> dict:
    """Fixpoint closure over dense boolean matrices.

    must' = must | must @ must, cannot' = cannot | must @ cannot | cannot @ must,
    iterated to stability; raises on any pair flagged both ways or a sample
    cannot-linked to itself.
    """
    must = np.eye(n, dtype=bool)
    cannot = np.zeros((n, n), dtype=bool)
    for s, t, rel in constraints:
        if rel > 0:
            must[s, t] = must[t, s] = True
        else:
            cannot[s, t] = cannot[t, s] = True
    while True:
        new_must = must | (must @ must)
        new_cannot = cannot | (must @ cannot) | (cannot @ must)
        if (new_must == must).all() and (new_cannot == cannot).all():
            break
        must, cannot = new_must, new_cannot
    if (must & cannot).any() or cannot.diagonal().any():
        raise InconsistentConstraints
    state = {}
    for s in range(n):
        for t in range(s + 1, n):
            if must[s, t]:
                state[(s, t)] = 1
            elif cannot[s, t]:
                state[(s, t)] = -1
    return state


def literal_fti_update(state: dict, s: int, t: int, rel: int,
                       order=("s", "t")) -> dict:
    """Verbatim endpoint-sweep transitive update on a dict state matrix."""

    def get(a, b):
        return state.get((min(a, b), max(a, b)), 0)

    def put(a, b, v):
        state[(min(a, b), max(a, b))] = v

    state = dict(state)
    put(s, t, rel)
    endpoints = (s, t) if order == ("s", "t") else (t, s)
    everyone = {x for pair in state for x in pair}
    for i in endpoints:
        ml = {j for j in everyone if j != i and get(i, j) == 1} | {i}
        cl = {j for j in everyone if get(i, j) == -1}
        for p in ml:
            for q in ml:
                if p != q:
                    put(p, q, 1)
        for p in ml:
            for q in cl:
                put(p, q, -1)
    return state


# -- isotonic regression ------------------------------------------------


def brute_monotone_fit(y, w=None):
    """Least-squares non-increasing fit by enumerating contiguous level sets."""
    n = len(y)
    if w is None:
        w = [1.0] * n
    best = None
    for cuts in itertools.product([0, 1], repeat=n - 1):
        blocks = []
        start = 0
        for i, cut in enumerate(cuts):
            if cut:
                blocks.append((start, i + 1))
                start = i + 1
        blocks.append((start, n))
        levels = []
        for lo, hi in blocks:
            wt = sum(w[lo:hi])
            levels.append(sum(w[i] * y[i] for i in range(lo, hi)) / wt)
        if any(levels[i] < levels[i + 1] for i in range(len(levels) - 1)):
            continue
        sse = sum(
            w[i] * (y[i] - levels[bi]) ** 2
            for bi, (lo, hi) in enumerate(blocks)
            for i in range(lo, hi)
        )
        fitted = [levels[bi] for bi, (lo, hi) in enumerate(blocks) for _ in range(lo, hi)]
        if best is None or sse < best[0] - 1e-12:
            best = (sse, fitted)
    return best[1]


# -- aggregation probability --------------------------------------------


def brute_aggregation(members_i, members_j, prob_of) -> float:
    """Direct product-ratio evaluation; prob_of(s, t) supplies each factor."""
    log_p = 0.0
    log_q = 0.0
    for s in members_i:
        for t in members_j:
            p = prob_of(s, t)
            log_p += math.log(p)
            log_q += math.log(1.0 - p)
    m = max(log_p, log_q)
    return math.exp(log_p - m) / (math.exp(log_p - m) + math.exp(log_q - m))


def brute_aggregation_knn(members_i, members_j, prob_of, features, kappa) -> float:
    small, large = sorted((list(members_i), list(members_j)), key=len)
    log_p = 0.0
    log_q = 0.0
    for s in small:
        ranked = sorted(large, key=lambda t: (math.dist(features[s], features[t]), t))
        for t in ranked[:kappa]:
            p = prob_of(s, t)
            log_p += math.log(p)
            log_q += math.log(1.0 - p)
    m = max(log_p, log_q)
    return math.exp(log_p - m) / (math.exp(log_p - m) + math.exp(log_q - m))


def brute_delta_entropy_from_partition(p: int, q: int, n: int) -> float:
    """H(before) - H(after) on explicit partitions containing the two clusters."""
    rest = n - p - q
    before = [p, q] + [1] * rest
    after = [p + q] + [1] * rest
    h = lambda sizes: -sum((s / n) * math.log(s / n) for s in sizes)
    return h(before) - h(after)


def brute_density(members, prob_of, dist_of) -> float:
    """Literal far-half statistic with every w(i) materialized."""
    members = sorted(members)
    m = len(members)
    if m <= 3:
        return 1.0
    num = 0.0
    den = 0
    for i in members:
        ranked = [i] + sorted((j for j in members if j != i),
                              key=lambda j: (dist_of(i, j), j))
        half = ranked[math.ceil(0.5 * m) - 1]
        cut = prob_of(i, half)
        w_i = [j for j in members if j != i and prob_of(i, j) < cut]
        num += sum(prob_of(i, j) for j in w_i)
        den += len(w_i)
    return 1.0 if den == 0 else num / den


def brute_greedy_merge(n: int, prob_of, threshold: float):
    """Greedy highest-probability agglomeration from singletons, O(n^4)."""
    clusters = {i: [i] for i in range(n)}
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(sorted(clusters), 2):
            p = brute_aggregation(clusters[a], clusters[b],
                                  lambda s, t: prob_of(s, t))
            if best is None or p > best[0] + 1e-15 or (
                    abs(p - best[0]) <= 1e-15 and (a, b) < best[1:]):
                best = (p, a, b)
        if best is None or best[0] <= threshold:
            break
        _, a, b = best
        clusters[min(a, b)] = clusters[a] + clusters[b]
        del clusters[max(a, b)]
    assignment = [0] * n
    for cid, mem in clusters.items():
        for i in mem:
            assignment[i] = cid
    return assignment
