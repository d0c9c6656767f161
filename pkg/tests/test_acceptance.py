"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line. Run with `pytest -s tests/test_acceptance.py -v`.

Criteria rest on property checks against independent brute-force
implementations plus synthetic desk-scale experiments; the headline numbers
of the original large-scale image benchmarks are out of reproduction scope.
"""

import itertools
import resource
import time
from collections import deque
from fractions import Fraction

import numpy as np
import pytest

from a3s import (Clustering, ConstraintStore, Dataset, Engine, Relation,
                 SessionConfig, SimulatedOracle, aggregation_probability,
                 aggregation_probability_knn, ari, check_aggregation_guarantee,
                 nmi, purity, resume_session)
from a3s.engine import read_oracle_records
from a3s.synthetic import make_blobs

from conftest import store_from_probs
from oracles import (brute_aggregation, brute_aggregation_knn, brute_ari,
                     brute_closure, brute_nmi, brute_purity)


def report(criterion: str, passed: bool, detail: str = ""):
    tag = "PASS" if passed else "FAIL"
    print(f"\n[{tag}] {criterion}" + (f" — {detail}" if detail else ""))
    assert passed, f"{criterion}: {detail}"


# -- criterion 1 — incremental closure equals brute-force fixpoint ---------


def state_dict(store):
    return {pair: int(rel) for pair, rel in store.items()}


def exhaustive_transition_check(n=6, max_depth=12):
    """Verify every closure transition reachable by consistent sequences of
    length <= max_depth over n samples.

    The incremental update depends only on (current state, new constraint),
    so checking each distinct transition once covers every sequence.
    """
    pairs = [(s, t) for s in range(n) for t in range(s + 1, n)]
    empty = ConstraintStore()

    def key_of(store):
        return tuple(sorted((s, t, int(r)) for (s, t), r in store.items()))

    seen = {key_of(empty): 0}
    queue = deque([(empty, 0)])
    transitions = 0
    mismatches = 0
    while queue:
        store, depth = queue.popleft()
        if depth >= max_depth:
            continue
        base = [(s, t, r) for (s, t), r in store.items()]
        for s, t in pairs:
            existing = store.query_state(s, t)
            for rel in (Relation.MUST, Relation.CANNOT):
                if existing != Relation.UNKNOWN and existing != rel:
                    continue  # would be an inconsistent sequence
                nxt = store.copy()
                nxt.add_constraint(s, t, rel)
                transitions += 1
                if existing == rel:
                    # Re-adding a stored fact: the fixpoint is the state itself
                    # (verified when this state was first reached).
                    if state_dict(nxt) != state_dict(store):
                        mismatches += 1
                    continue
                expect = brute_closure(n, base + [(s, t, int(rel))])
                if state_dict(nxt) != expect:
                    mismatches += 1
                    continue
                k = key_of(nxt)
                if k not in seen:
                    seen[k] = depth + 1
                    queue.append((nxt, depth + 1))
    return transitions, len(seen), mismatches


def test_criterion_1_fti_oracle_equivalence():
    started = time.perf_counter()
    transitions, states, mismatches = exhaustive_transition_check(6, 12)

    rng = np.random.default_rng(1)
    random_mismatches = 0
    for _ in range(10_000):
        n = 40
        labels = rng.integers(0, 8, size=n)
        store = ConstraintStore()
        seq = []
        for _ in range(30):
            s, t = rng.choice(n, size=2, replace=False)
            rel = Relation.MUST if labels[s] == labels[t] else Relation.CANNOT
            seq.append((int(s), int(t), int(rel)))
            if store.query_state(s, t) == Relation.UNKNOWN:
                store.add_constraint(int(s), int(t), rel)
        if state_dict(store) != brute_closure(n, seq):
            random_mismatches += 1
    elapsed = time.perf_counter() - started
    report("criterion 1 (FTI oracle equivalence)",
           mismatches == 0 and random_mismatches == 0 and elapsed < 60.0,
           f"{transitions} exhaustive transitions over {states} states, "
           f"10000 random sequences, 0 mismatches, {elapsed:.1f}s")


# -- criterion 2 — aggregation guarantee never hurts -----------------------


def guarantee_instance(rng):
    """Random partition with two clusters sharing dominant class 0 and
    purities >= 0.7; returns (truth, assignment, ids, purities)."""
    k_classes = int(rng.integers(3, 10))
    p = int(rng.integers(4, 40))
    q = int(rng.integers(4, 40))
    rest = int(rng.integers(max(k_classes, 20), 430))
    n = p + q + rest

    truth = np.empty(n, dtype=np.int64)
    assign = np.empty(n, dtype=np.int64)

    def fill_cluster(start, size, cluster_id):
        dom = int(rng.integers(int(np.ceil(0.7 * size)), size + 1))
        truth[start:start + dom] = 0
        others = size - dom
        for i in range(others):
            truth[start + dom + i] = 1 + (i % (k_classes - 1))
        assign[start:start + size] = cluster_id
        return dom / size

    t1 = fill_cluster(0, p, 9001)
    t2 = fill_cluster(p, q, 9002)
    background = rng.integers(0, k_classes, size=rest)
    truth[p + q:] = background
    assign[p + q:] = background  # pure background clusters
    corrupt = rng.random(rest) < rng.uniform(0.0, 0.15)
    assign[p + q:][corrupt] = rng.integers(0, k_classes, size=int(corrupt.sum()))
    return truth, assign, (9001, 9002), (t1, t2)


def test_criterion_2_theorem_guarantee():
    rng = np.random.default_rng(2)
    violations = 0
    kept = 0
    attempts = 0
    while kept < 1000:
        attempts += 1
        assert attempts < 50_000, "instance generator starved"
        truth_labels, assign, (c1, c2), (t1, t2) = guarantee_instance(rng)
        truth = Clustering(truth_labels)
        clustering = Clustering(assign)
        n1 = nmi(clustering, truth)
        if not check_aggregation_guarantee(t1, t2, n1):
            continue
        kept += 1
        clustering.merge(c1, c2)
        n2 = nmi(clustering, truth)
        if n2 < n1 - 1e-12:
            violations += 1
    report("criterion 2 (aggregation guarantee)", violations == 0,
           f"1000 qualifying instances, {violations} violations")


# -- criterion 3 — metric correctness --------------------------------------


def test_criterion_3_metric_correctness():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 31))
        a = rng.integers(0, int(rng.integers(1, 6)), size=n)
        b = rng.integers(0, int(rng.integers(1, 6)), size=n)
        ca, cb = Clustering(a), Clustering(b)
        worst = max(worst,
                    abs(nmi(ca, cb) - brute_nmi(list(a), list(b))),
                    abs(ari(ca, cb) - brute_ari(list(a), list(b))),
                    abs(purity(ca, cb) - brute_purity(list(a), list(b))))
    degenerate_ok = (
        nmi(Clustering(np.zeros(4, int)), Clustering(np.zeros(4, int))) == 1.0
        and nmi(Clustering(np.zeros(4, int)), Clustering(np.array([0, 0, 1, 1]))) == 0.0
        and ari(Clustering(np.zeros(3, int)), Clustering(np.full(3, 7))) == 1.0)
    report("criterion 3 (metric correctness)", worst < 1e-9 and degenerate_ok,
           f"500 instances, max deviation {worst:.2e}")


# -- criterion 4 — aggregation probability correctness ----------------------


def enumerate_rational_instances():
    """Every cluster-pair shape up to 3x3 over small rational grids."""
    for ni, nj in itertools.product((1, 2, 3), repeat=2):
        cross = ni * nj
        grid = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)) if cross <= 6 \
            else (Fraction(1, 4), Fraction(3, 4))
        for combo in itertools.product(grid, repeat=cross):
            yield ni, nj, combo


def test_criterion_4_aggregation_correctness():
    worst = 0.0
    count = 0
    for ni, nj, combo in enumerate_rational_instances():
        ids_i = list(range(ni))
        ids_j = list(range(ni, ni + nj))
        probs = {}
        it = iter(combo)
        for a in ids_i:
            for b in ids_j:
                probs[(a, b)] = float(next(it))
        store = store_from_probs(ni + nj, probs)
        got = aggregation_probability(ids_i, ids_j, store)
        expect = brute_aggregation(ids_i, ids_j, lambda s, t: store.get(s, t))
        worst = max(worst, abs(got - expect))
        count += 1

    rng = np.random.default_rng(4)
    prop_failures = 0
    knn_worst = 0.0
    for trial in range(10_000):
        ni, nj = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        ids_i = list(range(ni))
        ids_j = list(range(ni, ni + nj))
        probs = {(a, b): float(Fraction(int(rng.integers(1, 16)), 16))
                 for a in ids_i for b in ids_j}
        store = store_from_probs(ni + nj, probs)
        p = aggregation_probability(ids_i, ids_j, store)
        if abs(aggregation_probability(ids_j, ids_i, store) - p) > 1e-12:
            prop_failures += 1
        flipped = store_from_probs(ni + nj, {k: 1 - v for k, v in probs.items()})
        if abs(aggregation_probability(ids_i, ids_j, flipped) - (1 - p)) > 1e-9:
            prop_failures += 1
        key = list(probs)[int(rng.integers(len(probs)))]
        bumped = dict(probs)
        bumped[key] = min(0.9999, bumped[key] + float(rng.uniform(0, 0.2)))
        if aggregation_probability(ids_i, ids_j,
                                   store_from_probs(ni + nj, bumped)) < p - 1e-12:
            prop_failures += 1
        if trial < 500:  # kNN-restricted variant against explicit enumeration
            pts = rng.normal(size=(ni + nj, 2))
            ds = Dataset(pts) if ni + nj >= 2 else None
            if ds is not None:
                kappa = int(rng.integers(1, 4))
                got = aggregation_probability_knn(ids_i, ids_j, store, ds, kappa)
                expect = brute_aggregation_knn(ids_i, ids_j,
                                               lambda s, t: store.get(s, t),
                                               pts, kappa)
                knn_worst = max(knn_worst, abs(got - expect))
    report("criterion 4 (aggregation probability)",
           worst < 1e-12 and knn_worst < 1e-12 and prop_failures == 0,
           f"{count} exact rational instances (max dev {worst:.1e}), "
           f"10000 property trials, kNN variant max dev {knn_worst:.1e}")


# -- criteria 5, 6, 8 — synthetic end-to-end benchmark ----------------------


BENCH_SEEDS = list(range(10))


def bench_dataset(seed):
    return make_blobs(n=1000, k=20, dim=16, noise=0.05, center_scale=30.0,
                      seed=seed)


def bench_config(seed, **kw):
    # Sparse graph plus a high merge threshold forces a heavily over-clustered
    # start (initial NMI ~0.7, fission rate ~13); the kNN-restricted
    # aggregation variant keeps large-fragment scores meaningful there.
    from a3s import InitConfig
    base = dict(budget=600, seed=seed, max_iterations=10_000, neighbors=10,
                knn_kappa=4, init=InitConfig(merge_threshold=0.9))
    base.update(kw)
    return SessionConfig(**base)


@pytest.fixture(scope="module")
def benchmark_runs():
    runs = []
    for seed in BENCH_SEEDS:
        ds = bench_dataset(seed)
        engine = Engine(ds, bench_config(seed))
        started = time.perf_counter()
        engine.run()
        elapsed = time.perf_counter() - started
        pre = engine.metrics_rows[-1]
        engine.refine_outliers(200)
        post = engine.metrics_rows[-1]
        series = [(row["queries_used"], row["nmi"]) for row in engine.metrics_rows]
        runs.append({"elapsed": elapsed, "pre": pre, "post": post,
                     "series": series, "seed": seed})
    return runs


def crossing(series, target):
    for queries, value in series:
        if value >= target:
            return queries
    return None


def test_criterion_5_end_to_end_benchmark(benchmark_runs):
    med = lambda key: float(np.median([r["pre"][key] for r in benchmark_runs]))
    med_time = float(np.median([r["elapsed"] for r in benchmark_runs]))
    nmi_med, ups_med, pur_med = med("nmi"), med("upsilon"), med("purity")
    ok = (nmi_med >= 0.95 and 0.9 <= ups_med <= 1.1 and pur_med >= 0.95
          and med_time < 60.0)
    report("criterion 5 (end-to-end benchmark)", ok,
           f"median over 10 seeds: NMI {nmi_med:.4f}, upsilon {ups_med:.3f}, "
           f"purity {pur_med:.4f}, {med_time:.1f}s/run")


def test_criterion_6_refinement(benchmark_runs):
    reached = sum(r["post"]["nmi"] >= 0.99 for r in benchmark_runs)
    never_decreased = all(r["post"]["nmi"] >= r["pre"]["nmi"] - 1e-12
                          for r in benchmark_runs)
    report("criterion 6 (outlier refinement)", reached >= 8 and never_decreased,
           f"{reached}/10 seeds reached NMI 0.99; no decreases: {never_decreased}")


def test_criterion_8_strategy_dominance(benchmark_runs):
    ratios = []
    for run in benchmark_runs:
        seed = run["seed"]
        a3s_cross = crossing(run["series"], 0.9)
        ds = bench_dataset(seed)
        baseline = Engine(ds, bench_config(seed, budget=3000, strategy="random"))
        baseline.run()
        base_series = [(row["queries_used"], row["nmi"])
                       for row in baseline.metrics_rows]
        base_cross = crossing(base_series, 0.9)
        if base_cross is None:
            base_cross = 3000  # conservative: the true crossing is later
        assert a3s_cross is not None, f"seed {seed}: gain strategy never hit 0.9"
        ratios.append(a3s_cross / base_cross)
    med_ratio = float(np.median(ratios))
    report("criterion 8 (query-strategy dominance)", med_ratio <= 0.5,
           f"median query ratio vs random baseline {med_ratio:.3f}")


# -- criterion 7 — determinism and resume -----------------------------------


def test_criterion_7_determinism_and_resume(tmp_path):
    ds = bench_dataset(0)

    out_a, out_b = tmp_path / "a", tmp_path / "b"
    Engine(ds, bench_config(0, out_dir=str(out_a))).run()
    Engine(ds, bench_config(0, out_dir=str(out_b))).run()
    identical = (out_a / "runlog.jsonl").read_bytes() == \
        (out_b / "runlog.jsonl").read_bytes()

    class Killed(Exception):
        pass

    class DyingOracle:
        def __init__(self, labels, die_after):
            self.inner = SimulatedOracle(labels)
            self.left = die_after

        def answer(self, s, t, context=""):
            if self.left == 0:
                raise Killed
            self.left -= 1
            return self.inner.answer(s, t)

    out_kill = tmp_path / "killed"
    engine = Engine(ds, bench_config(0, out_dir=str(out_kill)),
                    oracle=DyingOracle(ds.labels, 120))
    try:
        engine.run()
        raise AssertionError("expected the kill to interrupt the run")
    except Killed:
        pass
    out_resume = tmp_path / "resumed"
    resumed = resume_session(ds, bench_config(0, out_dir=str(out_resume)),
                             out_kill / "constraints.log",
                             oracle=SimulatedOracle(ds.labels))
    full_assign = np.loadtxt(out_a / "assignment.txt", dtype=int)
    same_final = np.array_equal(resumed.clustering.assignment, full_assign)
    report("criterion 7 (determinism and resume)", identical and same_final,
           f"byte-identical runlogs: {identical}; resume matches: {same_final}")


# -- criterion 9 — scale smoke ----------------------------------------------


def test_criterion_9_scale_smoke():
    ds = make_blobs(n=50_000, k=500, dim=16, noise=0.02, center_scale=120.0,
                    seed=0)
    config = SessionConfig(budget=12_000, seed=0, max_iterations=20_000)
    started = time.perf_counter()
    result = Engine(ds, config).run()
    elapsed = time.perf_counter() - started
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / (1024 ** 2)
    ok = elapsed < 600.0 and peak_gb < 4.0
    report("criterion 9 (scale smoke)", ok,
           f"N=50000, K=500 finished in {elapsed:.0f}s, peak RSS {peak_gb:.2f} GB, "
           f"final k {result.summary['k_final']}, "
           f"NMI {result.summary['final_metrics']['nmi']:.3f}")
