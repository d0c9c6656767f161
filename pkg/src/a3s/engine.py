"""End-to-end session orchestration.

One engine owns one session: calibrate pairwise probabilities, build the
initial clustering, then loop — pick the best candidate cluster pair, purity-
test both sides, merge on a must-link medoid answer or split the impure side —
until the query budget, the iteration cap, or the candidate supply runs out.
Optionally spend an extra budget absorbing leftover singletons. Every oracle
answer flows through the constraint closure, and the run log plus constraint
log suffice to resume an interrupted session by replay.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .constraints import ConstraintStore, Relation
from .data import Clustering, Dataset, build_neighbor_graph, medoid
from .init import InitConfig, initialize
from .oracle import BudgetExceededError, Oracle, OracleSession, ReplayOracle, SimulatedOracle
from .pairwise import EPSILON, calibrate
from .purity_split import PurityVerdict, choose_tau, purity_test, subcluster_partition
from .strategy import CandidateIndex

METRICS_COLUMNS = ("queries_used", "k", "nmi", "ari", "purity", "upsilon", "r")


@dataclass
class SessionConfig:
    budget: int = 100
    max_iterations: int | None = None  # None: 4 x initial cluster count
    batch: int = 10
    tau: float | None = None  # None: data-driven threshold
    init: InitConfig = field(default_factory=InitConfig)
    neighbors: int = 50
    knn_kappa: int = 0  # 0: full cross-pair product; >0: kNN-restricted variant
    seed: int = 0
    out_dir: str | None = None
    oracle_mode: str = "simulated"
    refine_budget: int = 0
    strategy: str = "gain"  # gain | random (baseline for harness comparisons)
    epsilon: float = EPSILON
    pseudo_k: int | None = None
    dump_candidates: bool = False  # per-iteration scored-candidate CSV

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.strategy not in ("gain", "random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.oracle_mode not in ("simulated", "interactive"):
            raise ValueError(f"unknown oracle mode {self.oracle_mode!r}")
        if isinstance(self.init, dict):
            self.init = InitConfig(**self.init)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    clustering: Clustering
    runlog: list[dict]
    metrics_rows: list[dict]
    summary: dict


class Engine:
    """Single-session driver; strictly sequential decision loop."""

    def __init__(self, dataset: Dataset, config: SessionConfig,
                 oracle: Oracle | None = None):
        self.dataset = dataset
        self.config = config
        if oracle is None:
            oracle = SimulatedOracle(dataset.labels)
        self.oracle = oracle
        self.constraints = ConstraintStore()
        self.session = OracleSession(oracle, self.constraints, config.budget,
                                     listener=self._on_answer)
        self.runlog: list[dict] = []
        self.metrics_rows: list[dict] = []
        self.truth = Clustering.from_labels(dataset.labels) if dataset.labels is not None else None
        if self.truth is not None:
            _, self._truth_codes, self._truth_counts = np.unique(
                dataset.labels, return_inverse=True, return_counts=True)
        self.clustering: Clustering | None = None
        self.index: CandidateIndex | None = None
        self.tau: float | None = None
        self.trusted: dict[int, PurityVerdict] = {}
        self._medoids: dict[int, int] = {}
        self._rng = np.random.default_rng(config.seed)
        self._constraint_seq = 0
        self._files: dict = {}
        self._stop_reason: str | None = None
        self._initial_k: int | None = None
        self._adaptive_k: int | None = None

    # -- logging ----------------------------------------------------------

    def _open_outputs(self):
        out = self.config.out_dir
        if not out:
            return
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        self._files["runlog"] = open(path / "runlog.jsonl", "w")
        self._files["constraints"] = open(path / "constraints.log", "w")
        self._files["metrics"] = open(path / "metrics.csv", "w")
        self._files["metrics"].write(",".join(METRICS_COLUMNS) + "\n")
        self._files["metrics"].flush()
        if self.config.dump_candidates:
            self._files["candidates"] = open(path / "candidates.csv", "w")
            self._files["candidates"].write("iteration,i,j,prob,delta_h,gain\n")

    def _emit(self, event: dict):
        self.runlog.append(event)
        f = self._files.get("runlog")
        if f:
            f.write(json.dumps(event, sort_keys=True) + "\n")
            f.flush()

    def _write_constraint_line(self, s: int, t: int, rel: Relation, source: str):
        f = self._files.get("constraints")
        if not f:
            self._constraint_seq += 1
            return
        stamp = datetime.now(timezone.utc).isoformat()
        tag = "ML" if rel == Relation.MUST else "CL"
        f.write(f"{self._constraint_seq},{s},{t},{tag},{source},{stamp}\n")
        f.flush()
        self._constraint_seq += 1

    def _on_answer(self, s: int, t: int, rel: Relation, inferred: list, context: str):
        self._write_constraint_line(s, t, rel, "oracle")
        for (a, b, r) in inferred:
            self._write_constraint_line(a, b, r, "inferred")
        self._emit({"event": "query", "s": int(s), "t": int(t),
                    "answer": "must" if rel == Relation.MUST else "cannot",
                    "context": context, "queries_used": self.session.used})

    def _snapshot(self):
        row = {"queries_used": self.session.used, "k": self.clustering.k,
               "nmi": None, "ari": None, "purity": None, "upsilon": None, "r": None}
        if self.truth is not None:
            row.update(metrics_mod.snapshot_metrics(
                self.clustering, self._truth_codes, self._truth_counts))
        self.metrics_rows.append(row)
        self._emit({"event": "snapshot", **row})
        f = self._files.get("metrics")
        if f:
            f.write(",".join("" if row[c] is None else repr(row[c])
                             for c in METRICS_COLUMNS) + "\n")
            f.flush()

    # -- helpers ----------------------------------------------------------

    def _medoid(self, cid: int) -> int:
        cached = self._medoids.get(cid)
        if cached is None:
            cached = medoid(self.clustering.members(cid), self.dataset)
            self._medoids[cid] = cached
        return cached

    def _retire(self, *cids: int):
        for cid in cids:
            self.trusted.pop(cid, None)
            self._medoids.pop(cid, None)

    def _ensure_purity(self, cid: int) -> PurityVerdict:
        cached = self.trusted.get(cid)
        if cached is not None:
            return cached
        verdict = purity_test(self.clustering.members(cid), self.tau,
                              self.session, self.store, self.dataset)
        self._emit({"event": "purity_test", "cluster": int(cid),
                    "passed": verdict.passed, "density": verdict.density_value,
                    "density_passed": verdict.density_passed,
                    "queries_spent": verdict.oracle_queries_spent,
                    "queries_used": self.session.used})
        self._snapshot()
        if verdict.passed:
            self.trusted[cid] = verdict
        return verdict

    def _split(self, cid: int):
        members = self.clustering.members(cid)
        result = subcluster_partition(members, self.session, self.dataset)
        parts = [list(p) for p in result.subclusters]
        if result.residual:
            parts.append(list(result.residual))
        if len(parts) <= 1:
            # Exhaustive must-link pass: the cluster is certified pure as-is.
            if result.residual is None:
                self.trusted[cid] = PurityVerdict(True, 1.0, False,
                                                  result.queries_spent)
            self._emit({"event": "split", "cluster": int(cid), "new": [],
                        "subclusters": parts,
                        "residual": result.residual is not None,
                        "queries_spent": result.queries_spent,
                        "queries_used": self.session.used})
            self._snapshot()
            return
        new_ids = self.clustering.split(cid, [np.array(p, dtype=np.int64) for p in parts])
        self.index.on_split(cid, new_ids, self.clustering)
        self._retire(cid)
        self._emit({"event": "split", "cluster": int(cid),
                    "new": [int(x) for x in new_ids],
                    "subclusters": parts,
                    "residual": result.residual is not None,
                    "queries_spent": result.queries_spent,
                    "queries_used": self.session.used})
        self._snapshot()

    def _merge(self, a: int, b: int, context: str,
               gain: float | None = None) -> int:
        new_id = self.clustering.merge(a, b)
        self.index.on_merge(a, b, new_id, self.clustering)
        self._retire(a, b)
        event = {"event": "merge", "i": int(a), "j": int(b), "new": int(new_id),
                 "context": context, "queries_used": self.session.used}
        if gain is not None:
            event["gain"] = gain
        self._emit(event)
        self._snapshot()
        return new_id

    # -- pipeline ---------------------------------------------------------

    def prepare(self):
        cfg = self.config
        self._open_outputs()
        self.graph = build_neighbor_graph(self.dataset, min(cfg.neighbors,
                                                            self.dataset.n_samples - 1))
        self.store = calibrate(self.dataset, self.graph, cfg.seed,
                               pseudo_k=cfg.pseudo_k, epsilon=cfg.epsilon)
        self.clustering, self._adaptive_k = initialize(self.dataset, self.store,
                                                       cfg.init, cfg.seed)
        self._initial_k = self.clustering.k
        self.tau = cfg.tau if cfg.tau is not None else choose_tau(
            self.clustering, self.store, self.dataset)
        self.index = CandidateIndex(self.clustering, self.store,
                                    dataset=self.dataset, knn_kappa=cfg.knn_kappa)
        if cfg.out_dir:
            np.savetxt(Path(cfg.out_dir) / "initial_assignment.txt",
                       self.clustering.assignment, fmt="%d")
        self._emit({"event": "init", "k": self.clustering.k,
                    "adaptive_k": self._adaptive_k, "tau": self.tau,
                    "queries_used": 0})
        self._snapshot()

    def _next_candidate(self, iteration: int):
        if self.config.strategy == "random":
            return self.index.random_eligible(self.clustering, self.constraints, self._rng)
        scored = self.index.scored_batch(self.clustering, self.constraints,
                                         self.config.batch)
        dump = self._files.get("candidates")
        if dump is not None:
            for c in scored:
                dump.write(f"{iteration},{c.i},{c.j},{c.aggregation_prob!r},"
                           f"{c.delta_h!r},{c.expected_gain!r}\n")
            dump.flush()
        return self.index.best_of(scored)

    def run(self) -> RunResult:
        started = time.perf_counter()
        if self.clustering is None:
            self.prepare()
        cfg = self.config
        max_iter = cfg.max_iterations
        if max_iter is None:
            max_iter = max(1, 4 * self._initial_k)
        self._stop_reason = "iterations"
        for iteration in range(max_iter):
            if self.session.used >= self.session.budget:
                self._stop_reason = "budget"
                break
            cand = self._next_candidate(iteration)
            if cand is None:
                self._stop_reason = "converged"
                break
            try:
                v_i = self._ensure_purity(cand.i)
                v_j = self._ensure_purity(cand.j)
                if v_i.passed and v_j.passed:
                    rel = self.session.answer(self._medoid(cand.i),
                                              self._medoid(cand.j), context="merge")
                    if rel == Relation.MUST:
                        self._merge(cand.i, cand.j, context="aggregation",
                                    gain=cand.expected_gain)
                    else:
                        self._snapshot()  # pair is now excluded via the closure
                else:
                    for cid, verdict in ((cand.i, v_i), (cand.j, v_j)):
                        if not verdict.passed:
                            self._split(cid)
            except BudgetExceededError:
                self._stop_reason = "budget"
                break
        if cfg.refine_budget > 0:
            self.refine_outliers(cfg.refine_budget)
        elapsed = time.perf_counter() - started
        return self._finalize(elapsed)

    def refine_outliers(self, extra_budget: int):
        """Absorb singleton clusters into must-linked neighbor clusters."""
        self.session.extend(extra_budget)
        singles = sorted(cid for cid, size in self.clustering.sizes.items() if size == 1)
        for cid in singles:
            if cid not in self.clustering.clusters:
                continue  # absorbed earlier in this pass
            sample = int(self.clustering.members(cid)[0])
            try:
                for _, other in self.index.neighbors_by_probability(cid, self.clustering):
                    if self.constraints.cluster_relation(
                            [sample], self.clustering.members(other)) == Relation.CANNOT:
                        continue
                    rel = self.session.answer(sample, self._medoid(other),
                                              context="refine")
                    if rel == Relation.MUST:
                        self._merge(cid, other, context="refine")
                        break
            except BudgetExceededError:
                break

    def _finalize(self, elapsed: float) -> RunResult:
        summary = {
            "queries_used": self.session.used,
            "budget": self.config.budget,
            "refine_budget": self.config.refine_budget,
            "k_initial": self._initial_k,
            "k_adaptive": self._adaptive_k,
            "k_final": self.clustering.k,
            "tau": self.tau,
            "stop_reason": self._stop_reason,
            "elapsed_seconds": elapsed,
            "config": self.config.to_dict(),
        }
        if self.metrics_rows:
            last = self.metrics_rows[-1]
            summary["final_metrics"] = {key: last[key] for key in METRICS_COLUMNS}
        out = self.config.out_dir
        if out:
            path = Path(out)
            np.savetxt(path / "assignment.txt", self.clustering.assignment, fmt="%d")
            with open(path / "summary.json", "w") as f:
                json.dump(summary, f, indent=2, sort_keys=True)
        for f in self._files.values():
            f.close()
        self._files.clear()
        return RunResult(self.clustering, self.runlog, self.metrics_rows, summary)


def run_session(dataset: Dataset, config: SessionConfig,
                oracle: Oracle | None = None) -> RunResult:
    """Convenience wrapper: build an engine, run it, return the result."""
    return Engine(dataset, config, oracle=oracle).run()


def read_oracle_records(constraints_log: str | Path) -> list[tuple[int, int, Relation]]:
    """Oracle-answer records (s, t, relation) from a constraint log, in order."""
    records = []
    with open(constraints_log) as f:
        for line in f:
            parts = line.strip().split(",")
            if len(parts) < 5 or parts[4] != "oracle":
                continue
            rel = Relation.MUST if parts[3] == "ML" else Relation.CANNOT
            records.append((int(parts[1]), int(parts[2]), rel))
    return records


def resume_session(dataset: Dataset, config: SessionConfig,
                   constraints_log: str | Path,
                   oracle: Oracle | None = None) -> RunResult:
    """Re-run a session from its persisted oracle answers, then continue live.

    The engine is deterministic given (dataset, config, answers), so replaying
    the recorded answers reconstructs the interrupted state exactly before the
    live oracle takes over.
    """
    records = read_oracle_records(constraints_log)
    if oracle is None and dataset.labels is not None:
        oracle = SimulatedOracle(dataset.labels)
    replay = ReplayOracle(records, fallback=oracle)
    return Engine(dataset, config, oracle=replay).run()
