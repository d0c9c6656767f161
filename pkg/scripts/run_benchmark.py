#!/usr/bin/env python3
"""Desk-scale benchmark: NMI/ARI versus query count for the gain-ranked
strategy against the trivial random-pair baseline, over several seeds.

Writes one curves CSV per (strategy, seed) plus a summary table; point
matplotlib at the CSVs for the query-efficiency comparison plot.
"""

import argparse
import csv
import time
from pathlib import Path

import numpy as np

from a3s import Engine, InitConfig, SessionConfig
from a3s.synthetic import make_blobs


def run_once(ds, seed, strategy, budget, out_dir):
    config = SessionConfig(
        budget=budget, seed=seed, strategy=strategy, neighbors=10, knn_kappa=4,
        init=InitConfig(merge_threshold=0.9), max_iterations=50_000)
    engine = Engine(ds, config)
    started = time.perf_counter()
    engine.run()
    engine.refine_outliers(max(budget // 3, 100))
    elapsed = time.perf_counter() - started
    rows = engine.metrics_rows
    path = out_dir / f"curve_{strategy}_seed{seed}.csv"
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    return rows[-1], elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--budget", type=int, default=600)
    ap.add_argument("--baseline-budget", type=int, default=3000)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--out", type=Path, default=Path("benchmark_out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    summary = []
    for seed in range(args.seeds):
        ds = make_blobs(n=args.n, k=args.k, dim=16, noise=args.noise,
                        center_scale=30.0, seed=seed)
        for strategy, budget in (("gain", args.budget),
                                 ("random", args.baseline_budget)):
            final, elapsed = run_once(ds, seed, strategy, budget, args.out)
            summary.append({"seed": seed, "strategy": strategy,
                            "budget": budget, "elapsed_s": round(elapsed, 2),
                            **{k: final[k] for k in
                               ("queries_used", "k", "nmi", "ari", "purity",
                                "upsilon")}})
            print(summary[-1])

    with open(args.out / "summary.csv", "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(summary[0]))
        writer.writeheader()
        writer.writerows(summary)
    for strategy in ("gain", "random"):
        nmis = [s["nmi"] for s in summary if s["strategy"] == strategy]
        print(f"{strategy}: median final NMI {np.median(nmis):.4f}")


if __name__ == "__main__":
    main()
