"""Command-line entry points.

`a3s run` drives a batch session against a simulated oracle (or hosts a
single interactive session over HTTP); `a3s resume` replays a persisted
session and continues it; `a3s serve` exposes the multi-session annotation
service.

Exit codes: 0 success, 2 config error, 3 oracle contradiction, 4 I/O error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .constraints import ContradictionError
from .engine import Engine, SessionConfig, resume_session
from .init import InitConfig
from .io import load_dataset
from .oracle import SimulatedOracle

EXIT_CONFIG = 2
EXIT_CONTRADICTION = 3
EXIT_IO = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _session_config(labels, oracle, init, budget, batch, neighbors, tau, knn_agg,
                    seed, out, refine_budget, merge_threshold, strategy,
                    max_iterations) -> SessionConfig:
    if seed is None:
        seed = int(os.environ.get("A3S_SEED", "0"))
    elif "A3S_SEED" in os.environ:
        seed = int(os.environ["A3S_SEED"])
    tau_value = None
    if tau not in (None, "auto"):
        tau_value = float(tau)
        if not 0.0 <= tau_value <= 1.0:
            raise ValueError("tau must lie in [0, 1] or be 'auto'")
    return SessionConfig(
        budget=budget,
        max_iterations=max_iterations,
        batch=batch,
        tau=tau_value,
        init=InitConfig(method=init, merge_threshold=merge_threshold),
        neighbors=neighbors,
        knn_kappa=knn_agg,
        seed=seed,
        out_dir=out,
        oracle_mode=oracle,
        refine_budget=refine_budget,
        strategy=strategy,
    )


def _write_session_file(out: str, data, labels, assets, views, config: SessionConfig):
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    doc = {
        "data": str(data),
        "labels": str(labels) if labels else None,
        "assets": str(assets) if assets else None,
        "views": [str(v) for v in views] if views else None,
        "config": config.to_dict(),
    }
    with open(path / "session.json", "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)


@click.group()
def main():
    """Active clustering with a budget of pairwise oracle queries."""


@main.command()
@click.option("--data", required=True, help="feature matrix (delimited text or .npy)")
@click.option("--labels", default=None, help="ground-truth label file, or 'none'")
@click.option("--assets", default=None, help="one display asset path per line")
@click.option("--view", "views", multiple=True, help="extra feature view (repeatable)")
@click.option("--oracle", type=click.Choice(["simulated", "interactive"]),
              default="simulated", show_default=True)
@click.option("--init", type=click.Choice(["probabilistic", "kmeans", "agglomerative"]),
              default="probabilistic", show_default=True)
@click.option("--budget", type=int, default=100, show_default=True)
@click.option("--batch", type=int, default=10, show_default=True)
@click.option("--neighbors", type=int, default=50, show_default=True)
@click.option("--tau", default="auto", show_default=True,
              help="density threshold in [0,1], or 'auto'")
@click.option("--knn-agg", type=int, default=0, show_default=True,
              help="0: full aggregation product; >0: restrict to this many neighbors")
@click.option("--seed", type=int, default=None, help="RNG seed (A3S_SEED overrides)")
@click.option("--out", required=True, help="output directory")
@click.option("--refine-budget", type=int, default=0, show_default=True)
@click.option("--merge-threshold", type=float, default=0.6, show_default=True)
@click.option("--strategy", type=click.Choice(["gain", "random"]), default="gain",
              show_default=True, help="candidate selection (random = baseline)")
@click.option("--max-iterations", type=int, default=None)
@click.option("--dump-candidates", is_flag=True, default=False,
              help="write the scored candidate table per iteration")
@click.option("--port", type=int, default=8000, show_default=True,
              help="HTTP port for --oracle interactive")
def run(data, labels, assets, views, oracle, init, budget, batch, neighbors, tau,
        knn_agg, seed, out, refine_budget, merge_threshold, strategy,
        max_iterations, dump_candidates, port):
    """Run one clustering session end to end."""
    if labels in ("none", ""):
        labels = None
    try:
        config = _session_config(labels, oracle, init, budget, batch, neighbors,
                                 tau, knn_agg, seed, out, refine_budget,
                                 merge_threshold, strategy, max_iterations)
        config.dump_candidates = dump_candidates
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    try:
        dataset = load_dataset(data, labels, assets, list(views) or None)
    except (OSError, ValueError) as exc:
        _fail(EXIT_IO, f"failed to load dataset: {exc}")
    if oracle == "simulated" and dataset.labels is None:
        _fail(EXIT_CONFIG, "simulated oracle requires --labels")
    _write_session_file(out, data, labels, assets, views, config)

    if oracle == "interactive":
        from .service import serve_single_session
        try:
            serve_single_session(dataset, config, port=port)
        except ContradictionError as exc:
            _fail(EXIT_CONTRADICTION, str(exc))
        return

    try:
        result = Engine(dataset, config).run()
    except ContradictionError as exc:
        _fail(EXIT_CONTRADICTION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(json.dumps(result.summary.get("final_metrics", {}), sort_keys=True))


@main.command()
@click.option("--out", required=True, help="output directory of the interrupted run")
def resume(out):
    """Resume an interrupted session from its persisted logs."""
    path = Path(out)
    try:
        with open(path / "session.json") as f:
            doc = json.load(f)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read session file: {exc}")
    try:
        cfg_doc = doc["config"]
        cfg_doc["init"] = InitConfig(**cfg_doc["init"])
        config = SessionConfig(**cfg_doc)
        dataset = load_dataset(doc["data"], doc.get("labels"),
                               doc.get("assets"), doc.get("views"))
    except (KeyError, ValueError) as exc:
        _fail(EXIT_CONFIG, f"bad session file: {exc}")
    except OSError as exc:
        _fail(EXIT_IO, f"failed to load dataset: {exc}")
    log = path / "constraints.log"
    if not log.exists():
        _fail(EXIT_IO, f"no constraint log at {log}")
    oracle = SimulatedOracle(dataset.labels) if dataset.labels is not None else None
    try:
        result = resume_session(dataset, config, log, oracle=oracle)
    except ContradictionError as exc:
        _fail(EXIT_CONTRADICTION, str(exc))
    click.echo(json.dumps(result.summary.get("final_metrics", {}), sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--static-dir", default=None, help="directory of UI assets to serve at /")
def serve(host, port, static_dir):
    """Serve the interactive annotation API (and optionally the UI)."""
    import uvicorn

    from .service import create_app
    app = create_app(static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
