#!/usr/bin/env python3
"""Launch an interactive annotation demo: generates a small blob dataset,
starts the service with one session, and serves the browser UI if built.

Open the printed URL; every must-link / cannot-link decision you make
immediately steers which pair the engine asks about next.
"""

import argparse
import tempfile
from pathlib import Path

from a3s.engine import SessionConfig
from a3s.io import load_dataset
from a3s.service import SessionManager, create_app
from a3s.synthetic import make_blobs, write_dataset_files


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=120)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--budget", type=int, default=60)
    ap.add_argument("--port", type=int, default=8000)
    ap.add_argument("--ui-dir", default=str(Path(__file__).resolve().parents[1]
                                            / "frontend"))
    args = ap.parse_args()

    workdir = Path(tempfile.mkdtemp(prefix="a3s-demo-"))
    ds = make_blobs(n=args.n, k=args.k, dim=2, noise=0.1, center_scale=8.0, seed=0)
    data, labels = write_dataset_files(ds, workdir)
    dataset = load_dataset(data, labels)

    manager = SessionManager()
    ui = args.ui_dir if Path(args.ui_dir).is_dir() else None
    app = create_app(manager, static_dir=ui)
    config = SessionConfig(budget=args.budget, neighbors=20, seed=0,
                           oracle_mode="interactive",
                           out_dir=str(workdir / "session_out"))
    session = manager.create(dataset, config, session_id="demo")

    import uvicorn
    print(f"demo session 'demo' at http://127.0.0.1:{args.port}"
          + ("" if ui else "  (no UI build found; use the JSON API)"))
    print(f"outputs under {workdir}")
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
