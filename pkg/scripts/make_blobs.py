#!/usr/bin/env python3
"""Generate a synthetic blob dataset as CLI-ready text files."""

import argparse
from pathlib import Path

from a3s.synthetic import make_blobs, write_dataset_files


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--center-scale", type=float, default=30.0)
    ap.add_argument("--balance", type=float, default=None,
                    help="Dirichlet concentration for unbalanced class sizes")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("data"))
    ap.add_argument("--prefix", default="blobs")
    args = ap.parse_args()

    ds = make_blobs(n=args.n, k=args.k, dim=args.dim, noise=args.noise,
                    center_scale=args.center_scale, balance=args.balance,
                    seed=args.seed)
    data, labels = write_dataset_files(ds, args.out, prefix=args.prefix)
    print(f"wrote {data} and {labels} (N={args.n}, K={args.k}, D={args.dim})")


if __name__ == "__main__":
    main()
