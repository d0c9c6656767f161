"""Dataset file ingestion: delimited text or .npy matrices, one-column label
files, one-path-per-line asset lists."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import Dataset


def load_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        mat = np.load(path)
    else:
        mat = np.loadtxt(path, ndmin=2)
    return np.asarray(mat, dtype=np.float64)


def load_labels(path: str | Path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        labels = np.load(path)
    else:
        labels = np.loadtxt(path)
    return np.asarray(labels, dtype=np.int64).reshape(-1)


def load_assets(path: str | Path) -> list[str]:
    with open(path) as f:
        return [line.rstrip("\n") for line in f if line.strip()]


def load_dataset(data: str | Path, labels: str | Path | None = None,
                 assets: str | Path | None = None,
                 views: list[str | Path] | None = None) -> Dataset:
    return Dataset(
        features=load_matrix(data),
        labels=load_labels(labels) if labels else None,
        assets=load_assets(assets) if assets else None,
        views=[load_matrix(v) for v in views] if views else None,
    )
