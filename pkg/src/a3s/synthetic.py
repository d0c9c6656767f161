"""Synthetic desk-scale datasets: Gaussian blobs with a noise fraction.

Noise samples are uniform draws over the data bounding box labeled by their
nearest blob center, so they are legitimate (if far-flung) class members and
a truthful oracle stays consistent.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import Dataset


def make_blobs(n: int, k: int, dim: int = 8, noise: float = 0.05,
               center_scale: float = 30.0, sigma: float = 1.0,
               balance: float | None = None, seed: int = 0) -> Dataset:
    """`balance` of None gives equal class sizes; a positive value draws
    Dirichlet(balance) proportions (smaller = more skewed), floor 5 samples."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-center_scale, center_scale, size=(k, dim))
    if balance is None:
        sizes = np.full(k, n // k)
        sizes[: n % k] += 1
    else:
        props = rng.dirichlet(np.full(k, balance))
        sizes = np.maximum(5, np.round(props * n).astype(int))
        while sizes.sum() != n:  # repair rounding drift against the largest class
            sizes[int(np.argmax(sizes))] += int(np.sign(n - sizes.sum()))
    features = np.vstack([
        centers[c] + rng.normal(0.0, sigma, size=(sizes[c], dim))
        for c in range(k)
    ])
    labels = np.repeat(np.arange(k), sizes)
    if noise > 0:
        n_noise = int(round(noise * n))
        idx = rng.choice(n, size=n_noise, replace=False)
        lo = features.min(axis=0)
        hi = features.max(axis=0)
        features[idx] = rng.uniform(lo, hi, size=(n_noise, dim))
        d = np.linalg.norm(features[idx][:, None, :] - centers[None, :, :], axis=2)
        labels[idx] = d.argmin(axis=1)
    order = rng.permutation(n)
    return Dataset(features[order], labels=labels[order])


def write_dataset_files(dataset: Dataset, out_dir: str | Path,
                        prefix: str = "data") -> tuple[Path, Path]:
    """Write (features, labels) as the delimited text files the CLI ingests."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"{prefix}.txt"
    labels_path = out / f"{prefix}.labels.txt"
    np.savetxt(data_path, dataset.features)
    np.savetxt(labels_path, dataset.labels, fmt="%d")
    return data_path, labels_path
