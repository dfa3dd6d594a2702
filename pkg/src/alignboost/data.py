"""Synthetic benchmark generators, CSV loading, and deterministic splitting.

All randomness flows through numpy's default PCG64 generator seeded per
dataset, so every draw is reproducible across platforms from the seed alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

SINE_FREQS = (np.sqrt(2.0), np.sqrt(12.0), np.sqrt(60.0))


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    name: str
    seed: int

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.size:
            raise ValueError("label count does not match the number of rows")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_val: int
    n_test: int
    seed: int = 0

    def __post_init__(self):
        if min(self.n_train, self.n_val, self.n_test) < 1:
            raise ValueError("every split must request at least one point")


def sine_mixture_signal(x) -> np.ndarray:
    """Sum of three incommensurate sines whose sign defines the labels."""
    x = np.asarray(x, dtype=float)
    return sum(np.sin(f * x) for f in SINE_FREQS)


def _draw_sine(rng: np.random.Generator, n: int, name: str, seed: int) -> Dataset:
    for _ in range(100):
        x = rng.uniform(-10.0, 10.0, size=n)
        f = sine_mixture_signal(x)
        # resample exact zero crossings rather than assigning them a label
        bad = f == 0.0
        while bad.any():
            x[bad] = rng.uniform(-10.0, 10.0, size=int(bad.sum()))
            f = sine_mixture_signal(x)
            bad = f == 0.0
        y = np.sign(f)
        if (y > 0).any() and (y < 0).any():
            return Dataset(x[:, None], y, name, seed)
    raise RuntimeError("failed to draw both classes in 100 attempts")


def gen_sine_mixture(n_train: int = 500, n_val: int = 500, n_test: int = 1000,
                     seed: int = 0):
    """One-dimensional benchmark: x ~ U[-10, 10], label = sign of the sine mixture."""
    rng = np.random.default_rng(seed)
    return (
        _draw_sine(rng, n_train, "sine-train", seed),
        _draw_sine(rng, n_val, "sine-val", seed),
        _draw_sine(rng, n_test, "sine-test", seed),
    )


def relevance_direction(gamma: float, n_features: int = 50, rho: float = 1.75) -> np.ndarray:
    """Class mean rho * theta/||theta|| with theta_i = (i/d)^gamma for i = 1..d.

    Larger gamma suppresses the leading coordinates, making them nearly
    irrelevant to the class separation; the last coordinate always keeps
    theta_d = 1.
    """
    if gamma < 0:
        raise ValueError("relevance exponent must be nonnegative")
    i = np.arange(1, n_features + 1, dtype=float)
    theta = (i / n_features) ** gamma
    return rho * theta / np.linalg.norm(theta)


def _draw_gauss(rng: np.random.Generator, n: int, mu: np.ndarray, name: str,
                seed: int) -> Dataset:
    d = mu.size
    for _ in range(100):
        y = rng.choice([-1.0, 1.0], size=n)
        if (y > 0).any() and (y < 0).any():
            X = y[:, None] * mu[None, :] + rng.standard_normal((n, d))
            return Dataset(X, y, name, seed)
    raise RuntimeError("failed to draw both classes in 100 attempts")


def gen_gauss50(gamma: float, rho: float = 1.75, n_features: int = 50,
                n_train: int = 50, n_val: int = 1000, n_test: int = 1000,
                seed: int = 0):
    """Gaussian classes at +/- the relevance direction with identity covariance."""
    mu = relevance_direction(gamma, n_features, rho)
    rng = np.random.default_rng(seed)
    tag = f"gauss{n_features}-g{gamma:g}"
    return (
        _draw_gauss(rng, n_train, mu, f"{tag}-train", seed),
        _draw_gauss(rng, n_val, mu, f"{tag}-val", seed),
        _draw_gauss(rng, n_test, mu, f"{tag}-test", seed),
    )


def _looks_numeric(cells) -> bool:
    try:
        for cell in cells:
            float(cell)
        return True
    except ValueError:
        return False


def load_csv(path, label_column, positive_label) -> Dataset:
    """Load a plain comma-separated dataset.

    The label column may be named (requires a header row) or given by index.
    Cells equal to ``positive_label`` (string comparison) map to +1 and every
    other label maps to -1.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")

    if isinstance(label_column, str):
        header = rows[0]
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        body, first_line = rows[1:], 2
    else:
        label_idx = int(label_column)
        has_header = not _looks_numeric(
            rows[0][:label_idx] + rows[0][label_idx + 1:]
        )
        body = rows[1:] if has_header else rows
        first_line = 2 if has_header else 1
    if not body:
        raise ValueError(f"{path}: no data rows")

    positive = str(positive_label)
    feats, labels = [], []
    for offset, row in enumerate(body):
        line = first_line + offset
        if label_idx >= len(row):
            raise ValueError(f"{path}:{line}: missing label column {label_idx}")
        raw = [cell for k, cell in enumerate(row) if k != label_idx]
        try:
            feats.append([float(cell) for cell in raw])
        except ValueError as exc:
            raise ValueError(f"{path}:{line}: {exc}") from None
        labels.append(1.0 if row[label_idx].strip() == positive else -1.0)

    X = np.asarray(feats, dtype=float)
    y = np.asarray(labels, dtype=float)
    if np.all(y == y[0]):
        raise ValueError(f"{path}: a single class after label mapping")
    return Dataset(X, y, name=str(path), seed=0)


def split(ds: Dataset, spec: SplitSpec):
    """Deterministic shuffle by seed, then cut train/val/test by the requested counts."""
    total = spec.n_train + spec.n_val + spec.n_test
    if total > ds.n:
        raise ValueError(f"split wants {total} points but dataset has {ds.n}")
    perm = np.random.default_rng(spec.seed).permutation(ds.n)
    cuts = np.cumsum([spec.n_train, spec.n_val, spec.n_test])
    idx_tr, idx_va, idx_te = perm[:cuts[0]], perm[cuts[0]:cuts[1]], perm[cuts[1]:cuts[2]]
    make = lambda idx, tag: Dataset(ds.X[idx], ds.y[idx], f"{ds.name}-{tag}", spec.seed)
    return make(idx_tr, "train"), make(idx_va, "val"), make(idx_te, "test")


def save_csv(ds: Dataset, path) -> None:
    """Write features plus a final ``label`` column in the format ``load_csv`` reads."""
    d = ds.X.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(d)] + ["label"])
        for row, label in zip(ds.X, ds.y):
            writer.writerow([repr(float(v)) for v in row] + [f"{int(label):d}"])
