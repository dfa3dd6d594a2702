"""Finite-dictionary comparison methods: uniform weights, discrete alignment, best single kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import DegenerateAlignmentError, ideal_kernel
from .fsam import KernelCombination
from .kernels import GramCache, KernelFamily, KernelParams, center_entries, cross_gram, gram
from .svm import predict, select_c_holdout


@dataclass(frozen=True)
class KernelGrid:
    """Fixed dictionary of base kernels from one family."""

    params: tuple

    def __post_init__(self):
        params = tuple(self.params)
        if not params:
            raise ValueError("kernel grid must be non-empty")
        if not all(isinstance(p, KernelParams) for p in params):
            raise ValueError("grid entries must be KernelParams")
        family = params[0].family
        if any(p.family is not family for p in params):
            raise ValueError("grid entries must share one kernel family")
        object.__setattr__(self, "params", params)

    @property
    def family(self) -> KernelFamily:
        return self.params[0].family

    def __len__(self) -> int:
        return len(self.params)

    @classmethod
    def from_sigmas(cls, family: KernelFamily, values) -> "KernelGrid":
        return cls(tuple(KernelParams(family, v) for v in values))

    @classmethod
    def from_range(cls, family: KernelFamily, lo: float, hi: float, count: int,
                   spacing: str = "geometric") -> "KernelGrid":
        if count < 1:
            raise ValueError("grid needs at least one point")
        if count == 1:
            values = np.array([lo])
        elif spacing == "geometric":
            if lo <= 0:
                raise ValueError("geometric spacing needs lo > 0")
            values = lo * (hi / lo) ** (np.arange(count) / (count - 1))
        elif spacing == "linear":
            values = np.linspace(lo, hi, count)
        else:
            raise ValueError(f"unknown spacing {spacing!r}")
        return cls.from_sigmas(family, values)


def fit_uniform(grid: KernelGrid) -> KernelCombination:
    """Equal weights 1/p over the dictionary."""
    w = 1.0 / len(grid)
    return KernelCombination(grid.family, tuple((p.sigma, w) for p in grid.params))


def align_weights(centered_grams, target_centered: np.ndarray, max_iters: int = 500,
                  step0: float = 1.0, tol: float = 1e-8) -> np.ndarray:
    """Alignment-maximizing nonnegative unit-norm weights over fixed centered Grams.

    Projected gradient ascent of the centered alignment of sum_i mu_i K_i with
    the given centered target, over mu >= 0 with unit Euclidean norm. Starting
    from uniform weights and accepting only improving steps keeps the result
    at least as aligned as the uniform combination.
    """
    p = len(centered_grams)
    match = np.array([np.vdot(k, target_centered) for k in centered_grams])
    inner = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            inner[i, j] = inner[j, i] = np.vdot(centered_grams[i], centered_grams[j])

    def score(mu):
        # alignment up to the constant target norm
        q = float(mu @ inner @ mu)
        if q <= 0.0:
            return -np.inf
        return float(match @ mu) / np.sqrt(q)

    mu = np.ones(p) / np.sqrt(p)
    cur = score(mu)
    if not np.isfinite(cur):
        raise DegenerateAlignmentError("every dictionary kernel centers to zero")

    for _ in range(max_iters):
        q = float(mu @ inner @ mu)
        g = match / np.sqrt(q) - (float(match @ mu) / q**1.5) * (inner @ mu)
        step = step0
        nxt, nxt_score = None, cur
        while step > 1e-16:
            cand = np.maximum(mu + step * g, 0.0)
            norm = np.linalg.norm(cand)
            if norm > 0.0:
                cand = cand / norm
                s = score(cand)
                if s > cur:
                    nxt, nxt_score = cand, s
                    break
            step *= 0.5
        if nxt is None:
            break
        gain = (nxt_score - cur) / max(abs(cur), 1e-300)
        mu, cur = nxt, nxt_score
        if gain < tol:
            break
    return mu


def fit_align_discrete(grid: KernelGrid, X, y, max_iters: int = 500,
                       step0: float = 1.0, tol: float = 1e-8) -> KernelCombination:
    """Alignment-maximizing weights over a fixed kernel dictionary."""
    target = ideal_kernel(y)
    cache = GramCache(X)
    centered = [center_entries(cache.gram_entries(grid.family, p.sigma)) for p in grid.params]
    mu = align_weights(centered, target.centered.entries, max_iters, step0, tol)
    terms = tuple(
        (grid.params[i].sigma, float(mu[i])) for i in range(len(grid)) if mu[i] > 0.0
    )
    return KernelCombination(grid.family, terms)


def best_single(grid: KernelGrid, X, y, X_val, y_val, c_grid=None) -> KernelParams:
    """Dictionary member whose SVM has the lowest holdout error; ties keep grid order."""
    if np.asarray(y_val).size < 1:
        raise ValueError("validation set must be non-empty")
    best = None
    for params in grid.params:
        k_tr = gram(params, X)
        k_va = cross_gram(params, X_val, X)
        _, model = select_c_holdout(k_tr, y, k_va, y_val, c_grid=c_grid)
        err = float(np.mean(predict(model, k_va) != np.asarray(y_val, dtype=float).ravel()))
        if best is None or err < best[0]:
            best = (err, params)
    return best[1]
