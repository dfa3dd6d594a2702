"""Kernel families, Gram matrices, centering, and Frobenius-space arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class KernelFamily(str, Enum):
    """Continuously parameterized base-kernel families.

    GAUSSIAN_SHARED  exp(-||x - y||^2 / s^2), one bandwidth s > 0
    GAUSSIAN_PER_DIM exp(-sum_i (x_i - y_i)^2 / s_i^2), one bandwidth per coordinate
    DIRICHLET1       1 + 2 cos(s ||x - y||), one frequency s >= 0
    """

    GAUSSIAN_SHARED = "gaussian-shared"
    GAUSSIAN_PER_DIM = "gaussian-perdim"
    DIRICHLET1 = "dirichlet1"

    def param_length(self, n_features: int) -> int:
        """Length of the parameter vector for inputs with ``n_features`` columns."""
        return n_features if self is KernelFamily.GAUSSIAN_PER_DIM else 1

    @property
    def log_scale_default(self) -> bool:
        """Bandwidths span decades, so Gaussian families search in log coordinates."""
        return self is not KernelFamily.DIRICHLET1


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"data must be a 2-d array, got shape {X.shape}")
    return X


def _as_sigma(sigma) -> np.ndarray:
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sigma.ndim != 1:
        raise ValueError("kernel parameter must be a scalar or 1-d vector")
    if not np.all(np.isfinite(sigma)):
        raise ValueError("kernel parameter must be finite")
    return sigma


def _validate_sigma(family: KernelFamily, sigma: np.ndarray) -> None:
    if family is KernelFamily.DIRICHLET1:
        if sigma.size != 1:
            raise ValueError("dirichlet1 takes a single frequency parameter")
        if sigma[0] < 0:
            raise ValueError("dirichlet1 frequency must be nonnegative")
    elif family is KernelFamily.GAUSSIAN_SHARED:
        if sigma.size != 1:
            raise ValueError("gaussian-shared takes a single bandwidth parameter")
        if sigma[0] <= 0:
            raise ValueError("gaussian bandwidth must be strictly positive")
    else:
        if not np.all(sigma > 0):
            raise ValueError("gaussian bandwidths must be strictly positive")


@dataclass(frozen=True)
class KernelParams:
    """A base kernel: family tag plus its positive parameter vector."""

    family: KernelFamily
    sigma: np.ndarray

    def __post_init__(self):
        sigma = _as_sigma(self.sigma)
        _validate_sigma(self.family, sigma)
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class GramMatrix:
    """Square matrix of pairwise kernel values with an advisory centered flag."""

    entries: np.ndarray
    centered: bool = False

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def entries_of(K) -> np.ndarray:
    """Unwrap a GramMatrix to its ndarray; pass plain arrays through."""
    return K.entries if isinstance(K, GramMatrix) else np.asarray(K, dtype=float)


def eval_kernel(params: KernelParams, x, y) -> float:
    """Evaluate one kernel value between two input vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError(f"input dimensions differ: {x.shape} vs {y.shape}")
    family, sigma = params.family, params.sigma
    if family is KernelFamily.GAUSSIAN_PER_DIM:
        if sigma.size != x.size:
            raise ValueError(
                f"gaussian-perdim needs {x.size} bandwidths, got {sigma.size}"
            )
        return float(np.exp(-np.sum((x - y) ** 2 / sigma**2)))
    dist2 = float(np.sum((x - y) ** 2))
    if family is KernelFamily.GAUSSIAN_SHARED:
        return float(np.exp(-dist2 / sigma[0] ** 2))
    return float(1.0 + 2.0 * np.cos(sigma[0] * np.sqrt(dist2)))


def _sqdist(A: np.ndarray, B: np.ndarray | None = None) -> np.ndarray:
    """Pairwise squared Euclidean distances, rows of A against rows of B (or A)."""
    if B is None:
        g = A @ A.T
        g = 0.5 * (g + g.T)  # force exact symmetry of the BLAS product
        sq = np.diag(g)
        d = sq[:, None] + sq[None, :] - 2.0 * g
    else:
        sqa = np.einsum("ij,ij->i", A, A)
        sqb = np.einsum("ij,ij->i", B, B)
        d = sqa[:, None] + sqb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


class GramCache:
    """Distance statistics of a fixed sample, reused across many parameter values.

    Bound to one dataset (or an ordered pair for cross matrices); ``gram_entries``
    then costs one elementwise transform instead of a full pairwise pass.
    """

    def __init__(self, X, X2=None):
        self.X = _as_matrix(X)
        self.X2 = None if X2 is None else _as_matrix(X2)
        if self.X2 is not None and self.X2.shape[1] != self.X.shape[1]:
            raise ValueError("feature counts differ between the two samples")
        self._sqdist = None
        self._dist = None

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def sqdist(self) -> np.ndarray:
        if self._sqdist is None:
            self._sqdist = _sqdist(self.X if self.X2 is None else self.X2, None if self.X2 is None else self.X)
        return self._sqdist

    def dist(self) -> np.ndarray:
        if self._dist is None:
            self._dist = np.sqrt(self.sqdist())
        return self._dist

    def gram_entries(self, family: KernelFamily, sigma) -> np.ndarray:
        sigma = _as_sigma(sigma)
        _validate_sigma(family, sigma)
        if family is KernelFamily.GAUSSIAN_SHARED:
            return np.exp(-self.sqdist() / sigma[0] ** 2)
        if family is KernelFamily.DIRICHLET1:
            return 1.0 + 2.0 * np.cos(sigma[0] * self.dist())
        if sigma.size != self.n_features:
            raise ValueError(
                f"gaussian-perdim needs {self.n_features} bandwidths, got {sigma.size}"
            )
        # Per-coordinate bandwidths reduce to an ordinary squared distance of
        # rescaled inputs, so no per-dimension distance tensor is ever stored.
        w = 1.0 / sigma
        A = self.X * w[None, :]
        B = None if self.X2 is None else self.X2 * w[None, :]
        return np.exp(-_sqdist(A if B is None else B, None if B is None else A))


def gram(params: KernelParams, X) -> GramMatrix:
    """Uncentered Gram matrix of one base kernel over the rows of X."""
    cache = GramCache(X)
    return GramMatrix(cache.gram_entries(params.family, params.sigma), centered=False)


def cross_gram(params: KernelParams, X2, X) -> np.ndarray:
    """Kernel values of rows of X2 against rows of X (shape ``len(X2) x len(X)``)."""
    cache = GramCache(X, X2)
    return cache.gram_entries(params.family, params.sigma)


def center_entries(M: np.ndarray) -> np.ndarray:
    """Apply the centering projection on both sides: subtract row, column and grand means."""
    M = np.asarray(M, dtype=float)
    row = M.mean(axis=1, keepdims=True)
    col = M.mean(axis=0, keepdims=True)
    return M - row - col + M.mean()


def center(K: GramMatrix) -> GramMatrix:
    """Centered copy of a Gram matrix, flag set."""
    return GramMatrix(center_entries(entries_of(K)), centered=True)


def frob_inner(A, B) -> float:
    """Frobenius inner product, the entrywise dot product of two equal-shape matrices."""
    a, b = entries_of(A), entries_of(B)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.vdot(a, b))


def frob_norm(A) -> float:
    a = entries_of(A)
    return float(np.linalg.norm(a))


def combine(terms, size: int | None = None) -> GramMatrix:
    """Weighted sum ``sum_i mu_i K_i`` of Gram matrices with nonnegative weights.

    The centered flags of all inputs must agree and are preserved. An empty
    term list needs an explicit ``size`` and yields the zero matrix.
    """
    terms = list(terms)
    if not terms:
        if size is None:
            raise ValueError("empty combination needs an explicit size")
        return GramMatrix(np.zeros((size, size)), centered=False)
    flag = None
    total = None
    for mu, K in terms:
        if mu < 0:
            raise ValueError(f"combination weights must be nonnegative, got {mu}")
        if isinstance(K, GramMatrix):
            k_flag, k_entries = K.centered, K.entries
        else:
            k_flag, k_entries = False, np.asarray(K, dtype=float)
        if flag is None:
            flag = k_flag
            total = np.zeros_like(k_entries)
        elif k_flag is not flag:
            raise ValueError("cannot combine centered with uncentered matrices")
        if k_entries.shape != total.shape:
            raise ValueError("combination terms have mismatched shapes")
        total += mu * k_entries
    return GramMatrix(total, centered=bool(flag))
