"""Soft-margin SVM on a precomputed Gram matrix, trained by sequential minimal optimization.

The dual problem  max  sum(alpha) - 0.5 (alpha*y)' K (alpha*y)
               s.t.  0 <= alpha_i <= C,  sum_i alpha_i y_i = 0
is solved by repeatedly taking the most KKT-violating variable together with
its best-gain partner and optimizing the pair in closed form. Desk-scale
problems fit the full Gram matrix in memory, so no row caching or shrinking
heuristics are needed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix, entries_of, frob_norm


@dataclass(frozen=True)
class SvmModel:
    """Trained classifier: signed dual coefficients alpha_i * y_i, bias, and supports."""

    dual_coef: np.ndarray
    bias: float
    support_indices: np.ndarray
    c: float


def default_c_grid() -> np.ndarray:
    """Half-decade geometric grid 1e-5 ... 1e5 used for regularization tuning."""
    return 10.0 ** np.arange(-5.0, 5.01, 0.5)


def dual_objective(K, dual_coef: np.ndarray) -> float:
    """Dual objective value from signed coefficients: sum|s| - 0.5 s'Ks."""
    k = entries_of(K)
    s = np.asarray(dual_coef, dtype=float)
    return float(np.sum(np.abs(s)) - 0.5 * s @ k @ s)


def _ensure_psd(k: np.ndarray) -> np.ndarray:
    """Verify positive semidefiniteness up to -1e-8*||K||_F; jitter once if violated."""
    n = k.shape[0]
    tol = 1e-8 * frob_norm(k) + 1e-30

    def chol_ok(m):
        try:
            np.linalg.cholesky(m + tol * np.eye(n))
            return True
        except np.linalg.LinAlgError:
            return False

    if chol_ok(k):
        return k
    jitter = 1e-8 * np.trace(k) / n
    warnings.warn(
        f"Gram matrix is not PSD within tolerance; retrying with diagonal jitter {jitter:.3e}"
    )
    k = k + jitter * np.eye(n)
    if chol_ok(k):
        return k
    raise ValueError("Gram matrix is not positive semidefinite within tolerance")


def _smo_loop_vectorized(k, y, alpha, grad, c, tol, max_iter):
    """Numpy variant of the SMO loop; mutates alpha and grad, returns converged."""
    diag = np.diag(k).copy()
    pos = y > 0
    for it in range(max_iter):
        if it and it % 8192 == 0:
            grad[:] = y * (k @ (alpha * y)) - 1.0  # shed accumulated roundoff
        viol = -y * grad
        up = np.where(pos, alpha < c, alpha > 0.0)
        low = np.where(pos, alpha > 0.0, alpha < c)
        if not up.any() or not low.any():
            return True
        i = int(np.argmax(np.where(up, viol, -np.inf)))
        if viol[i] - np.min(np.where(low, viol, np.inf)) < tol:
            return True
        diff = viol[i] - viol
        quads = np.maximum(diag[i] + diag - 2.0 * k[:, i], 1e-12)
        gains = np.where(low & (diff > 0.0), diff * diff / quads, -np.inf)
        j = int(np.argmax(gains))
        if not np.isfinite(gains[j]):
            return True
        bound_i = c - alpha[i] if pos[i] else alpha[i]
        bound_j = alpha[j] if pos[j] else c - alpha[j]
        t = min(diff[j] / quads[j], bound_i, bound_j)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        # land exactly on the box when the step was bound-limited, keeping the
        # cached gradient consistent with alpha to machine precision
        if t == bound_i:
            alpha[i] = c if pos[i] else 0.0
        if t == bound_j:
            alpha[j] = 0.0 if pos[j] else c
        grad += t * y * (k[:, i] - k[:, j])
    return False


def _smo_loop_scalar(k, y, alpha, grad, c, tol, max_iter):
    """Scalar-loop SMO body with identical semantics, written for numba."""
    n = y.shape[0]
    for it in range(max_iter):
        if it != 0 and it % 8192 == 0:
            for p in range(n):
                s = 0.0
                for q in range(n):
                    s += k[p, q] * alpha[q] * y[q]
                grad[p] = y[p] * s - 1.0
        i = -1
        m = -np.inf
        low_min = np.inf
        has_low = False
        for p in range(n):
            v = -y[p] * grad[p]
            if (y[p] > 0 and alpha[p] < c) or (y[p] < 0 and alpha[p] > 0.0):
                if v > m:
                    m = v
                    i = p
            if (y[p] > 0 and alpha[p] > 0.0) or (y[p] < 0 and alpha[p] < c):
                has_low = True
                if v < low_min:
                    low_min = v
        if i < 0 or not has_low:
            return True
        if m - low_min < tol:
            return True
        j = -1
        best_gain = -np.inf
        kii = k[i, i]
        for p in range(n):
            if (y[p] > 0 and alpha[p] > 0.0) or (y[p] < 0 and alpha[p] < c):
                d = m + y[p] * grad[p]
                if d > 0.0:
                    quad = kii + k[p, p] - 2.0 * k[i, p]
                    if quad < 1e-12:
                        quad = 1e-12
                    g = d * d / quad
                    if g > best_gain:
                        best_gain = g
                        j = p
        if j < 0:
            return True
        quad = kii + k[j, j] - 2.0 * k[i, j]
        if quad < 1e-12:
            quad = 1e-12
        d = m + y[j] * grad[j]
        bound_i = c - alpha[i] if y[i] > 0 else alpha[i]
        bound_j = alpha[j] if y[j] > 0 else c - alpha[j]
        t = d / quad
        if t > bound_i:
            t = bound_i
        if t > bound_j:
            t = bound_j
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        if t == bound_i:
            alpha[i] = c if y[i] > 0 else 0.0
        if t == bound_j:
            alpha[j] = 0.0 if y[j] > 0 else c
        for p in range(n):
            grad[p] += t * y[p] * (k[p, i] - k[p, j])
    return False


try:  # compiled loop when numba is present; the numpy loop is the fallback
    from numba import njit as _njit

    _smo_loop = _njit(cache=True)(_smo_loop_scalar)
except ImportError:  # pragma: no cover - exercised only without numba
    _smo_loop = _smo_loop_vectorized


def _smo(k: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int,
         alpha0: np.ndarray | None = None):
    """Maximal-violation SMO with second-order partner choice. Returns (alpha, bias, converged).

    The first index is the maximally KKT-violating variable; its partner is
    the violating candidate with the largest closed-form objective gain, which
    avoids the zigzag stalls of a purely first-order pair on ill-conditioned
    Gram matrices.
    """
    n = y.size
    if alpha0 is None:
        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a at alpha = 0
    else:
        alpha = np.clip(np.asarray(alpha0, dtype=float).copy(), 0.0, c)
        grad = y * (k @ (alpha * y)) - 1.0
    k = np.ascontiguousarray(k)
    converged = bool(_smo_loop(k, y, alpha, grad, float(c), float(tol), int(max_iter)))
    pos = y > 0

    viol = -y * grad
    free = (alpha > 0.0) & (alpha < c)
    if free.any():
        bias = float(viol[free].mean())
    else:
        up = np.where(pos, alpha < c, alpha > 0.0)
        low = np.where(pos, alpha > 0.0, alpha < c)
        hi = float(np.max(viol[up])) if up.any() else None
        lo = float(np.min(viol[low])) if low.any() else None
        if hi is not None and lo is not None:
            bias = 0.5 * (hi + lo)  # midpoint of the KKT interval for the bias
        else:
            bias = hi if hi is not None else (lo if lo is not None else 0.0)
    return alpha, bias, converged


def train_svm(K, y, c: float, tol: float = 1e-4, max_iter: int = 100_000,
              alpha0: np.ndarray | None = None) -> SvmModel:
    """Train a binary soft-margin SVM on a precomputed (uncentered) train Gram matrix.

    Args:
        K: n x n Gram matrix (GramMatrix or ndarray); must be PSD up to
           -1e-8*||K||_F, else one diagonal-jitter retry is attempted.
        y: length-n labels in {-1, +1}, both classes present.
        c: regularization constant, > 0.
        tol: stop when the largest KKT violation drops below this.
        max_iter: cap on pair updates.
        alpha0: optional feasible warm start (e.g. the solution for a smaller c).
    """
    k = entries_of(K)
    y = np.asarray(y, dtype=float).ravel()
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("training Gram matrix must be square")
    if k.shape[0] != y.size:
        raise ValueError("label count does not match Gram size")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.all(y == y[0]):
        raise ValueError("training labels contain a single class")
    if not c > 0:
        raise ValueError("regularization constant must be positive")
    k = _ensure_psd(k)

    alpha, bias, converged = _smo(k, y, float(c), tol, max_iter, alpha0)
    if not converged:
        warnings.warn(f"SMO hit the {max_iter}-update cap before reaching tol={tol}")
    return SvmModel(
        dual_coef=alpha * y,
        bias=bias,
        support_indices=np.flatnonzero(alpha > 0.0),
        c=float(c),
    )


def decision_function(model: SvmModel, K_cross) -> np.ndarray:
    """Real-valued decision values for rows of a cross Gram matrix (points x train)."""
    kc = entries_of(K_cross) if isinstance(K_cross, GramMatrix) else np.asarray(K_cross, dtype=float)
    if kc.ndim != 2 or kc.shape[1] != model.dual_coef.size:
        raise ValueError(
            f"cross Gram must have {model.dual_coef.size} columns, got shape {kc.shape}"
        )
    return kc @ model.dual_coef + model.bias


def predict(model: SvmModel, K_cross) -> np.ndarray:
    """Predicted -1/+1 labels; a decision value of exactly 0 maps to +1."""
    dec = decision_function(model, K_cross)
    return np.where(dec >= 0.0, 1.0, -1.0)


def _error_rate(labels: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(labels != np.asarray(y, dtype=float).ravel()))


def select_c_holdout(K_train, y_train, K_val_cross, y_val, c_grid=None,
                     tol: float = 1e-4):
    """Pick C on a holdout set; returns (c, model trained at that c).

    Sweeps the grid in ascending order with warm starts, keeping the smallest
    C among those tied for the lowest validation error.
    """
    grid = default_c_grid() if c_grid is None else np.sort(np.atleast_1d(np.asarray(c_grid, dtype=float)))
    best = None
    alpha = None
    y_arr = np.asarray(y_train, dtype=float).ravel()
    for c in grid:
        model = train_svm(K_train, y_train, float(c), tol=tol, alpha0=alpha)
        alpha = model.dual_coef * y_arr
        err = _error_rate(predict(model, K_val_cross), y_val)
        if best is None or err < best[0]:
            best = (err, float(c), model)
    return best[1], best[2]


def cv_select_c(K, y, folds: int, c_grid=None, tol: float = 1e-4) -> float:
    """Regularization constant with the lowest mean k-fold validation error.

    Folds are assigned round-robin by index, so the choice is deterministic.
    Ties resolve to the smallest C of the grid.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds; use select_c_holdout for an explicit split")
    k = entries_of(K)
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if folds > n:
        raise ValueError("more folds than points")
    grid = default_c_grid() if c_grid is None else np.sort(np.atleast_1d(np.asarray(c_grid, dtype=float)))
    fold_id = np.arange(n) % folds

    errors = np.zeros(grid.size)
    for f in range(folds):
        va = fold_id == f
        tr = ~va
        k_tr = k[np.ix_(tr, tr)]
        k_va = k[np.ix_(va, tr)]
        y_tr, y_va = y[tr], y[va]
        alpha = None
        for gi, c in enumerate(grid):
            model = train_svm(k_tr, y_tr, float(c), tol=tol, alpha0=alpha)
            alpha = model.dual_coef * y_tr
            errors[gi] += _error_rate(predict(model, k_va), y_va)
    errors /= folds
    best = int(np.argmin(errors))  # argmin takes the first, i.e. smallest C, on ties
    return float(grid[best])
