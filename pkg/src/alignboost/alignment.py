"""Centered alignment against the label kernel, its matrix gradient, and the exact step search.

The learning objective for a candidate Gram matrix K is the cosine of the angle,
in Frobenius inner-product space, between K and the centered label kernel built
from the training responses. The gradient of that objective and the optimal
step size along a fixed direction both have closed forms used by the greedy
learner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix, center_entries, entries_of


class DegenerateTargetError(ValueError):
    """Single-class labels center to the zero matrix; alignment is undefined."""


class DegenerateAlignmentError(ValueError):
    """A zero centered Gram matrix has no direction to align."""


@dataclass(frozen=True)
class TargetKernel:
    """Label kernel Y Y^T with its centered version and centered norm."""

    raw: GramMatrix
    centered: GramMatrix
    norm_c: float

    @property
    def n(self) -> int:
        return self.raw.n


def ideal_kernel(y) -> TargetKernel:
    """Rank-one label kernel of a vector of -1/+1 responses."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 2:
        raise ValueError("need at least two labeled points")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.all(y == y[0]):
        raise DegenerateTargetError("all labels identical; centered target is zero")
    raw = np.outer(y, y)
    centered = center_entries(raw)
    norm_c = float(np.linalg.norm(centered))
    if norm_c <= 0.0:
        raise DegenerateTargetError("centered target has zero norm")
    return TargetKernel(
        raw=GramMatrix(raw, centered=False),
        centered=GramMatrix(centered, centered=True),
        norm_c=norm_c,
    )


def _centered_entries(K) -> np.ndarray:
    """Entries of K, centered unless the input is flagged as already centered."""
    if isinstance(K, GramMatrix) and K.centered:
        return K.entries
    return center_entries(entries_of(K))


def centered_alignment(K, other) -> float:
    """Cosine similarity of two Gram matrices after centering both.

    Inputs flagged centered are used as-is; anything else is centered first.
    The value lies in [-1, 1] and is invariant to positive rescaling and to
    adding a constant to all entries of either argument.
    """
    a = _centered_entries(K)
    b = _centered_entries(other)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na <= 0.0 or nb <= 0.0:
        raise DegenerateAlignmentError("centered matrix is zero; alignment undefined")
    value = float(np.vdot(a, b)) / (na * nb)
    return min(1.0, max(-1.0, value))


def _trusted_centered(K) -> np.ndarray:
    """Entries of an input the caller guarantees to be centered.

    GramMatrix inputs must carry the centered flag; raw arrays are trusted,
    which lets the greedy learner pass its working matrix (centered terms plus
    a vanishing identity seed) without re-centering.
    """
    if isinstance(K, GramMatrix):
        if not K.centered:
            raise ValueError("expected a centered Gram matrix (flag not set)")
        return K.entries
    return np.asarray(K, dtype=float)


def target_alignment(K, target: TargetKernel) -> float:
    """Alignment objective of a centered Gram matrix against the centered label kernel."""
    k = _trusted_centered(K)
    nk = float(np.linalg.norm(k))
    if nk <= 0.0:
        raise DegenerateAlignmentError("zero matrix has undefined alignment")
    value = float(np.vdot(k, target.centered.entries)) / (nk * target.norm_c)
    return min(1.0, max(-1.0, value))


def target_alignment_grad(K, target: TargetKernel) -> np.ndarray:
    """Matrix gradient of ``target_alignment`` at a centered K.

    The objective is scale invariant, so the gradient is always orthogonal to
    K in the Frobenius inner product. It vanishes exactly when K is a positive
    multiple of the centered label kernel.
    """
    k = _trusted_centered(K)
    tc = target.centered.entries
    nk2 = float(np.vdot(k, k))
    if nk2 <= 0.0:
        raise DegenerateAlignmentError("zero matrix has undefined alignment")
    nk = np.sqrt(nk2)
    scale = float(np.vdot(k, tc)) / nk2
    return (tc - scale * k) / (nk * target.norm_c)


def _step_candidates(a: float, b: float, c: float, d: float, e: float, max_step: float):
    """Candidate step sizes for maximizing (a + b*t) / sqrt(c + 2*d*t + e*t^2).

    The ratio has at most one interior extremum, at t = (a*d - b*c)/(b*d - a*e)
    when that denominator is nonzero; the constrained maximizer over
    [0, max_step] is therefore one of {0, clamped interior root, max_step}.
    """
    denom = b * d - a * e
    if denom != 0.0:
        t_star = max(0.0, (a * d - b * c) / denom)
    else:
        t_star = 0.0
    t_star = min(max(t_star, 0.0), max_step)
    return (0.0, t_star, max_step)


def _best_eta(a, b, c, d, e, max_step, norm_scale, tie_tol=1e-12):
    def value(t):
        q = c + 2.0 * d * t + e * t * t
        if q <= 0.0:
            return -np.inf
        return (a + b * t) / (np.sqrt(q) * norm_scale)

    best_t, best_v = None, -np.inf
    for t in sorted(set(_step_candidates(a, b, c, d, e, max_step))):
        v = value(t)
        if v > best_v + tie_tol:  # ascending order keeps the smallest tied step
            best_t, best_v = t, v
    return float(best_t)


def optimal_step(K, direction, target: TargetKernel, max_step: float) -> float:
    """Step size in [0, max_step] maximizing alignment of ``K + step * direction``.

    Both K and the direction must be centered; K must be nonzero. Ties within
    1e-12 of the best value resolve to the smallest candidate step, so a
    direction parallel to K yields 0.
    """
    if max_step <= 0.0:
        raise ValueError("max_step must be positive")
    k = _trusted_centered(K)
    kd = _trusted_centered(direction)
    tc = target.centered.entries
    a = float(np.vdot(k, tc))
    b = float(np.vdot(kd, tc))
    c = float(np.vdot(k, k))
    d = float(np.vdot(k, kd))
    e = float(np.vdot(kd, kd))
    if c <= 0.0:
        raise DegenerateAlignmentError("zero matrix has undefined alignment")
    return _best_eta(a, b, c, d, e, max_step, target.norm_c)
