"""Multi-restart derivative-free maximization of the greedy kernel-selection objective.

The objective at each boosting iteration is the Frobenius match between a
candidate base-kernel Gram matrix and a fixed gradient matrix, optionally
penalized toward bandwidth vectors with equal components. It is smooth but
non-convex in the kernel parameter, so a box-projected Nelder-Mead simplex is
run from several start points and the best local maximum is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramCache, KernelFamily, entries_of


class OptimizerFailure(RuntimeError):
    """Every restart produced a non-finite objective value."""


@dataclass(frozen=True)
class SearchSpace:
    """Axis-aligned box of admissible kernel parameters.

    With ``log_scale`` the simplex moves in log-parameter coordinates, which
    suits bandwidths that range over decades; bounds stay in natural units.
    """

    lo: np.ndarray
    hi: np.ndarray
    log_scale: bool = False

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("bounds must be 1-d vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite")
        if not np.all(lo < hi):
            raise ValueError("need lo < hi in every coordinate")
        if np.any(lo < 0):
            raise ValueError("kernel parameters are nonnegative; lo must be >= 0")
        if self.log_scale and not np.all(lo > 0):
            raise ValueError("log-scale search needs strictly positive lower bounds")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return x.shape == self.lo.shape and bool(
            np.all(x >= self.lo) and np.all(x <= self.hi)
        )

    @classmethod
    def for_family(
        cls, family: KernelFamily, n_features: int, lo: float, hi: float,
        log_scale: bool | None = None,
    ) -> "SearchSpace":
        dim = family.param_length(n_features)
        if log_scale is None:
            log_scale = family.log_scale_default and lo > 0
        return cls(np.full(dim, float(lo)), np.full(dim, float(hi)), log_scale)


@dataclass(frozen=True)
class RestartSchedule:
    """Ordered start points for the local search."""

    starts: tuple

    def __post_init__(self):
        starts = tuple(
            np.atleast_1d(np.asarray(s, dtype=float)) for s in self.starts
        )
        if not starts:
            raise ValueError("need at least one start point")
        object.__setattr__(self, "starts", starts)

    @classmethod
    def single(cls, x0) -> "RestartSchedule":
        return cls((np.atleast_1d(np.asarray(x0, dtype=float)),))

    @classmethod
    def decade_grid(cls, space: SearchSpace) -> "RestartSchedule":
        """Powers of ten from 1e-3 to 1e5 that fall inside a 1-d box.

        Falls back to the box midpoint (geometric midpoint under log scale)
        when no power of ten is admissible.
        """
        if space.dim != 1:
            raise ValueError("decade grid is defined for 1-d parameter spaces")
        points = [10.0**k for k in range(-3, 6)]
        inside = [p for p in points if space.lo[0] <= p <= space.hi[0]]
        if not inside:
            if space.log_scale:
                mid = float(np.sqrt(space.lo[0] * space.hi[0]))
            else:
                mid = float(0.5 * (space.lo[0] + space.hi[0]))
            inside = [mid]
        return cls(tuple(np.array([p]) for p in inside))

    @classmethod
    def uniform_grid(cls, space: SearchSpace, count: int = 11) -> "RestartSchedule":
        """Evenly spaced starts across a 1-d box (log-spaced under log scale).

        A decade grid clumps its starts at the low end of a linear box and can
        leave whole basins of a multimodal objective without any start, so
        linear-scale searches default to this schedule instead.
        """
        if space.dim != 1:
            raise ValueError("uniform grid is defined for 1-d parameter spaces")
        if count < 1:
            raise ValueError("need at least one start")
        if space.log_scale:
            pts = np.exp(np.linspace(np.log(space.lo[0]), np.log(space.hi[0]), count))
        else:
            pts = np.linspace(space.lo[0], space.hi[0], count)
        return cls(tuple(np.array([p]) for p in pts))

    @classmethod
    def default_1d(cls, space: SearchSpace) -> "RestartSchedule":
        """Decade restarts for log-scale boxes, eleven uniform starts otherwise."""
        return cls.decade_grid(space) if space.log_scale else cls.uniform_grid(space)


def make_inner_objective(P, cache: GramCache, family: KernelFamily,
                         shrink_penalty: float = 0.0):
    """Closure computing the kernel-selection objective for one fixed gradient matrix.

    Returns sigma -> <P, K(sigma)> - shrink_penalty * ||sigma - mean(sigma)||^2,
    reusing the cache's pairwise distances across evaluations.
    """
    P = np.ascontiguousarray(entries_of(P))

    def objective(sigma) -> float:
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        value = float(np.vdot(P, cache.gram_entries(family, sigma)))
        if shrink_penalty > 0.0 and sigma.size > 1:
            value -= shrink_penalty * float(np.sum((sigma - sigma.mean()) ** 2))
        return value

    return objective


def inner_objective(sigma, P, X, family: KernelFamily,
                    shrink_penalty: float = 0.0, cache: GramCache | None = None) -> float:
    """One-off evaluation of the kernel-selection objective at ``sigma``."""
    if cache is None:
        cache = GramCache(X)
    return make_inner_objective(P, cache, family, shrink_penalty)(sigma)


def _nelder_mead_max(f, x0, lo, hi, max_evals, edge_frac=0.05, diam_frac=1e-6):
    """Box-projected Nelder-Mead simplex ascent from x0; returns (x, value).

    Classic coefficients: reflection 1, expansion 2, contraction 0.5, shrink
    0.5. Every trial point is clipped into [lo, hi]. Stops when the simplex
    diameter shrinks below ``diam_frac`` of the box width in every coordinate
    or the evaluation budget runs out. The best vertex value never decreases,
    so the result is at least as good as f(x0).
    """
    dim = x0.size
    width = hi - lo

    def feval(x):
        v = f(x)
        return v if np.isfinite(v) else -np.inf

    sim = np.empty((dim + 1, dim))
    sim[0] = x0
    for i in range(dim):
        step = edge_frac * width[i]
        v = x0.copy()
        # step inward when the edge would leave the box, keeping the simplex nondegenerate
        v[i] = x0[i] + step if x0[i] + step <= hi[i] else x0[i] - step
        sim[i + 1] = v
    fvals = np.array([feval(v) for v in sim])
    evals = dim + 1

    while evals < max_evals:
        order = np.argsort(-fvals, kind="stable")
        sim, fvals = sim[order], fvals[order]
        if np.all(np.abs(sim - sim[0]).max(axis=0) <= diam_frac * width):
            break
        centroid = sim[:-1].mean(axis=0)
        worst, f_worst = sim[-1], fvals[-1]
        f_best, f_second = fvals[0], fvals[-2]

        xr = np.clip(centroid + (centroid - worst), lo, hi)
        fr = feval(xr)
        evals += 1
        if fr > f_best:
            xe = np.clip(centroid + 2.0 * (centroid - worst), lo, hi)
            fe = feval(xe)
            evals += 1
            if fe > fr:
                sim[-1], fvals[-1] = xe, fe
            else:
                sim[-1], fvals[-1] = xr, fr
        elif fr > f_second:
            sim[-1], fvals[-1] = xr, fr
        else:
            if fr > f_worst:
                xc = np.clip(centroid + 0.5 * (centroid - worst), lo, hi)
            else:
                xc = np.clip(centroid - 0.5 * (centroid - worst), lo, hi)
            fc = feval(xc)
            evals += 1
            if fc > max(fr, f_worst):
                sim[-1], fvals[-1] = xc, fc
            else:
                sim[1:] = np.clip(sim[0] + 0.5 * (sim[1:] - sim[0]), lo, hi)
                fvals[1:] = [feval(v) for v in sim[1:]]
                evals += dim

    best = int(np.argmax(fvals))
    return sim[best].copy(), float(fvals[best])


def local_maximize(objective, space: SearchSpace, schedule: RestartSchedule,
                   max_evals_per_dim: int = 200):
    """Best local maximum of ``objective`` over the box, across all restarts.

    Restarts whose start value is non-finite are skipped; if every restart is
    skipped an OptimizerFailure is raised. Ties between restarts keep the
    earlier one, so the result is deterministic for a fixed schedule.
    """
    for s in schedule.starts:
        if s.shape != space.lo.shape:
            raise ValueError("start point dimension does not match the space")
    if space.log_scale:
        lo, hi = np.log(space.lo), np.log(space.hi)

        def f(z):
            return objective(np.exp(z))

        starts = [np.log(space.clip(s)) for s in schedule.starts]
    else:
        lo, hi = space.lo, space.hi
        f = objective
        starts = [space.clip(np.asarray(s, dtype=float)) for s in schedule.starts]

    max_evals = max_evals_per_dim * space.dim
    best_x, best_v = None, -np.inf
    for s in starts:
        if not np.isfinite(f(s)):
            continue
        x, v = _nelder_mead_max(f, s, lo, hi, max_evals)
        if v > best_v:
            best_x, best_v = x, v
    if best_x is None:
        raise OptimizerFailure("objective was non-finite at every start point")
    sigma = np.exp(best_x) if space.log_scale else best_x
    return space.clip(sigma), best_v
