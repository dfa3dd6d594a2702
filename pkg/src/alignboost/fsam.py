"""Greedy forward-stagewise learning of a nonnegative kernel combination.

Each iteration picks, from the continuously parameterized family, the base
kernel whose centered Gram matrix best matches the current alignment gradient,
then takes the exact best step along it. The loop stops once an iteration
fails to improve the alignment objective by more than the configured gain, or
after the iteration cap.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .alignment import (
    ideal_kernel,
    optimal_step,
    target_alignment,
    target_alignment_grad,
)
from .kernels import GramCache, GramMatrix, KernelFamily, center_entries
from .optimizer import (
    RestartSchedule,
    SearchSpace,
    local_maximize,
    make_inner_objective,
)


@dataclass(frozen=True)
class KernelCombination:
    """Learned kernel  sum_i mu_i * kernel(sigma_i)  with nonnegative weights."""

    family: KernelFamily
    terms: tuple  # of (sigma: ndarray, mu: float)

    def __post_init__(self):
        cleaned = []
        for sigma, mu in self.terms:
            mu = float(mu)
            if mu < 0:
                raise ValueError("combination weights must be nonnegative")
            cleaned.append((np.atleast_1d(np.asarray(sigma, dtype=float)), mu))
        object.__setattr__(self, "terms", tuple(cleaned))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def sigmas(self) -> list:
        return [s for s, _ in self.terms]

    @property
    def weights(self) -> np.ndarray:
        return np.array([m for _, m in self.terms])


def evaluate_combination(comb: KernelCombination, X, X2=None):
    """Materialize the uncentered combination kernel on data.

    Returns the train GramMatrix for X alone, or the plain cross matrix with
    rows of X2 against columns of X.
    """
    if len(comb) == 0:
        raise ValueError("cannot evaluate an empty kernel combination")
    cache = GramCache(X, X2)
    total = None
    for sigma, mu in comb.terms:
        g = cache.gram_entries(comb.family, sigma)
        total = mu * g if total is None else total + mu * g
    return total if X2 is not None else GramMatrix(total, centered=False)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    sigma: np.ndarray
    inner_value: float
    step: float
    objective: float
    seconds: float
    accepted: bool
    centering_residual: float


@dataclass
class FitTrace:
    """Per-iteration log of a greedy fit; serializable to CSV and JSON."""

    family: KernelFamily
    init_scale: float
    records: list = field(default_factory=list)

    def accepted_terms(self, upto: int | None = None):
        """(sigma, step) pairs of accepted iterations with index < upto."""
        out = []
        for r in self.records:
            if upto is not None and r.iteration >= upto:
                break
            if r.accepted:
                out.append((r.sigma, r.step))
        return out

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    def to_json(self, path) -> None:
        payload = {
            "family": self.family.value,
            "init_scale": self.init_scale,
            "records": [
                {
                    "iteration": r.iteration,
                    "sigma": [float(v) for v in r.sigma],
                    "inner_value": r.inner_value,
                    "eta": r.step,
                    "objective": r.objective,
                    "seconds": r.seconds,
                    "accepted": r.accepted,
                    "centering_residual": r.centering_residual,
                }
                for r in self.records
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "FitTrace":
        with open(path) as fh:
            payload = json.load(fh)
        trace = cls(KernelFamily(payload["family"]), float(payload["init_scale"]))
        for r in payload["records"]:
            trace.records.append(
                IterationRecord(
                    iteration=int(r["iteration"]),
                    sigma=np.asarray(r["sigma"], dtype=float),
                    inner_value=float(r["inner_value"]),
                    step=float(r["eta"]),
                    objective=float(r["objective"]),
                    seconds=float(r["seconds"]),
                    accepted=bool(r["accepted"]),
                    centering_residual=float(r["centering_residual"]),
                )
            )
        return trace

    def to_csv(self, path) -> None:
        dim = self.records[0].sigma.size if self.records else 1
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration"]
                + [f"sigma_{i + 1}" for i in range(dim)]
                + ["eta", "objective", "seconds", "accepted", "inner_value", "centering_residual"]
            )
            for r in self.records:
                writer.writerow(
                    [r.iteration]
                    + [repr(float(v)) for v in r.sigma]
                    + [repr(r.step), repr(r.objective), repr(r.seconds),
                       int(r.accepted), repr(r.inner_value), repr(r.centering_residual)]
                )


@dataclass
class LearnerConfig:
    """Settings of the greedy alignment learner.

    ``schedule=None`` selects the default decade restart grid for 1-d
    parameter spaces; multi-dimensional searches must say where to start
    (a single data-derived start point is the usual choice).
    """

    family: KernelFamily
    space: SearchSpace
    max_iters: int = 50
    init_scale: float = 1e-10
    min_gain: float = 1e-3
    max_step: float = 1.0
    shrink_penalty: float = 0.0
    schedule: RestartSchedule | None = None
    max_evals_per_dim: int = 200

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.init_scale <= 0:
            raise ValueError("init_scale must be positive")
        if self.min_gain < 0:
            raise ValueError("min_gain must be nonnegative")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.shrink_penalty < 0:
            raise ValueError("shrink_penalty must be nonnegative")

    def resolved_schedule(self) -> RestartSchedule:
        if self.schedule is not None:
            return self.schedule
        if self.space.dim == 1:
            return RestartSchedule.default_1d(self.space)
        raise ValueError(
            "multi-dimensional searches need an explicit restart schedule"
        )


def fit_greedy_alignment(X, y, config: LearnerConfig):
    """Learn a kernel combination by forward-stagewise alignment maximization.

    Args:
        X: n x d training inputs.
        y: length-n labels in {-1, +1}, both classes present.
        config: learner settings; the search space dimension must match the
            family's parameter length for d features.

    Returns:
        (KernelCombination, FitTrace). The combination holds one
        (sigma, step) term per accepted iteration; the iteration that
        triggered termination is logged in the trace but contributes no term.
        The scaled-identity seed of the working matrix is an optimization
        device only and is never part of the returned kernel.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    target = ideal_kernel(y)
    n = target.n
    if X.shape[0] != n:
        raise ValueError("feature rows do not match label count")
    dim = config.family.param_length(X.shape[1])
    if config.space.dim != dim:
        raise ValueError(
            f"search space has dim {config.space.dim}, family needs {dim}"
        )
    schedule = config.resolved_schedule()
    cache = GramCache(X)

    K = config.init_scale * np.eye(n)
    f_prev = target_alignment(K, target)
    trace = FitTrace(config.family, config.init_scale)
    terms = []

    for t in range(1, config.max_iters + 1):
        tic = time.perf_counter()
        grad = target_alignment_grad(K, target)
        P = center_entries(grad)
        grad_norm = float(np.linalg.norm(grad))
        residual = (
            float(np.linalg.norm(P - grad)) / grad_norm if grad_norm > 0 else 0.0
        )
        objective = make_inner_objective(P, cache, config.family, config.shrink_penalty)
        sigma, inner_value = local_maximize(
            objective, config.space, schedule, config.max_evals_per_dim
        )
        direction = center_entries(cache.gram_entries(config.family, sigma))
        if not terms:
            # The combination is still empty and the objective is scale
            # invariant, so every positive step is equivalent; take the
            # largest admissible one to fix the overall kernel scale, unless
            # even that fails to improve on the seed. Running the ratio
            # search against the vanishing identity seed instead would
            # return a step at the seed's own scale.
            eta = config.max_step
            if target_alignment(K + eta * direction, target) <= f_prev:
                eta = 0.0
        else:
            eta = optimal_step(K, direction, target, config.max_step)
        K_new = K + eta * direction
        f_new = target_alignment(K_new, target)
        accepted = f_new > f_prev + config.min_gain
        trace.records.append(
            IterationRecord(
                iteration=t,
                sigma=sigma,
                inner_value=inner_value,
                step=eta,
                objective=f_new,
                seconds=time.perf_counter() - tic,
                accepted=accepted,
                centering_residual=residual,
            )
        )
        if not accepted:
            break
        terms.append((sigma, eta))
        K, f_prev = K_new, f_new

    comb = KernelCombination(
        config.family, tuple((s, m) for s, m in terms if m > 0.0)
    )
    return comb, trace


def accumulate_kernel(family: KernelFamily, terms, init_scale: float, X) -> np.ndarray:
    """Rebuild the greedy loop's working matrix from logged terms.

    Scaled identity seed plus the centered Gram of every (sigma, step) term;
    used to recompute iteration states, e.g. for objective landscape dumps.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    cache = GramCache(X)
    K = init_scale * np.eye(X.shape[0])
    for sigma, mu in terms:
        K = K + mu * center_entries(cache.gram_entries(family, sigma))
    return K
