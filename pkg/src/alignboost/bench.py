"""Benchmark harnesses: sine-mixture frequency study and the 50-d relevance study.

Both benchmarks follow the two-stage protocol: learn a kernel combination on
the training split, pick the SVM regularization constant on the validation
split, and report misclassification and centered alignment on the test split.
Repeats use seeds seed0, seed0+1, ... and can run in parallel processes;
row order is always by repeat index, so outputs are reproducible.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .alignment import centered_alignment, ideal_kernel
from .baselines import KernelGrid, fit_align_discrete, fit_uniform
from .data import SINE_FREQS, gen_gauss50, gen_sine_mixture
from .fsam import KernelCombination, LearnerConfig, evaluate_combination, fit_greedy_alignment
from .kernels import KernelFamily
from .optimizer import RestartSchedule, SearchSpace
from .svm import predict, select_c_holdout

RUN_COLUMNS = [
    "dataset", "gamma", "method", "seed", "test_error_pct", "test_alignment",
    "stage1_seconds", "stage2_seconds", "c", "lambda", "n_terms", "combination",
]

AGG_COLUMNS = [
    "kind", "dataset", "gamma", "method", "method_b", "repeats",
    "mean_error_pct", "stderr_error_pct", "mean_alignment", "stderr_alignment",
    "mean_stage1_seconds", "mean_stage2_seconds", "note",
]

GAUSS_GAMMAS = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0)
LAMBDA_GRID = tuple(10.0**k for k in range(-5, 15))


def combination_text(comb: KernelCombination) -> str:
    """Compact one-cell rendering of (sigma, weight) terms for CSV output."""
    parts = []
    for sigma, mu in comb.terms:
        sig = ",".join(f"{v:.6g}" for v in sigma)
        parts.append(f"{sig}:{mu:.6g}")
    return ";".join(parts)


def _stage2(comb, train, val, test, c_grid=None) -> dict:
    """Train the SVM stage on a fixed combination and measure test metrics."""
    tic = time.perf_counter()
    k_train = evaluate_combination(comb, train.X)
    k_val = evaluate_combination(comb, train.X, val.X)
    c, model = select_c_holdout(k_train, train.y, k_val, val.y, c_grid=c_grid)
    k_test = evaluate_combination(comb, train.X, test.X)
    error = 100.0 * float(np.mean(predict(model, k_test) != test.y))
    align = centered_alignment(
        evaluate_combination(comb, test.X), ideal_kernel(test.y).centered
    )
    return {
        "test_error_pct": error,
        "test_alignment": align,
        "stage2_seconds": time.perf_counter() - tic,
        "c": c,
    }


def _row(dataset, method, seed, comb, stage1_seconds, stage2, gamma="", lam=""):
    row = {
        "dataset": dataset,
        "gamma": gamma,
        "method": method,
        "seed": seed,
        "stage1_seconds": stage1_seconds,
        "lambda": lam,
        "n_terms": len(comb),
        "combination": combination_text(comb),
    }
    row.update(stage2)
    return row


def sine_learner_config() -> LearnerConfig:
    """Greedy-learner settings for the sine benchmark: Dirichlet frequencies on [0, 10]."""
    return LearnerConfig(
        family=KernelFamily.DIRICHLET1,
        space=SearchSpace(np.array([0.0]), np.array([10.0])),
    )


def run_sine_repeat(seed: int, n_train: int = 500, n_val: int = 500,
                    n_test: int = 1000) -> list:
    """All sine-benchmark methods on one seeded draw; returns one row per method."""
    train, val, test = gen_sine_mixture(n_train, n_val, n_test, seed=seed)
    rows = []

    tic = time.perf_counter()
    comb, _trace = fit_greedy_alignment(train.X, train.y, sine_learner_config())
    t_fit = time.perf_counter() - tic
    rows.append(_row("sine", "ca-1d", seed, comb, t_fit, _stage2(comb, train, val, test)))

    grid10 = KernelGrid.from_sigmas(KernelFamily.DIRICHLET1, [float(s) for s in range(10)])
    tic = time.perf_counter()
    comb = fit_uniform(grid10)
    t_fit = time.perf_counter() - tic
    rows.append(_row("sine", "du-grid10", seed, comb, t_fit, _stage2(comb, train, val, test)))

    tic = time.perf_counter()
    comb = fit_align_discrete(grid10, train.X, train.y)
    t_fit = time.perf_counter() - tic
    rows.append(_row("sine", "da-grid10", seed, comb, t_fit, _stage2(comb, train, val, test)))

    f1, f2, f3 = SINE_FREQS
    dictionaries = [
        ("single-sqrt2", [f1]),
        ("single-sqrt12", [f2]),
        ("single-sqrt60", [f3]),
        ("pair-sqrt2-sqrt12", [f1, f2]),
        ("pair-sqrt2-sqrt60", [f1, f3]),
        ("pair-sqrt12-sqrt60", [f2, f3]),
        ("triple-uniform", [f1, f2, f3]),
    ]
    for method, freqs in dictionaries:
        tic = time.perf_counter()
        comb = fit_uniform(KernelGrid.from_sigmas(KernelFamily.DIRICHLET1, freqs))
        t_fit = time.perf_counter() - tic
        rows.append(_row("sine", method, seed, comb, t_fit, _stage2(comb, train, val, test)))
    return rows


def gauss_shared_config() -> LearnerConfig:
    """Shared-bandwidth Gaussian search over [1e-3, 1e5] with decade restarts."""
    space = SearchSpace(np.array([1e-3]), np.array([1e5]), log_scale=True)
    return LearnerConfig(family=KernelFamily.GAUSSIAN_SHARED, space=space)


def gauss_perdim_config(n_features: int, start_sigma: float, shrink_penalty: float) -> LearnerConfig:
    """Per-coordinate bandwidth search started from one equal-components vector."""
    space = SearchSpace(
        np.full(n_features, 1e-3), np.full(n_features, 1e5), log_scale=True
    )
    start = np.full(n_features, float(np.clip(start_sigma, 1e-3, 1e5)))
    return LearnerConfig(
        family=KernelFamily.GAUSSIAN_PER_DIM,
        space=space,
        shrink_penalty=shrink_penalty,
        schedule=RestartSchedule.single(start),
    )


def weighted_mean_sigma(comb: KernelCombination, fallback: float = 10.0) -> float:
    """Weight-averaged scalar parameter of a 1-d combination."""
    if len(comb) == 0:
        return fallback
    weights = comb.weights
    values = np.array([float(s[0]) for s in comb.sigmas])
    return float(np.sum(weights * values) / np.sum(weights))


def gauss50_grid() -> KernelGrid:
    """Fifty shared-bandwidth Gaussian kernels, geometric from 1e-3 to 1e3."""
    return KernelGrid.from_range(KernelFamily.GAUSSIAN_SHARED, 1e-3, 1e3, 50, "geometric")


def fit_perdim_tuned(train, val, start_sigma: float, lambdas=LAMBDA_GRID):
    """Per-dim fit for every shrinkage weight; keep the best validation alignment.

    Returns (combination, lambda). Ties keep the smaller lambda.
    """
    target_val = ideal_kernel(val.y)
    best = None
    for lam in lambdas:
        config = gauss_perdim_config(train.X.shape[1], start_sigma, float(lam))
        comb, _ = fit_greedy_alignment(train.X, train.y, config)
        if len(comb) == 0:
            continue
        score = centered_alignment(
            evaluate_combination(comb, val.X), target_val.centered
        )
        if best is None or score > best[0]:
            best = (score, float(lam), comb)
    if best is None:
        raise RuntimeError("per-dim search failed for every shrinkage weight")
    return best[2], best[1]


def run_gauss_repeat(gamma: float, seed: int, lambdas=LAMBDA_GRID,
                     n_train: int = 50, n_val: int = 1000, n_test: int = 1000,
                     n_features: int = 50) -> list:
    """All 50-d benchmark methods on one seeded draw for one relevance exponent."""
    train, val, test = gen_gauss50(
        gamma, n_features=n_features, n_train=n_train, n_val=n_val, n_test=n_test, seed=seed
    )
    dataset = f"gauss{n_features}"
    rows = []

    tic = time.perf_counter()
    comb_1d, _ = fit_greedy_alignment(train.X, train.y, gauss_shared_config())
    t_1d = time.perf_counter() - tic
    rows.append(
        _row(dataset, "ca-1d", seed, comb_1d, t_1d, _stage2(comb_1d, train, val, test), gamma=gamma)
    )

    tic = time.perf_counter()
    start_sigma = weighted_mean_sigma(comb_1d)
    comb_nd, lam = fit_perdim_tuned(train, val, start_sigma, lambdas=lambdas)
    t_nd = time.perf_counter() - tic
    rows.append(
        _row(dataset, "ca-nd", seed, comb_nd, t_nd, _stage2(comb_nd, train, val, test),
             gamma=gamma, lam=lam)
    )

    grid = gauss50_grid()
    tic = time.perf_counter()
    comb = fit_uniform(grid)
    t_fit = time.perf_counter() - tic
    rows.append(
        _row(dataset, "du-grid50", seed, comb, t_fit, _stage2(comb, train, val, test), gamma=gamma)
    )

    tic = time.perf_counter()
    comb = fit_align_discrete(grid, train.X, train.y)
    t_fit = time.perf_counter() - tic
    rows.append(
        _row(dataset, "da-grid50", seed, comb, t_fit, _stage2(comb, train, val, test), gamma=gamma)
    )
    return rows


def _run_indexed(args):
    fn, kwargs = args
    return fn(**kwargs)


def _run_many(fn, kwargs_list, threads: int) -> list:
    """Run repeats, optionally in parallel processes, preserving submit order."""
    if threads <= 1:
        return [fn(**kw) for kw in kwargs_list]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_indexed, [(fn, kw) for kw in kwargs_list]))


def aggregate_rows(rows: list) -> list:
    """Mean and standard-error rows per (dataset, gamma, method) group."""
    groups: dict = {}
    order = []
    for row in rows:
        key = (row["dataset"], row["gamma"], row["method"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        members = groups[key]
        errors = np.array([m["test_error_pct"] for m in members], dtype=float)
        aligns = np.array([m["test_alignment"] for m in members], dtype=float)
        r = len(members)
        stderr = lambda v: float(np.std(v, ddof=1) / np.sqrt(r)) if r > 1 else 0.0
        out.append({
            "kind": "aggregate",
            "dataset": key[0],
            "gamma": key[1],
            "method": key[2],
            "method_b": "",
            "repeats": r,
            "mean_error_pct": float(errors.mean()),
            "stderr_error_pct": stderr(errors),
            "mean_alignment": float(aligns.mean()),
            "stderr_alignment": stderr(aligns),
            "mean_stage1_seconds": float(np.mean([m["stage1_seconds"] for m in members])),
            "mean_stage2_seconds": float(np.mean([m["stage2_seconds"] for m in members])),
            "note": "",
        })
    return out


def surrogate_gap_rows(agg: list) -> list:
    """Method pairs where higher mean test alignment comes with higher mean test error.

    Alignment is a stand-in for the error we actually care about, so these
    rows are where the stand-in ordering misleads; emits an explicit
    placeholder row when no such pair exists.
    """
    out = []
    by_gamma: dict = {}
    for row in agg:
        if row["kind"] == "aggregate":
            by_gamma.setdefault((row["dataset"], row["gamma"]), []).append(row)
    for (dataset, gamma), members in by_gamma.items():
        for a in members:
            for b in members:
                if a is b:
                    continue
                if (
                    a["mean_alignment"] > b["mean_alignment"]
                    and a["mean_error_pct"] > b["mean_error_pct"]
                ):
                    out.append({
                        "kind": "surrogate_gap",
                        "dataset": dataset,
                        "gamma": gamma,
                        "method": a["method"],
                        "method_b": b["method"],
                        "repeats": a["repeats"],
                        "mean_error_pct": a["mean_error_pct"] - b["mean_error_pct"],
                        "stderr_error_pct": "",
                        "mean_alignment": a["mean_alignment"] - b["mean_alignment"],
                        "stderr_alignment": "",
                        "mean_stage1_seconds": "",
                        "mean_stage2_seconds": "",
                        "note": "higher alignment but higher error",
                    })
    if not out:
        out.append({
            "kind": "surrogate_gap",
            "dataset": "", "gamma": "", "method": "", "method_b": "", "repeats": "",
            "mean_error_pct": "", "stderr_error_pct": "",
            "mean_alignment": "", "stderr_alignment": "",
            "mean_stage1_seconds": "", "mean_stage2_seconds": "",
            "note": "not observed",
        })
    return out


def write_csv(path, rows: list, columns: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in columns})


def bench_sine(repeats: int = 10, seed0: int = 1, out_dir=None, threads: int = 1,
               n_train: int = 500, n_val: int = 500, n_test: int = 1000):
    """Sine benchmark over seeded repeats; returns (per-run rows, aggregate rows)."""
    kwargs = [
        {"seed": seed0 + i, "n_train": n_train, "n_val": n_val, "n_test": n_test}
        for i in range(repeats)
    ]
    rows = [row for batch in _run_many(run_sine_repeat, kwargs, threads) for row in batch]
    agg = aggregate_rows(rows)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, "sine_runs.csv"), rows, RUN_COLUMNS)
        write_csv(os.path.join(out_dir, "sine_aggregate.csv"), agg, AGG_COLUMNS)
    return rows, agg


def bench_gauss(gammas=GAUSS_GAMMAS, repeats: int = 10, seed0: int = 1, out_dir=None,
                threads: int = 1, lambdas=LAMBDA_GRID, n_train: int = 50,
                n_val: int = 1000, n_test: int = 1000, n_features: int = 50):
    """50-d relevance benchmark; returns (rows, aggregate rows incl. surrogate-gap lines)."""
    kwargs = [
        {
            "gamma": float(g), "seed": seed0 + i, "lambdas": lambdas,
            "n_train": n_train, "n_val": n_val, "n_test": n_test,
            "n_features": n_features,
        }
        for g in gammas
        for i in range(repeats)
    ]
    rows = [row for batch in _run_many(run_gauss_repeat, kwargs, threads) for row in batch]
    means = aggregate_rows(rows)
    agg = means + surrogate_gap_rows(means)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, "gauss_runs.csv"), rows, RUN_COLUMNS)
        write_csv(os.path.join(out_dir, "gauss_aggregate.csv"), agg, AGG_COLUMNS)
    return rows, agg
