"""Command-line front end: learn on a dataset, run benchmarks, dump objective landscapes.

Configuration is an INI file with [dataset], [method], [optimizer] and [svm]
sections; every learner default is pinned in DEFAULT_CONFIG and can be
overridden per run. Reports are JSON (one object per run), traces and
benchmark tables are CSV.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time

import numpy as np

from .alignment import ideal_kernel, target_alignment_grad
from .baselines import KernelGrid, best_single, fit_align_discrete, fit_uniform
from .bench import (
    GAUSS_GAMMAS,
    RUN_COLUMNS,
    _stage2,
    bench_gauss,
    bench_sine,
    combination_text,
    weighted_mean_sigma,
    write_csv,
)
from .data import SplitSpec, gen_gauss50, gen_sine_mixture, load_csv, split
from .fsam import (
    FitTrace,
    KernelCombination,
    LearnerConfig,
    accumulate_kernel,
    fit_greedy_alignment,
)
from .kernels import GramCache, KernelFamily, center_entries
from .optimizer import RestartSchedule, SearchSpace

METHODS = ("ca-1d", "ca-nd", "du", "da", "best-single")

DEFAULT_CONFIG = {
    "dataset": {
        "kind": "sine",
        "seed": "1",
        "n_train": "500",
        "n_val": "500",
        "n_test": "1000",
        "gamma": "0",
        "n_features": "50",
        "path": "",
        "label_column": "label",
        "positive_label": "1",
    },
    "method": {
        "family": "",  # empty -> dirichlet1 for sine, gaussian otherwise
        "grid": "",  # comma list of sigma values for du/da/best-single
        "grid_min": "1e-3",
        "grid_max": "1e3",
        "grid_count": "50",
        "grid_spacing": "geometric",
    },
    "optimizer": {
        "max_iters": "50",
        "init_scale": "1e-10",
        "min_gain": "1e-3",
        "max_step": "1",
        "shrink_penalty": "0",
        "space_min": "",  # empty -> family default box
        "space_max": "",
        "log_scale": "auto",
        "max_evals_per_dim": "200",
    },
    "svm": {
        "c_grid": "",  # empty -> the default half-decade grid
        "folds": "0",  # 0 -> holdout selection on the validation split
    },
}


def read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.read_dict(DEFAULT_CONFIG)
    if path:
        with open(path) as fh:
            parser.read_file(fh)
    return parser


def config_echo(cfg: configparser.ConfigParser) -> dict:
    return {section: dict(cfg[section]) for section in cfg.sections()}


def _resolve_dataset(cfg, kind_override=None, seed_override=None):
    section = cfg["dataset"]
    kind = kind_override or section["kind"]
    seed = int(seed_override if seed_override is not None else section.getint("seed"))
    n_train = section.getint("n_train")
    n_val = section.getint("n_val")
    n_test = section.getint("n_test")
    if kind == "sine":
        return gen_sine_mixture(n_train, n_val, n_test, seed=seed), seed
    if kind == "gauss50":
        return (
            gen_gauss50(
                section.getfloat("gamma"),
                n_features=section.getint("n_features"),
                n_train=n_train, n_val=n_val, n_test=n_test, seed=seed,
            ),
            seed,
        )
    if kind == "csv" or kind.endswith(".csv"):
        path = section["path"] if kind == "csv" else kind
        label = section["label_column"]
        try:
            label = int(label)
        except ValueError:
            pass
        ds = load_csv(path, label, section["positive_label"])
        spec = SplitSpec(n_train, n_val, n_test, seed=seed)
        return split(ds, spec), seed
    raise ValueError(f"unknown dataset kind {kind!r}")


def _family_for(cfg) -> KernelFamily:
    name = cfg["method"]["family"]
    if name:
        return KernelFamily(name)
    return (
        KernelFamily.DIRICHLET1
        if cfg["dataset"]["kind"] == "sine"
        else KernelFamily.GAUSSIAN_SHARED
    )


def _space_for(cfg, family: KernelFamily, n_features: int) -> SearchSpace:
    opt = cfg["optimizer"]
    if opt["space_min"]:
        lo, hi = opt.getfloat("space_min"), opt.getfloat("space_max")
    elif family is KernelFamily.DIRICHLET1:
        lo, hi = 0.0, 10.0
    else:
        lo, hi = 1e-3, 1e5
    log_scale = None if opt["log_scale"] == "auto" else opt.getboolean("log_scale")
    return SearchSpace.for_family(family, n_features, lo, hi, log_scale)


def _learner_config(cfg, family: KernelFamily, n_features: int,
                    schedule=None) -> LearnerConfig:
    opt = cfg["optimizer"]
    return LearnerConfig(
        family=family,
        space=_space_for(cfg, family, n_features),
        max_iters=opt.getint("max_iters"),
        init_scale=opt.getfloat("init_scale"),
        min_gain=opt.getfloat("min_gain"),
        max_step=opt.getfloat("max_step"),
        shrink_penalty=opt.getfloat("shrink_penalty"),
        schedule=schedule,
        max_evals_per_dim=opt.getint("max_evals_per_dim"),
    )


def _grid_for(cfg, family: KernelFamily) -> KernelGrid:
    section = cfg["method"]
    if section["grid"]:
        values = [float(v) for v in section["grid"].split(",") if v.strip()]
        return KernelGrid.from_sigmas(family, values)
    return KernelGrid.from_range(
        family,
        section.getfloat("grid_min"),
        section.getfloat("grid_max"),
        section.getint("grid_count"),
        section["grid_spacing"],
    )


def _c_grid(cfg):
    text = cfg["svm"]["c_grid"]
    if not text:
        return None
    return np.array([float(v) for v in text.split(",") if v.strip()])


def run_learn(cfg, method: str, seed_override=None, dataset_override=None) -> tuple:
    """Run one method end to end; returns (report dict, FitTrace or None)."""
    (train, val, test), seed = _resolve_dataset(cfg, dataset_override, seed_override)
    family = _family_for(cfg)
    c_grid = _c_grid(cfg)
    trace = None

    tic = time.perf_counter()
    if method == "ca-1d":
        config = _learner_config(cfg, family if family is not KernelFamily.GAUSSIAN_PER_DIM else KernelFamily.GAUSSIAN_SHARED, train.X.shape[1])
        comb, trace = fit_greedy_alignment(train.X, train.y, config)
    elif method == "ca-nd":
        if family is KernelFamily.DIRICHLET1:
            raise ValueError("ca-nd needs a Gaussian family")
        shared = _learner_config(cfg, KernelFamily.GAUSSIAN_SHARED, train.X.shape[1])
        comb_1d, _ = fit_greedy_alignment(train.X, train.y, shared)
        start = np.full(train.X.shape[1], np.clip(weighted_mean_sigma(comb_1d), 1e-3, 1e5))
        config = _learner_config(
            cfg, KernelFamily.GAUSSIAN_PER_DIM, train.X.shape[1],
            schedule=RestartSchedule.single(start),
        )
        comb, trace = fit_greedy_alignment(train.X, train.y, config)
    elif method == "du":
        comb = fit_uniform(_grid_for(cfg, family))
    elif method == "da":
        comb = fit_align_discrete(_grid_for(cfg, family), train.X, train.y)
    elif method == "best-single":
        params = best_single(_grid_for(cfg, family), train.X, train.y, val.X, val.y, c_grid)
        comb = KernelCombination(family, ((params.sigma, 1.0),))
    else:
        raise ValueError(f"unknown method {method!r}")
    stage1_seconds = time.perf_counter() - tic

    if len(comb) == 0:
        raise RuntimeError("learner returned an empty kernel combination")
    stage2 = _stage2(comb, train, val, test, c_grid=c_grid)
    report = {
        "method": method,
        "dataset": train.name,
        "seed": seed,
        "config": config_echo(cfg),
        "test_error_pct": stage2["test_error_pct"],
        "test_alignment": stage2["test_alignment"],
        "c": stage2["c"],
        "stage1_seconds": stage1_seconds,
        "stage2_seconds": stage2["stage2_seconds"],
        "combination": [
            {"sigma": [float(v) for v in s], "weight": float(m)} for s, m in comb.terms
        ],
    }
    return report, trace


def _write_report(report: dict, trace, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    if trace is not None:
        trace_csv = os.path.join(out_dir, "trace.csv")
        trace.to_csv(trace_csv)
        trace.to_json(os.path.join(out_dir, "trace.json"))
        report = dict(report, trace=trace_csv)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_learn(args) -> int:
    cfg = read_config(args.config)
    report, trace = run_learn(cfg, args.method, args.seed, args.dataset)
    _write_report(report, trace, args.out)
    print(os.path.join(args.out, "report.json"))
    return 0


def cmd_bench_sine(args) -> int:
    cfg = read_config(args.config)
    ds = cfg["dataset"]
    bench_sine(
        repeats=args.repeats, seed0=args.seed, out_dir=args.out, threads=args.threads,
        n_train=ds.getint("n_train"), n_val=ds.getint("n_val"), n_test=ds.getint("n_test"),
    )
    print(os.path.join(args.out, "sine_aggregate.csv"))
    return 0


def cmd_bench_gauss(args) -> int:
    cfg = read_config(args.config)
    ds = cfg["dataset"]
    gammas = (
        tuple(float(v) for v in args.gammas.split(",")) if args.gammas else GAUSS_GAMMAS
    )
    bench_gauss(
        gammas=gammas, repeats=args.repeats, seed0=args.seed, out_dir=args.out,
        threads=args.threads,
        n_train=ds.getint("n_train"), n_val=ds.getint("n_val"),
        n_test=ds.getint("n_test"), n_features=ds.getint("n_features"),
    )
    print(os.path.join(args.out, "gauss_aggregate.csv"))
    return 0


def landscape_values(family: KernelFamily, terms, init_scale: float, X, y,
                     sigmas) -> np.ndarray:
    """Flipped greedy objective -<K(sigma), P> across a 1-d parameter sweep."""
    work = accumulate_kernel(family, terms, init_scale, X)
    target = ideal_kernel(y)
    P = center_entries(target_alignment_grad(work, target))
    cache = GramCache(X)
    return np.array(
        [-float(np.vdot(P, cache.gram_entries(family, [s]))) for s in sigmas]
    )


def cmd_landscape(args) -> int:
    cfg = read_config(args.config)
    (train, _val, _test), _seed = _resolve_dataset(cfg, args.dataset, args.seed)
    trace = FitTrace.from_json(args.trace)
    if args.steps < 2:
        raise ValueError("need at least 2 steps")
    terms = trace.accepted_terms(upto=args.iteration)
    sigmas = np.linspace(args.sigma_min, args.sigma_max, args.steps)
    values = landscape_values(
        trace.family, terms, trace.init_scale, train.X, train.y, sigmas
    )
    with open(args.out, "w") as fh:
        fh.write("sigma,objective\n")
        for s, v in zip(sigmas, values):
            fh.write(f"{float(s)!r},{float(v)!r}\n")
    print(args.out)
    return 0


def cmd_report_merge(args) -> int:
    rows = []
    for path in args.reports:
        with open(path) as fh:
            report = json.load(fh)
        comb = KernelCombination(
            KernelFamily.DIRICHLET1,  # family is irrelevant for the text rendering
            tuple((np.asarray(t["sigma"]), t["weight"]) for t in report["combination"]),
        )
        rows.append({
            "dataset": report["dataset"],
            "gamma": "",
            "method": report["method"],
            "seed": report["seed"],
            "test_error_pct": report["test_error_pct"],
            "test_alignment": report["test_alignment"],
            "stage1_seconds": report["stage1_seconds"],
            "stage2_seconds": report["stage2_seconds"],
            "c": report["c"],
            "lambda": "",
            "n_terms": len(report["combination"]),
            "combination": combination_text(comb),
        })
    write_csv(args.out, rows, RUN_COLUMNS)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignboost",
        description="Two-stage kernel learning over continuous kernel families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="run one method on one dataset")
    learn.add_argument("--config", default="", help="INI config file")
    learn.add_argument("--method", required=True, choices=METHODS)
    learn.add_argument("--dataset", default=None, help="override dataset kind or CSV path")
    learn.add_argument("--seed", type=int, default=None)
    learn.add_argument("--out", required=True, help="output directory")
    learn.set_defaults(fn=cmd_learn)

    bsine = sub.add_parser("bench-sine", help="sine-mixture benchmark")
    bsine.add_argument("--config", default="")
    bsine.add_argument("--repeats", type=int, default=10)
    bsine.add_argument("--seed", type=int, default=1)
    bsine.add_argument("--threads", type=int, default=1)
    bsine.add_argument("--out", required=True)
    bsine.set_defaults(fn=cmd_bench_sine)

    bgauss = sub.add_parser("bench-gauss", help="50-d relevance benchmark")
    bgauss.add_argument("--config", default="")
    bgauss.add_argument("--gammas", default="", help="comma list, default 0,1,2,5,10,20,40")
    bgauss.add_argument("--repeats", type=int, default=10)
    bgauss.add_argument("--seed", type=int, default=1)
    bgauss.add_argument("--threads", type=int, default=1)
    bgauss.add_argument("--out", required=True)
    bgauss.set_defaults(fn=cmd_bench_gauss)

    land = sub.add_parser("landscape", help="dump the greedy objective over a sigma sweep")
    land.add_argument("--config", default="")
    land.add_argument("--dataset", default=None)
    land.add_argument("--seed", type=int, default=None)
    land.add_argument("--trace", required=True, help="trace.json from a learn run")
    land.add_argument("--iteration", type=int, required=True,
                      help="rebuild the state before this iteration")
    land.add_argument("--sigma-min", type=float, required=True)
    land.add_argument("--sigma-max", type=float, required=True)
    land.add_argument("--steps", type=int, default=200)
    land.add_argument("--out", required=True)
    land.set_defaults(fn=cmd_landscape)

    merge = sub.add_parser("report-merge", help="merge JSON reports into one CSV")
    merge.add_argument("reports", nargs="+")
    merge.add_argument("--out", required=True)
    merge.set_defaults(fn=cmd_report_merge)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # surface module errors as a diagnostic, not a traceback
        print(f"alignboost: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
