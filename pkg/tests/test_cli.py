import json
import os

import numpy as np
import pytest

from alignboost.cli import build_parser, landscape_values, main
from alignboost.kernels import KernelFamily

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

TINY_SINE = """
[dataset]
kind = sine
seed = 3
n_train = 80
n_val = 60
n_test = 60

[optimizer]
max_iters = 6
"""

CSV_CONFIG = """
[dataset]
kind = csv
path = {path}
label_column = label
positive_label = 1
seed = 5
n_train = 100
n_val = 50
n_test = 50

[method]
family = gaussian-shared
grid = 0.5,1,2

[optimizer]
max_iters = 5
"""


def write_config(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def strip_timing(report: dict) -> dict:
    out = dict(report)
    out.pop("stage1_seconds", None)
    out.pop("stage2_seconds", None)
    return out


class TestLearn:
    def test_ca1d_writes_report_and_trace(self, tmp_path):
        cfg = write_config(tmp_path, TINY_SINE)
        out = str(tmp_path / "run")
        assert main(["learn", "--config", cfg, "--method", "ca-1d", "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as fh:
            report = json.load(fh)
        assert report["method"] == "ca-1d"
        assert 0.0 <= report["test_error_pct"] <= 100.0
        assert -1.0 <= report["test_alignment"] <= 1.0
        assert report["combination"]
        assert all(t["weight"] >= 0 for t in report["combination"])
        assert os.path.exists(os.path.join(out, "trace.csv"))
        assert os.path.exists(os.path.join(out, "trace.json"))

    def test_rerun_identical_apart_from_timing(self, tmp_path):
        cfg = write_config(tmp_path, TINY_SINE)
        reports = []
        for name in ("a", "b"):
            out = str(tmp_path / name)
            assert main(["learn", "--config", cfg, "--method", "du", "--out", out]) == 0
            with open(os.path.join(out, "report.json")) as fh:
                reports.append(json.load(fh))
        assert strip_timing(reports[0]) == strip_timing(reports[1])

    def test_du_single_kernel_grid(self, tmp_path):
        cfg = write_config(
            tmp_path,
            TINY_SINE + "\n[method]\nfamily = dirichlet1\ngrid = 2.5\n",
        )
        out = str(tmp_path / "du")
        assert main(["learn", "--config", cfg, "--method", "du", "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as fh:
            report = json.load(fh)
        assert report["combination"] == [{"sigma": [2.5], "weight": 1.0}]

    def test_unknown_method_exits_2_with_usage(self, capsys):
        with pytest.raises(SystemExit) as err:
            build_parser().parse_args(["learn", "--method", "nope", "--out", "x"])
        assert err.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_error_paths_exit_nonzero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[dataset]\nkind = unknown-kind\n")
        code = main(["learn", "--config", cfg, "--method", "du", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_csv_end_to_end(self, tmp_path):
        cfg = write_config(
            tmp_path, CSV_CONFIG.format(path=os.path.join(DATA_DIR, "synthetic200.csv"))
        )
        out = str(tmp_path / "csvrun")
        assert main(["learn", "--config", cfg, "--method", "ca-1d", "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as fh:
            report = json.load(fh)
        assert report["test_error_pct"] <= 50.0  # learnable problem, better than chance

    def test_ca_nd_on_csv(self, tmp_path):
        cfg = write_config(
            tmp_path,
            CSV_CONFIG.format(path=os.path.join(DATA_DIR, "synthetic200.csv"))
            + "\nshrink_penalty = 0.1\n",
        )
        out = str(tmp_path / "nd")
        assert main(["learn", "--config", cfg, "--method", "ca-nd", "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as fh:
            report = json.load(fh)
        assert all(len(t["sigma"]) == 4 for t in report["combination"])

    def test_best_single_on_csv(self, tmp_path):
        cfg = write_config(
            tmp_path, CSV_CONFIG.format(path=os.path.join(DATA_DIR, "synthetic200.csv"))
        )
        out = str(tmp_path / "bs")
        assert main(["learn", "--config", cfg, "--method", "best-single", "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as fh:
            report = json.load(fh)
        assert len(report["combination"]) == 1
        assert report["combination"][0]["sigma"][0] in (0.5, 1.0, 2.0)


class TestLandscape:
    def test_flat_when_state_already_matches_target(self):
        # two opposite-label points: one Gaussian term makes the working
        # matrix proportional to the centered target, the gradient matrix
        # vanishes, and the sweep is flat at zero
        X = np.array([[0.0], [1.0]])
        y = np.array([1.0, -1.0])
        values = landscape_values(
            KernelFamily.GAUSSIAN_SHARED,
            [(np.array([1.0]), 1.0)],
            1e-10, X, y, np.linspace(0.1, 10.0, 25),
        )
        assert np.all(np.abs(values) <= 1e-8)

    def test_steps_two_gives_endpoints(self, tmp_path):
        cfg = write_config(tmp_path, TINY_SINE)
        out = str(tmp_path / "run")
        main(["learn", "--config", cfg, "--method", "ca-1d", "--out", out])
        land = str(tmp_path / "land.csv")
        code = main([
            "landscape", "--config", cfg, "--trace", os.path.join(out, "trace.json"),
            "--iteration", "2", "--sigma-min", "0", "--sigma-max", "10",
            "--steps", "2", "--out", land,
        ])
        assert code == 0
        lines = open(land).read().strip().splitlines()
        assert lines[0] == "sigma,objective"
        assert len(lines) == 3
        assert lines[1].startswith("0.0,")
        assert lines[2].startswith("10.0,")

    def test_first_iteration_minima_near_generating_frequencies(self):
        from alignboost.data import SINE_FREQS, gen_sine_mixture

        train, _, _ = gen_sine_mixture(500, 2, 2, seed=2)
        sigmas = np.linspace(0.0, 10.0, 1001)
        values = landscape_values(
            KernelFamily.DIRICHLET1, [], 1e-10, train.X, train.y, sigmas
        )
        # strict local minima of the flipped objective
        interior = (values[1:-1] < values[:-2]) & (values[1:-1] < values[2:])
        minima = sigmas[1:-1][interior]
        for freq in SINE_FREQS:
            assert np.min(np.abs(minima - freq)) <= 0.25


@pytest.mark.slow
class TestFullSizeLearn:
    def test_ca1d_on_default_sine_is_accurate(self, tmp_path):
        out = str(tmp_path / "full")
        assert main(["learn", "--method", "ca-1d", "--seed", "1", "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as fh:
            report = json.load(fh)
        assert report["test_error_pct"] <= 6.0


class TestReportMerge:
    def test_merges_reports_to_csv(self, tmp_path):
        cfg = write_config(tmp_path, TINY_SINE)
        outs = []
        for i, method in enumerate(("du", "da")):
            out = str(tmp_path / f"r{i}")
            main(["learn", "--config", cfg, "--method", method, "--out", out])
            outs.append(os.path.join(out, "report.json"))
        merged = str(tmp_path / "merged.csv")
        assert main(["report-merge", *outs, "--out", merged]) == 0
        lines = open(merged).read().strip().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("dataset,")


class TestBenchCommands:
    def test_bench_sine_smoke(self, tmp_path):
        cfg = write_config(tmp_path, TINY_SINE)
        out = str(tmp_path / "bench")
        code = main([
            "bench-sine", "--config", cfg, "--repeats", "1", "--seed", "2", "--out", out,
        ])
        assert code == 0
        runs = open(os.path.join(out, "sine_runs.csv")).read().strip().splitlines()
        agg = open(os.path.join(out, "sine_aggregate.csv")).read().strip().splitlines()
        assert len(runs) == 11  # header + 10 methods
        assert len(agg) == 11

    def test_bench_gauss_smoke(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "[dataset]\nn_train = 30\nn_val = 60\nn_test = 60\nn_features = 6\n",
        )
        out = str(tmp_path / "bench")
        code = main([
            "bench-gauss", "--config", cfg, "--gammas", "1", "--repeats", "1",
            "--seed", "2", "--out", out,
        ])
        assert code == 0
        agg = open(os.path.join(out, "gauss_aggregate.csv")).read().strip().splitlines()
        assert any(line.split(",")[0] == "surrogate_gap" for line in agg[1:])
