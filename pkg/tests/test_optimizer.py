import numpy as np
import pytest

from alignboost.alignment import ideal_kernel, target_alignment_grad
from alignboost.data import gen_sine_mixture
from alignboost.kernels import GramCache, KernelFamily, center_entries
from alignboost.optimizer import (
    OptimizerFailure,
    RestartSchedule,
    SearchSpace,
    inner_objective,
    local_maximize,
    make_inner_objective,
)
from oracles import naive_inner_objective


def box(lo, hi, log_scale=False):
    return SearchSpace(np.atleast_1d(np.asarray(lo, float)),
                       np.atleast_1d(np.asarray(hi, float)), log_scale)


class TestSearchSpace:
    def test_validation(self):
        with pytest.raises(ValueError):
            box([2.0], [1.0])
        with pytest.raises(ValueError):
            box([0.0], [1.0], log_scale=True)
        with pytest.raises(ValueError):
            SearchSpace(np.array([0.0, 1.0]), np.array([1.0]))

    def test_clip_and_contains(self):
        s = box([0.0, 1.0], [2.0, 3.0])
        np.testing.assert_array_equal(s.clip(np.array([-1.0, 5.0])), [0.0, 3.0])
        assert s.contains([1.0, 2.0])
        assert not s.contains([1.0, 4.0])

    def test_family_constructor_defaults(self):
        s = SearchSpace.for_family(KernelFamily.GAUSSIAN_PER_DIM, 5, 1e-3, 1e3)
        assert s.dim == 5 and s.log_scale
        s = SearchSpace.for_family(KernelFamily.DIRICHLET1, 5, 0.0, 10.0)
        assert s.dim == 1 and not s.log_scale


class TestSchedules:
    def test_decade_grid_linear_box(self):
        s = RestartSchedule.decade_grid(box([0.0], [10.0]))
        vals = [float(p[0]) for p in s.starts]
        assert vals == [1e-3, 1e-2, 1e-1, 1.0, 10.0]

    def test_decade_grid_log_box(self):
        s = RestartSchedule.decade_grid(box([1e-3], [1e5], log_scale=True))
        assert len(s.starts) == 9

    def test_decade_grid_fallback_midpoint(self):
        s = RestartSchedule.decade_grid(box([2e5], [3e5]))
        assert len(s.starts) == 1
        assert 2e5 <= s.starts[0][0] <= 3e5

    def test_uniform_grid(self):
        s = RestartSchedule.uniform_grid(box([0.0], [10.0]), count=11)
        vals = [float(p[0]) for p in s.starts]
        np.testing.assert_allclose(vals, np.linspace(0, 10, 11))

    def test_default_choice_by_scale(self):
        assert len(RestartSchedule.default_1d(box([0.0], [10.0])).starts) == 11
        assert len(RestartSchedule.default_1d(box([1e-3], [1e5], True)).starts) == 9

    def test_empty_schedule_rejected(self):
        with pytest.raises(ValueError):
            RestartSchedule(())


class TestInnerObjective:
    def test_zero_gradient_matrix(self, rng):
        X = rng.standard_normal((6, 2))
        P = np.zeros((6, 6))
        for family in KernelFamily:
            sigma = np.full(family.param_length(2), 1.0)
            assert inner_objective(sigma, P, X, family) == 0.0

    def test_equal_components_penalty_free(self, rng):
        X = rng.standard_normal((5, 3))
        P = rng.standard_normal((5, 5))
        sigma = np.full(3, 1.7)
        with_pen = inner_objective(sigma, P, X, KernelFamily.GAUSSIAN_PER_DIM, shrink_penalty=5.0)
        without = inner_objective(sigma, P, X, KernelFamily.GAUSSIAN_PER_DIM)
        assert with_pen == without

    def test_penalty_subtracts_spread(self, rng):
        X = rng.standard_normal((5, 2))
        P = rng.standard_normal((5, 5))
        sigma = np.array([1.0, 3.0])
        base = inner_objective(sigma, P, X, KernelFamily.GAUSSIAN_PER_DIM)
        pen = inner_objective(sigma, P, X, KernelFamily.GAUSSIAN_PER_DIM, shrink_penalty=0.25)
        spread = np.sum((sigma - sigma.mean()) ** 2)
        assert pen == pytest.approx(base - 0.25 * spread, rel=1e-12)

    def test_matches_double_loop_oracle(self, rng):
        X = rng.standard_normal((8, 1))
        P = rng.standard_normal((8, 8))
        val = inner_objective([0.8], P, X, KernelFamily.GAUSSIAN_SHARED)
        assert val == pytest.approx(
            naive_inner_objective([0.8], P, X, KernelFamily.GAUSSIAN_SHARED), rel=1e-10
        )

    def test_closure_reuses_cache(self, rng):
        X = rng.standard_normal((6, 1))
        P = rng.standard_normal((6, 6))
        cache = GramCache(X)
        f = make_inner_objective(P, cache, KernelFamily.DIRICHLET1)
        assert f([2.0]) == pytest.approx(
            inner_objective([2.0], P, X, KernelFamily.DIRICHLET1), rel=1e-14
        )

    def test_invalid_parameter_rejected(self, rng):
        X = rng.standard_normal((4, 1))
        P = np.zeros((4, 4))
        with pytest.raises(ValueError):
            inner_objective([0.0], P, X, KernelFamily.GAUSSIAN_SHARED)
        with pytest.raises(ValueError):
            inner_objective([-1.0], P, X, KernelFamily.DIRICHLET1)


class TestLocalMaximize:
    def test_quadratic_peak(self):
        f = lambda s: -((s[0] - 3.0) ** 2)
        x, v = local_maximize(f, box([0.0], [10.0]),
                              RestartSchedule((np.array([1.0]), np.array([8.0]))))
        assert abs(x[0] - 3.0) < 1e-4
        assert v == pytest.approx(0.0, abs=1e-8)

    def test_constant_returns_first_start(self):
        f = lambda s: 7.0
        x, v = local_maximize(f, box([0.0], [10.0]),
                              RestartSchedule((np.array([4.0]), np.array([9.0]))))
        assert v == 7.0
        assert x[0] == pytest.approx(4.0, abs=0.5)  # stays near the first start

    def test_log_scale_peak(self):
        f = lambda s: -((np.log10(s[0]) - 1.0) ** 2)
        x, _ = local_maximize(f, box([1e-3], [1e5], log_scale=True),
                              RestartSchedule.decade_grid(box([1e-3], [1e5], True)))
        assert x[0] == pytest.approx(10.0, rel=1e-3)

    def test_result_inside_box(self):
        f = lambda s: s[0]  # pushes to the upper bound
        x, _ = local_maximize(f, box([0.0], [2.0]), RestartSchedule.single([1.0]))
        assert 0.0 <= x[0] <= 2.0
        assert x[0] == pytest.approx(2.0, abs=1e-5)

    def test_multistart_never_worse_than_starts(self, rng):
        for _ in range(20):
            centers = rng.uniform(0, 10, size=3)
            weights = rng.uniform(0.5, 2.0, size=3)
            f = lambda s: float(np.sum(weights * np.exp(-((s[0] - centers) ** 2))))
            starts = [np.array([v]) for v in rng.uniform(0, 10, size=4)]
            _, v = local_maximize(f, box([0.0], [10.0]), RestartSchedule(tuple(starts)))
            assert v >= max(f(s) for s in starts) - 1e-12

    def test_adding_restarts_monotone(self, rng):
        centers = np.array([2.0, 7.5])
        f = lambda s: float(np.max(-((s[0] - centers) ** 2)))
        a = RestartSchedule((np.array([1.0]),))
        b = RestartSchedule((np.array([1.0]), np.array([8.0])))
        _, va = local_maximize(f, box([0.0], [10.0]), a)
        _, vb = local_maximize(f, box([0.0], [10.0]), b)
        assert vb >= va

    def test_local_maximum_property(self, rng):
        space = box([0.0], [10.0])
        for _ in range(20):
            c1, c2 = rng.uniform(1, 9, size=2)
            f = lambda s: float(np.exp(-((s[0] - c1) ** 2)) + 0.6 * np.exp(-2 * (s[0] - c2) ** 2))
            x, v = local_maximize(f, space, RestartSchedule.uniform_grid(space))
            delta = 1e-5 * 10.0
            for sign in (-1.0, 1.0):
                probe = space.clip(x + sign * delta)
                assert v >= f(probe) - 1e-9

    def test_deterministic_repeats(self, rng):
        X = rng.standard_normal((10, 1))
        P = rng.standard_normal((10, 10))
        P = 0.5 * (P + P.T)
        cache = GramCache(X)
        f = make_inner_objective(P, cache, KernelFamily.DIRICHLET1)
        space = box([0.0], [10.0])
        sched = RestartSchedule.uniform_grid(space)
        x1, v1 = local_maximize(f, space, sched)
        x2, v2 = local_maximize(f, space, sched)
        assert np.array_equal(x1, x2) and v1 == v2

    def test_nonfinite_start_skipped(self):
        calls = []

        def f(s):
            calls.append(float(s[0]))
            return np.nan if s[0] < 1.0 else -((s[0] - 3.0) ** 2)

        x, _ = local_maximize(f, box([0.0], [10.0]),
                              RestartSchedule((np.array([0.5]), np.array([2.0]))))
        assert abs(x[0] - 3.0) < 1e-3

    def test_all_starts_nonfinite(self):
        f = lambda s: np.nan
        with pytest.raises(OptimizerFailure):
            local_maximize(f, box([0.0], [1.0]), RestartSchedule.single([0.5]))

    def test_dimension_mismatch_rejected(self):
        f = lambda s: 0.0
        with pytest.raises(ValueError):
            local_maximize(f, box([0.0, 0.0], [1.0, 1.0]), RestartSchedule.single([0.5]))


class TestFirstIterationLandscape:
    def test_dirichlet_argmax_beats_dense_grid(self):
        # the greedy step's very first search on the sine benchmark data
        train, _, _ = gen_sine_mixture(500, 2, 2, seed=11)
        target = ideal_kernel(train.y)
        work = 1e-10 * np.eye(train.y.size)
        P = center_entries(target_alignment_grad(work, target))
        cache = GramCache(train.X)
        f = make_inner_objective(P, cache, KernelFamily.DIRICHLET1)
        space = box([0.0], [10.0])
        _, found = local_maximize(f, space, RestartSchedule.default_1d(space))
        grid = np.arange(0.0, 10.0001, 0.01)
        dense = max(f([s]) for s in grid)
        assert found >= dense - 1e-6 * abs(dense)
