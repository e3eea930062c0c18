import math

import numpy as np
import pytest
from scipy.integrate import quad

from robustboost.errors import BoundaryHit, DomainError, NoBracket, NoConvergence
from robustboost.numerics import (
    SolverSettings,
    _nested_2d,
    erf_lower,
    normal_cdf,
    solve_2d,
    solve_scalar,
)


class TestErfLower:
    def test_zero_is_half(self):
        assert erf_lower(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_saturation(self):
        assert abs(erf_lower(20.0) - 1.0) <= 1e-15
        assert erf_lower(-20.0) <= 1e-15

    def test_quadrature_oracle_at_one(self):
        # independent oracle: direct quadrature of the defining integral
        val, err = quad(lambda x: math.exp(-x * x) / math.sqrt(math.pi), -np.inf, 1.0)
        assert err < 1e-9
        assert erf_lower(1.0) == pytest.approx(val, abs=1e-9)
        # frozen value from the oracle above
        assert erf_lower(1.0) == pytest.approx(0.9213503964748574, abs=1e-12)

    def test_monotone_on_random_pairs(self):
        # range chosen so neither tail saturates to exactly 0 or 1 in float64
        rng = np.random.default_rng(7)
        a = np.sort(rng.uniform(-5, 5, size=(10_000, 2)), axis=1)
        lo, hi = a[:, 0], a[:, 1]
        distinct = lo < hi
        assert np.all(erf_lower(lo[distinct]) < erf_lower(hi[distinct]))

    def test_symmetry(self):
        a = np.linspace(-6, 6, 481)
        assert np.max(np.abs(erf_lower(a) + erf_lower(-a) - 1.0)) <= 1e-12

    def test_matches_normal_cdf_convention(self):
        a = np.linspace(-5, 5, 101)
        assert np.allclose(erf_lower(a), normal_cdf(a * math.sqrt(2.0)), atol=1e-14)


class TestSolverSettings:
    def test_defaults(self):
        s = SolverSettings()
        assert s.abs_tol == 1e-10
        assert s.max_iters == 200
        assert s.bracket_expansion_limit == 60

    @pytest.mark.parametrize("kwargs", [
        {"abs_tol": 0.0},
        {"abs_tol": -1e-3},
        {"max_iters": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            SolverSettings(**kwargs)


class TestSolveScalar:
    def test_linear(self):
        assert solve_scalar(lambda x: x - 0.5, 0.0, 1.0) == pytest.approx(0.5, abs=1e-10)

    def test_sqrt_two(self):
        root = solve_scalar(lambda x: x * x - 2.0, 0.0, 2.0)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-9)

    def test_result_in_bracket_with_small_residual(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            c = rng.uniform(-2, 2)
            f = lambda x: math.tanh(x) - math.tanh(c)  # noqa: E731
            x = solve_scalar(f, -3.0, 3.0)
            assert -3.0 <= x <= 3.0
            assert abs(f(x)) <= 1e-10

    def test_no_bracket(self):
        with pytest.raises(NoBracket):
            solve_scalar(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_bracket_expansion_finds_outside_root(self):
        x = solve_scalar(lambda x: x - 37.5, 0.0, 1.0)
        assert x == pytest.approx(37.5, abs=1e-9)

    def test_no_convergence_on_jump(self):
        # sign change with no root: |f| can never reach the tolerance
        f = lambda x: 1.0 if x >= 0.3 else -1.0  # noqa: E731
        with pytest.raises(NoConvergence):
            solve_scalar(f, 0.0, 1.0)


class TestSolve2D:
    def test_decoupled_linear(self):
        res = solve_2d(
            lambda x, y: (x - 1.0, y - 2.0), (5.0, 5.0), ((0.0, 10.0), (0.0, 10.0))
        )
        assert res.x == pytest.approx(1.0, abs=1e-9)
        assert res.y == pytest.approx(2.0, abs=1e-9)

    def test_circle_line(self):
        res = solve_2d(
            lambda x, y: (x * x + y * y - 1.0, x - y),
            (1.5, 0.2),
            ((0.0, 2.0), (0.0, 2.0)),
        )
        assert res.x == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-8)
        assert res.y == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-8)

    @pytest.mark.parametrize("F,box", [
        (lambda x, y: (x - 1.0, y - 2.0), ((0.0, 10.0), (0.0, 10.0))),
        (lambda x, y: (x * x + y * y - 1.0, x - y), ((0.0, 2.0), (0.0, 2.0))),
        (lambda x, y: (math.exp(x) - 2.0 + 0.1 * y, y * y * y - 0.5), ((0.0, 2.0), (0.0, 2.0))),
    ])
    def test_newton_and_nested_agree(self, F, box):
        settings = SolverSettings(abs_tol=1e-10, max_iters=200)
        a = solve_2d(F, (0.4, 0.6), box, settings)
        b = _nested_2d(F, box, settings)
        assert abs(a.x - b.x) <= 1e-6
        assert abs(a.y - b.y) <= 1e-6

    def test_boundary_hit_when_root_outside_box(self):
        # root at x = 2 but the box caps x at 1: pinned to the high face
        with pytest.raises(BoundaryHit) as info:
            _nested_2d(
                lambda x, y: (x - 2.0, y - 1.0),
                ((0.0, 1.0), (0.0, 3.0)),
                SolverSettings(abs_tol=1e-10),
            )
        assert info.value.face == (0, "hi")
        assert info.value.point[0] == pytest.approx(1.0)

    def test_residuals_meet_tolerance(self):
        settings = SolverSettings(abs_tol=1e-9)
        res = solve_2d(
            lambda x, y: (math.sin(x) - 0.3, math.cos(y) - 0.7),
            (0.5, 0.5),
            ((0.0, 1.5), (0.0, 1.5)),
            settings,
        )
        assert max(abs(r) for r in res.residuals) <= 1e-9
