import math

import numpy as np
import pytest

from robustboost.base_learners import CoordinateLearner, SignedCoordinate, StumpLearner
from robustboost.boosters import (
    DM_MAX,
    Ensemble,
    error_rates,
    margins,
    robustboost_step,
    train_adaboost,
    train_logitboost,
    train_robustboost,
)
from robustboost.data import Dataset, DatasetMeta, gen_long_servedio, gen_mease_wyner
from robustboost.errors import NonTermination
from robustboost.potential import PotentialKind, RobustBoostParams


def make_ds(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    return Dataset(features=X, labels=y, clean_labels=y.copy(),
                   meta=DatasetMeta("fixture", 0.0, None))


def random_pm1_ds(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.choice([-1.0, 1.0], (n, d))
    y = rng.choice([-1, 1], n)
    return make_ds(X, y)


# ---------------------------------------------------------------------------
# grid oracle for one robust step: exhaustive scan of the residual pair over
# the (dt, dm) box, refined around the argmin
# ---------------------------------------------------------------------------


def step_grid_oracle(m, yh, t, params, pts=2000, refinements=2):
    """Nested-bisection brute-force solve of the step equations.

    Independent of the package solver: residuals are recomputed here from
    scipy primitives.  For every dt on a pts-point grid, the second
    residual's root in dm is bracketed on a pts-point dm grid and bisected
    to convergence; the dt whose first residual at that root is smallest in
    magnitude wins, and the dt grid is refined around it ``refinements``
    times.  Returns (dt, dm, max residual at the solution).
    """
    from scipy.special import erfc

    m = np.asarray(m, dtype=float)
    yh = np.asarray(yh, dtype=float)
    th, rho, sf = params.theta, params.rho, params.sigma_f

    def residuals(dt, dm):
        t2 = min(t + dt, 1.0)
        s2 = (sf * sf + 1.0) * math.exp(2.0 * (1.0 - t2)) - 1.0
        center = (th - 2.0 * rho) * math.exp(1.0 - t2) + 2.0 * rho
        dev = m * math.exp(-dt) + yh * dm - center
        r1 = float(np.sum(yh * np.exp(-(dev * dev) / (2.0 * s2))))
        phi = float(np.sum(0.5 * erfc(dev / math.sqrt(2.0 * s2))))
        return r1, phi

    phi0 = residuals(0.0, 0.0)[1]
    dms = np.linspace(0.0, DM_MAX, pts)

    def decorrelation_root(dt):
        vals = [residuals(dt, dm)[0] for dm in dms[:: pts // 100]]
        coarse = dms[:: pts // 100]
        for k in range(len(coarse) - 1):
            if (vals[k] > 0.0) != (vals[k + 1] > 0.0):
                lo, hi = coarse[k], coarse[k + 1]
                flo = vals[k]
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    fm = residuals(dt, mid)[0]
                    if (fm > 0.0) == (flo > 0.0):
                        lo, flo = mid, fm
                    else:
                        hi = mid
                return 0.5 * (lo + hi)
        return None

    lo_dt, hi_dt = 1e-12, 1.0 - t
    best = None
    for _ in range(refinements + 1):
        dts = np.linspace(lo_dt, hi_dt, pts)
        gbest, ibest, dm_best = np.inf, None, None
        for i, dt in enumerate(dts):
            dm = decorrelation_root(dt)
            if dm is None:
                continue
            g = abs(residuals(dt, dm)[1] - phi0)
            if g < gbest:
                gbest, ibest, dm_best = g, i, dm
        if ibest is None:
            raise AssertionError("oracle found no de-correlation root anywhere")
        span = (hi_dt - lo_dt) / (pts - 1)
        best = (float(dts[ibest]), float(dm_best), gbest)
        lo_dt = max(best[0] - 2 * span, 1e-12)
        hi_dt = min(best[0] + 2 * span, 1.0 - t)
    r1, phi = residuals(best[0], best[1])
    return best[0], best[1], max(abs(r1), abs(phi - phi0))


def step_fixture(seed, t=0.0, n=8):
    """A small state with positive correlation for the step solver."""
    rng = np.random.default_rng(seed)
    m = rng.normal(0.0, 0.6, n) if t > 0 else np.zeros(n)
    yh = np.where(rng.random(n) < 0.7, 1.0, -1.0)  # positively correlated
    params = RobustBoostParams.solve(0.14, 0.2, 0.1)
    return m, yh, t, params


# ---------------------------------------------------------------------------
# robust step
# ---------------------------------------------------------------------------


class TestRobustBoostStep:
    def test_interior_step_matches_grid_oracle(self):
        m, yh, t, params = step_fixture(seed=42, t=0.3)
        res = robustboost_step(m, t, yh, params)
        assert not res.boundary
        odt, odm, oz = step_grid_oracle(m, yh, t, params, pts=500)
        assert res.dt == pytest.approx(odt, abs=1e-6)
        assert res.dm == pytest.approx(odm, abs=1e-6)

    def test_residuals_within_tolerance(self):
        m, yh, t, params = step_fixture(seed=1, t=0.0)
        res = robustboost_step(m, t, yh, params)
        tol = 1e-8 * len(m)
        assert abs(res.residuals[1]) <= tol  # conservation
        if not res.boundary:
            assert abs(res.residuals[0]) <= tol  # de-correlation

    def test_margin_update_rule(self):
        m, yh, t, params = step_fixture(seed=2, t=0.1)
        res = robustboost_step(m, t, yh, params)
        expected = m * math.exp(-res.dt) + yh * res.dm
        assert np.array_equal(res.margins, expected)


# ---------------------------------------------------------------------------
# adaboost
# ---------------------------------------------------------------------------


class TestAdaBoost:
    def test_single_round_alpha_closed_form(self):
        # h = column 0 agrees with y on 3 of 4 equally weighted examples:
        # err = 1/4, alpha = ln(3)/2
        X = np.array([
            [1.0, 1.0],
            [1.0, -1.0],
            [1.0, 1.0],
            [-1.0, -1.0],
        ])
        y = np.array([1, 1, 1, 1])
        ens, trace = train_adaboost(make_ds(X, y), CoordinateLearner(), 1)
        assert trace.records[0].weighted_error == pytest.approx(0.25)
        assert ens.terms[0][1] == pytest.approx(0.5 * math.log(3.0), abs=1e-12)

    def test_separable_data_reaches_zero_training_error(self):
        ds = gen_long_servedio(400, 0.0, seed=50)
        ens, trace = train_adaboost(ds, CoordinateLearner(), 300)
        assert error_rates(ens, ds).noisy_error == 0.0

    def test_exponential_loss_non_increasing(self):
        for seed in range(3):
            ds = random_pm1_ds(40, 6, seed=60 + seed)
            _, trace = train_adaboost(ds, CoordinateLearner(), 25)
            losses = [r.avg_potential_before for r in trace.records]
            losses.append(trace.records[-1].avg_potential_after)
            assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_perfect_fit_stops_early(self):
        X = np.array([[1.0], [-1.0], [1.0]])
        y = np.array([1, -1, 1])
        ens, trace = train_adaboost(make_ds(X, y), CoordinateLearner(), 50)
        assert trace.status == "perfect_fit"
        assert trace.iterations == 1
        assert error_rates(ens, make_ds(X, y)).noisy_error == 0.0


# ---------------------------------------------------------------------------
# logitboost
# ---------------------------------------------------------------------------


class TestLogitBoost:
    def test_first_distribution_is_uniform(self):
        seen = {}

        class Spy:
            def __call__(self, wd):
                seen["weights"] = wd.weights.copy()
                return SignedCoordinate(index=0, sign=1)

        X = np.array([[1.0], [1.0], [-1.0], [1.0]])
        y = np.array([1, 1, -1, 1])
        train_logitboost(make_ds(X, y), Spy(), 1)
        assert np.allclose(seen["weights"], 0.25)

    def test_raw_weights_bounded_by_one(self):
        ds = random_pm1_ds(60, 5, seed=70)
        _, trace = train_logitboost(ds, CoordinateLearner(), 20)
        # raw (unnormalized) weights are 1/(1+e^m) <= 1 pointwise; the final
        # margins give the tightest check
        raw = 1.0 / (1.0 + np.exp(trace.final_margins))
        assert np.all(raw <= 1.0)

    def test_logistic_loss_non_increasing(self):
        for seed in range(3):
            ds = random_pm1_ds(50, 6, seed=80 + seed)
            _, trace = train_logitboost(ds, CoordinateLearner(), 25)
            losses = [r.avg_potential_before for r in trace.records]
            losses.append(trace.records[-1].avg_potential_after)
            assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_shrinkage_scales_the_step(self):
        ds = random_pm1_ds(60, 5, seed=90)
        _, t_full = train_logitboost(ds, CoordinateLearner(), 1, shrinkage=1.0)
        _, t_half = train_logitboost(ds, CoordinateLearner(), 1, shrinkage=0.5)
        assert t_half.records[0].coefficient == pytest.approx(
            0.5 * t_full.records[0].coefficient, rel=1e-9
        )


# ---------------------------------------------------------------------------
# robust training
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def ls_run():
    ds = gen_long_servedio(800, 0.1, seed=1001)
    params = RobustBoostParams.solve(0.14, 0.2, 0.1)
    ens, trace = train_robustboost(
        ds, CoordinateLearner(), params, 300, snapshot_iterations=(0, 50)
    )
    return ds, params, ens, trace


class TestTrainRobustBoost:
    def test_reference_settings_terminate(self, ls_run):
        ds, params, ens, trace = ls_run
        assert trace.status == "horizon"
        assert trace.final_t >= 1.0
        assert trace.iterations <= 300

    def test_margin_bookkeeping_identity(self, ls_run):
        # the decayed coefficients reproduce the tracked margins exactly
        ds, params, ens, trace = ls_run
        recomputed = margins(ens, ds).values
        assert np.max(np.abs(recomputed - trace.final_margins)) <= 1e-9

    def test_time_strictly_increases(self, ls_run):
        _, _, _, trace = ls_run
        ts = [0.0] + [r.t for r in trace.records]
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert all(r.dt > 0 for r in trace.records)

    def test_conservation_and_decorrelation_residuals(self, ls_run):
        ds, params, ens, trace = ls_run
        tol = 1e-8 * ds.n
        for r in trace.records:
            assert abs(r.residual_conservation) <= tol
            if not r.boundary:
                assert abs(r.residual_decorrelation) <= tol

    def test_average_potential_conserved_along_run(self, ls_run):
        ds, params, ens, trace = ls_run
        for r in trace.records:
            assert r.avg_potential_after == pytest.approx(
                r.avg_potential_before, abs=1e-8
            )
            assert r.avg_potential_after == pytest.approx(params.epsilon, abs=1e-6)

    def test_goal_margin_fraction_near_error_goal(self, ls_run):
        # at the horizon the average potential (= epsilon) approximates the
        # fraction of margins at or below the goal margin
        ds, params, ens, trace = ls_run
        below = float(np.mean(trace.final_margins <= params.theta))
        assert below <= 2.0 * params.epsilon

    def test_snapshots_recorded(self, ls_run):
        _, _, _, trace = ls_run
        assert set(trace.snapshots) == {0, 50}
        assert np.all(trace.snapshots[0].margins == 0.0)
        assert trace.snapshots[0].t == 0.0

    def test_determinism(self):
        ds = gen_mease_wyner(300, 0.1, seed=1002)
        params = RobustBoostParams.solve(0.2, 1.0, 0.1)
        runs = [train_robustboost(ds, StumpLearner(), params, 60) for _ in range(2)]
        (e1, t1), (e2, t2) = runs
        assert t1.records == t2.records
        assert e1.terms == e2.terms

    def test_strict_raises_non_termination(self):
        ds = gen_long_servedio(200, 0.1, seed=1003)
        params = RobustBoostParams.solve(0.14, 0.2, 0.1)
        with pytest.raises(NonTermination) as info:
            train_robustboost(ds, CoordinateLearner(), params, 3, strict=True)
        assert info.value.iterations == 3
        assert 0.0 < info.value.final_t < 1.0
        assert info.value.ensemble is not None


# ---------------------------------------------------------------------------
# margins and error rates
# ---------------------------------------------------------------------------


class TestMargins:
    def test_single_perfect_term(self):
        X = np.array([[1.0], [-1.0]])
        y = np.array([1, -1])
        ens = Ensemble(
            kind=PotentialKind.ADABOOST,
            terms=((SignedCoordinate(index=0, sign=1), 1.0),),
        )
        got = margins(ens, make_ds(X, y))
        assert np.allclose(got.values, 1.0)
        assert np.allclose(got.normalized, 1.0)

    def test_cancellation(self):
        X = np.array([[1.0], [-1.0]])
        y = np.array([1, -1])
        h = SignedCoordinate(index=0, sign=1)
        ens = Ensemble(kind=PotentialKind.ADABOOST, terms=((h, 1.0), (h, -1.0)))
        got = margins(ens, make_ds(X, y))
        assert np.allclose(got.values, 0.0)

    def test_normalized_margin_in_unit_interval(self):
        rng = np.random.default_rng(100)
        for _ in range(50):
            n, d, k = 20, 4, rng.integers(1, 6)
            ds = random_pm1_ds(n, d, seed=int(rng.integers(1 << 30)))
            terms = tuple(
                (SignedCoordinate(index=int(rng.integers(d)), sign=int(rng.choice([-1, 1]))),
                 float(rng.normal()))
                for _ in range(k)
            )
            ens = Ensemble(kind=PotentialKind.ADABOOST, terms=terms)
            mbar = margins(ens, ds).normalized
            assert np.all(mbar >= -1.0 - 1e-12)
            assert np.all(mbar <= 1.0 + 1e-12)


class TestErrorRates:
    def test_perfect_ensemble_all_zero(self):
        ds = gen_long_servedio(200, 0.0, seed=200)
        # the majority vote as an ensemble of all 21 coordinates
        terms = tuple((SignedCoordinate(index=i, sign=1), 1.0) for i in range(21))
        ens = Ensemble(kind=PotentialKind.ADABOOST, terms=terms)
        r = error_rates(ens, ds, theta=0.0)
        assert (r.noisy_error, r.clean_error, r.below_theta_fraction,
                r.clean_error_above_theta) == (0.0, 0.0, 0.0, 0.0)

    def test_sign_flip_antisymmetry(self):
        ds = gen_long_servedio(200, 0.0, seed=201)
        terms_pos = tuple((SignedCoordinate(index=i, sign=1), 1.0) for i in range(21))
        terms_neg = tuple((SignedCoordinate(index=i, sign=-1), 1.0) for i in range(21))
        pos = error_rates(Ensemble(PotentialKind.ADABOOST, terms_pos), ds)
        neg = error_rates(Ensemble(PotentialKind.ADABOOST, terms_neg), ds)
        assert pos.noisy_error == 0.0
        assert neg.noisy_error == 1.0

    def test_twenty_example_enumeration(self):
        # hand-enumerable fixture: score = x0, theta = 0.5
        X = np.linspace(-0.95, 0.95, 20)[:, None]
        noisy = np.where(np.arange(20) % 3 == 0, -1, 1).astype(np.int64)
        clean = np.ones(20, dtype=np.int64)
        ds = Dataset(features=X, labels=noisy, clean_labels=clean,
                     meta=DatasetMeta("fixture", 0.0, None))
        ens = Ensemble(
            kind=PotentialKind.ADABOOST,
            terms=((SignedCoordinate(index=0, sign=1), 1.0),),
        )
        # score = sign(x0) = -1 for the first 10 rows, +1 for the rest;
        # |score| = 1 everywhere so nothing falls below theta = 0.5
        r = error_rates(ens, ds, theta=0.5)
        mism_noisy = np.sum(np.where(X[:, 0] >= 0, 1, -1) != noisy)
        assert r.noisy_error == pytest.approx(mism_noisy / 20)
        assert r.clean_error == pytest.approx(0.5)
        assert r.below_theta_fraction == 0.0
        assert r.clean_error_above_theta == pytest.approx(0.5)

    def test_empty_above_theta_complement(self):
        X = np.zeros((4, 1))
        y = np.array([1, 1, -1, -1])
        ds = make_ds(X, y)
        ens = Ensemble(kind=PotentialKind.ADABOOST, terms=())
        r = error_rates(ens, ds, theta=0.5)
        assert r.below_theta_fraction == 1.0
        assert r.clean_error_above_theta == 0.0
