"""Training drivers: the robust booster and the two convex baselines.

All three boosters share the same loop shape: reweight the sample from the
current margins, ask the weak learner for a +-1 hypothesis, choose a step,
update margins.  They differ in the weight function and in the step rule:

* adaboost:   D ~ exp(-m),     alpha = (1/2) ln((1 - err) / err)
* logitboost: D ~ 1/(1 + e^m), alpha = shrinkage * argmin of the logistic
              loss along the hypothesis direction (exact line search)
* robustboost: D ~ w(m, t); each step solves a two-equation system for
  (dt > 0, dm > 0): the hypothesis must be de-correlated under the
  advanced weights (or the step reaches the horizon, dt = 1 - t) while the
  total potential is conserved.  Margins then decay and step:
  m' = m e^{-dt} + y h(x) dm.  Training self-terminates when t >= 1.

Per-iteration records and optional margin snapshots are captured in a
BoostTrace for reports and score-distribution exports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import kernels
from .base_learners import BaseHypothesis, WeightedData, predict_batch
from .data import Dataset
from .errors import NoConvergence, BoundaryHit, NonTermination, NoWeakLearner, StepStall
from .numerics import SolverSettings, solve_2d, solve_scalar
from .potential import (
    PotentialKind,
    RobustBoostParams,
    baseline_potential,
    potential,
    weight,
)

__all__ = [
    "Ensemble",
    "BoostTrace",
    "TraceRecord",
    "MarginSnapshot",
    "Margins",
    "ErrorRates",
    "train_adaboost",
    "train_logitboost",
    "train_robustboost",
    "robustboost_step",
    "StepResult",
    "margins",
    "error_rates",
]

DM_MAX = 10.0          # box bound for the step size solve
DELTA_MIN = 1e-9       # dt below this counts toward the stall run
STALL_RUN = 5          # consecutive sub-DELTA_MIN steps before giving up
DM_FLOOR = 1e-12       # dm at or below this is "zero": the step is useless
ERR_FLOOR = 1e-12      # caps the step size when a round is perfect


@dataclass(frozen=True)
class Ensemble:
    """Ordered (hypothesis, coefficient) terms of a trained classifier.

    For the robust booster the stored coefficients already carry the full
    decay, so score(x) reproduces the booster's final combined hypothesis
    exactly and score(x) * y matches the tracked margins.
    """

    kind: PotentialKind
    terms: tuple

    def score(self, X: np.ndarray) -> np.ndarray:
        s = np.zeros(X.shape[0])
        for h, c in self.terms:
            s += c * predict_batch(h, X)
        return s


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    t: float
    dt: float
    coefficient: float
    correlation: float
    weighted_error: float
    avg_potential_before: float
    avg_potential_after: float
    boundary: bool = False
    # robust steps record the solved step equations' residuals
    residual_decorrelation: float = float("nan")
    residual_conservation: float = float("nan")


@dataclass(frozen=True)
class MarginSnapshot:
    iteration: int
    t: float
    margins: np.ndarray


@dataclass
class BoostTrace:
    kind: PotentialKind
    records: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    status: str = "budget"
    final_t: float = float("nan")
    iterations: int = 0
    labels: np.ndarray | None = None
    clean_labels: np.ndarray | None = None
    kinds: np.ndarray | None = None
    failures: list = field(default_factory=list)
    final_margins: np.ndarray | None = None

    @property
    def terminated(self) -> bool:
        """True when a robust run reached its horizon (t >= 1)."""
        return self.status == "horizon"


@dataclass(frozen=True)
class Margins:
    """Unnormalized margins y * score(x) and their L1-normalized view."""

    values: np.ndarray
    normalized: np.ndarray


@dataclass(frozen=True)
class ErrorRates:
    noisy_error: float
    clean_error: float
    below_theta_fraction: float
    clean_error_above_theta: float


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def _alpha_cap() -> float:
    return 0.5 * math.log((1.0 - ERR_FLOOR) / ERR_FLOOR)


def train_adaboost(ds: Dataset, learner, T: int, snapshot_iterations=()):
    """Classical discrete boosting on the exponential potential."""
    return _train_baseline(ds, learner, T, PotentialKind.ADABOOST, 1.0, snapshot_iterations)


def train_logitboost(
    ds: Dataset, learner, T: int, shrinkage: float = 0.25, snapshot_iterations=()
):
    """Coordinate descent on the logistic loss with a damped line search.

    Each round's step is ``shrinkage`` times the exact minimizer of
    sum(ln(1 + exp(-(m + alpha y h)))) along the chosen hypothesis; the
    damping is the usual regularization that keeps long noisy runs from
    over-committing to individual rounds.
    """
    return _train_baseline(
        ds, learner, T, PotentialKind.LOGITBOOST, shrinkage, snapshot_iterations
    )


def _line_search_alpha(m: np.ndarray, yh: np.ndarray) -> float:
    """Exact minimizer of the logistic loss along yh (root of the derivative)."""

    def deriv(a: float) -> float:
        return -float(np.sum(yh * expit(-(m + a * yh))))

    hi = 1.0
    for _ in range(60):
        if deriv(hi) > 0.0:
            break
        hi *= 2.0
    else:
        return _alpha_cap()
    return solve_scalar(
        deriv, 0.0, hi, SolverSettings(abs_tol=1e-10, max_iters=200), expand=False
    )


def _train_baseline(ds, learner, T, kind, shrinkage=1.0, snapshot_iterations=()):
    if T < 1:
        raise ValueError(f"iteration budget must be >= 1, got {T}")
    X = ds.features
    y = ds.labels.astype(float)
    n = ds.n
    m = np.zeros(n)
    hyps: list[BaseHypothesis] = []
    coeffs: list[float] = []
    requested = frozenset(int(i) for i in snapshot_iterations)
    trace = BoostTrace(
        kind=kind,
        labels=ds.labels.copy(),
        clean_labels=ds.clean_labels.copy(),
        kinds=None if ds.meta.kinds is None else ds.meta.kinds.copy(),
    )
    if 0 in requested:
        trace.snapshots[0] = MarginSnapshot(iteration=0, t=float("nan"), margins=m.copy())
    status = "budget"
    for k in range(1, T + 1):
        if kind is PotentialKind.ADABOOST:
            logw = -m - np.max(-m)  # overflow-safe reweighting
            w = np.exp(logw)
        else:
            w = expit(-m)
        D = w / w.sum()
        try:
            h = learner(WeightedData(ds, D))
        except NoWeakLearner as exc:
            trace.failures.append(f"iteration {k}: {exc}")
            status = "no_weak_learner"
            break
        yh = y * predict_batch(h, X)
        corr = float(np.sum(D * yh))
        err = 0.5 * (1.0 - corr)
        pot_before = float(np.mean(baseline_potential(kind, m)))
        if err <= 0.0:
            alpha = _alpha_cap()
            status = "perfect_fit"
        elif kind is PotentialKind.ADABOOST:
            alpha = 0.5 * math.log((1.0 - err) / err)
        else:
            alpha = shrinkage * _line_search_alpha(m, yh)
        m = m + alpha * yh
        hyps.append(h)
        coeffs.append(alpha)
        trace.records.append(
            TraceRecord(
                iteration=k,
                t=float("nan"),
                dt=float("nan"),
                coefficient=alpha,
                correlation=corr,
                weighted_error=err,
                avg_potential_before=pot_before,
                avg_potential_after=float(np.mean(baseline_potential(kind, m))),
            )
        )
        if k in requested:
            trace.snapshots[k] = MarginSnapshot(iteration=k, t=float("nan"), margins=m.copy())
        if status == "perfect_fit":
            break
    trace.status = status
    trace.iterations = len(trace.records)
    trace.final_margins = m.copy()
    ensemble = Ensemble(kind=kind, terms=tuple(zip(hyps, coeffs)))
    return ensemble, trace


# ---------------------------------------------------------------------------
# Robust booster
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepResult:
    dt: float
    dm: float
    margins: np.ndarray
    boundary: bool
    residuals: tuple[float, float]  # (de-correlation, conservation)


def robustboost_step(
    margins_now: np.ndarray,
    t: float,
    yh: np.ndarray,
    params: RobustBoostParams,
    settings: SolverSettings | None = None,
    warm: tuple[float, float] | None = None,
) -> StepResult:
    """One accepted step of the robust booster.

    Solves for (dt, dm) in (0, 1-t] x (0, DM_MAX] such that the total
    potential is conserved and the hypothesis is de-correlated under the
    advanced weights; when the de-correlation equation cannot be satisfied
    before the horizon, the step is pinned to dt = 1 - t and only
    conservation is solved (the horizon alternative of the step rule).

    Raises StepStall when no admissible step exists, which is the signal
    that the error goal is too small for this data.
    """
    n = margins_now.shape[0]
    if settings is None:
        settings = SolverSettings(abs_tol=1e-8 * n, max_iters=200)
    hi_t = 1.0 - t
    if hi_t <= 0.0:
        raise StepStall("no time remains before the horizon")
    th, rho, sf = params.theta, params.rho, params.sigma_f
    m = np.ascontiguousarray(margins_now, dtype=float)
    yh = np.ascontiguousarray(yh, dtype=float)
    _, phi0 = kernels.step_residuals(m, yh, t, 0.0, 0.0, th, rho, sf)

    def F(dt: float, dm: float):
        r1, phi = kernels.step_residuals(m, yh, t, dt, dm, th, rho, sf)
        return (phi - phi0, r1)  # (conservation, de-correlation)

    if warm is None:
        warm = (0.01, 0.1)
    init = (min(max(warm[0], 1e-6), hi_t), min(max(warm[1], 1e-6), DM_MAX))
    box = ((0.0, hi_t), (0.0, DM_MAX))
    try:
        res = solve_2d(F, init, box, settings)
        dt, dm = res.x, res.y
        r_cons, r_dec = res.residuals
    except (BoundaryHit, NoConvergence):
        # No interior de-correlated conserving step: either conservation has
        # slack all the way to the horizon (take the horizon step) or the
        # horizon itself admits no conserving dm (StepStall from below).
        dt, dm, r_cons, r_dec = _horizon_step(F, hi_t, settings)
    if dt <= 0.0 or dm <= DM_FLOOR:
        raise StepStall(
            f"solved step (dt={dt}, dm={dm}) is degenerate; error goal too small"
        )
    new_margins = m * math.exp(-dt) + yh * dm
    return StepResult(
        dt=dt,
        dm=dm,
        margins=new_margins,
        boundary=(dt == hi_t),
        residuals=(r_dec, r_cons),
    )


def _horizon_step(F, hi_t: float, settings: SolverSettings):
    """dt pinned to the horizon: smallest dm > 0 conserving the potential."""

    def cons(dm: float) -> float:
        return F(hi_t, dm)[0]

    grid = np.linspace(0.0, DM_MAX, 257)
    prev = cons(grid[0])
    for g_prev, g_next in zip(grid, grid[1:]):
        cur = cons(g_next)
        if prev == 0.0 and g_prev > 0.0:
            dm = float(g_prev)
            break
        if (prev > 0.0) != (cur > 0.0):
            dm = solve_scalar(cons, float(g_prev), float(g_next), settings, expand=False)
            break
        prev = cur
    else:
        raise StepStall("no conserving step size exists at the horizon")
    r_cons, r_dec = F(hi_t, dm)
    return hi_t, dm, r_cons, r_dec


def train_robustboost(
    ds: Dataset,
    learner,
    params: RobustBoostParams,
    max_iters: int,
    snapshot_iterations=(),
    settings: SolverSettings | None = None,
    strict: bool = False,
):
    """Run the robust booster until t >= 1 or the budget is exhausted.

    Returns (ensemble, trace) in every case; the trace's ``status`` field
    records how the run ended ("horizon" on success).  With ``strict`` a
    failed run raises NonTermination instead, carrying the partial results.
    Ensemble coefficients absorb the e^{-dt} decay every step, so the
    ensemble's score reproduces the tracked margins exactly.
    """
    if max_iters < 1:
        raise ValueError(f"iteration budget must be >= 1, got {max_iters}")
    X = ds.features
    y = ds.labels.astype(float)
    n = ds.n
    m = np.zeros(n)
    t = 0.0
    hyps: list[BaseHypothesis] = []
    coeffs = np.zeros(0)
    requested = frozenset(int(i) for i in snapshot_iterations)
    trace = BoostTrace(
        kind=PotentialKind.ROBUSTBOOST,
        labels=ds.labels.copy(),
        clean_labels=ds.clean_labels.copy(),
        kinds=None if ds.meta.kinds is None else ds.meta.kinds.copy(),
    )
    if 0 in requested:
        trace.snapshots[0] = MarginSnapshot(iteration=0, t=0.0, margins=m.copy())
    status = "max_iters"
    warm = None
    stall_run = 0
    k = 0
    while t < 1.0 and k < max_iters:
        k += 1
        w = weight(m, t, params)
        Z = float(w.sum())
        if not (Z > 0.0) or not np.isfinite(Z):
            trace.failures.append(f"iteration {k}: weights vanished (Z={Z})")
            status = "stall"
            k -= 1
            break
        D = w / Z
        try:
            h = learner(WeightedData(ds, D))
        except NoWeakLearner as exc:
            trace.failures.append(f"iteration {k}: {exc}")
            status = "no_weak_learner"
            k -= 1
            break
        yh = y * predict_batch(h, X)
        corr = float(np.sum(D * yh))
        if warm is None:
            warm = (min(0.01, 1.0 - t), max(0.5 * corr, 1e-3))
        pot_before = float(np.mean(potential(m, t, params)))
        try:
            step = robustboost_step(m, t, yh, params, settings, warm)
        except StepStall as exc:
            trace.failures.append(f"iteration {k}: {exc}")
            status = "stall"
            k -= 1
            break
        coeffs = coeffs * math.exp(-step.dt)
        coeffs = np.append(coeffs, step.dm)
        hyps.append(h)
        m = step.margins
        t = 1.0 if step.boundary else t + step.dt
        warm = (max(step.dt, 1e-6), max(step.dm, 1e-6))
        trace.records.append(
            TraceRecord(
                iteration=k,
                t=t,
                dt=step.dt,
                coefficient=step.dm,
                correlation=corr,
                weighted_error=0.5 * (1.0 - corr),
                avg_potential_before=pot_before,
                avg_potential_after=float(np.mean(potential(m, t, params))),
                boundary=step.boundary,
                residual_decorrelation=step.residuals[0],
                residual_conservation=step.residuals[1],
            )
        )
        if k in requested:
            trace.snapshots[k] = MarginSnapshot(iteration=k, t=t, margins=m.copy())
        stall_run = stall_run + 1 if step.dt < DELTA_MIN else 0
        if stall_run >= STALL_RUN:
            trace.failures.append(
                f"iteration {k}: {STALL_RUN} consecutive steps below {DELTA_MIN}"
            )
            status = "stall"
            break
    if t >= 1.0:
        status = "horizon"
    trace.status = status
    trace.final_t = t
    trace.iterations = k
    trace.final_margins = m.copy()
    ensemble = Ensemble(
        kind=PotentialKind.ROBUSTBOOST, terms=tuple(zip(hyps, coeffs.tolist()))
    )
    if strict and status != "horizon":
        raise NonTermination(
            f"robust boosting stopped at t={t} after {k} iterations ({status})",
            final_t=t,
            iterations=k,
            ensemble=ensemble,
            trace=trace,
        )
    return ensemble, trace


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def margins(ensemble: Ensemble, ds: Dataset) -> Margins:
    """Margins of the ensemble on a dataset, raw and L1-normalized."""
    s = ensemble.score(ds.features)
    mvals = ds.labels * s
    norm = sum(abs(c) for _, c in ensemble.terms)
    if norm > 0.0:
        mbar = mvals / norm
    else:
        mbar = np.zeros_like(mvals)
    return Margins(values=mvals, normalized=mbar)


def error_rates(ensemble: Ensemble, ds: Dataset, theta: float = 0.0) -> ErrorRates:
    """Error rates against the noisy and clean labels plus low-margin stats.

    ``below_theta_fraction`` is the fraction of examples whose |score| is
    below theta; ``clean_error_above_theta`` is the clean-label error on
    the complement (0 when the complement is empty).
    """
    s = ensemble.score(ds.features)
    noisy = float(np.mean(s * ds.labels <= 0.0))
    clean = float(np.mean(s * ds.clean_labels <= 0.0))
    below = np.abs(s) < theta
    frac_below = float(np.mean(below))
    above = ~below
    if above.any():
        clean_above = float(np.mean((s * ds.clean_labels <= 0.0)[above]))
    else:
        clean_above = 0.0
    return ErrorRates(
        noisy_error=noisy,
        clean_error=clean,
        below_theta_fraction=frac_below,
        clean_error_above_theta=clean_above,
    )
