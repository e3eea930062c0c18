"""Potential and weight functions driving the boosters.

The robust booster uses a time-varying, non-convex potential: a reversed
Gaussian CDF whose center mu(t) and width sigma(t) evolve over an internal
clock t in [0, 1].  At t = 1 the potential has collapsed to a smooth step
at the goal margin, so the average potential approximates the fraction of
examples whose margin falls below that goal.  The weight of an example is
the (unnormalized) negative margin-derivative of its potential:

    Phi(m, t) = 1 - NormalCDF((m - mu(t)) / sigma(t))
    w(m, t)   = exp(-(m - mu(t))^2 / (2 sigma(t)^2))

so w/(-dPhi/dm) = sqrt(2 pi) sigma(t), constant in m.  The dropped
normalizing constant is irrelevant because the boosters renormalize the
weights into a distribution.

The classical convex pairs are also provided: exp(-m) (AdaBoost) and
ln(1 + exp(-m)) with weight 1/(1 + exp(m)) (LogitBoost).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import SolverSettings, normal_cdf, solve_scalar

__all__ = [
    "PotentialKind",
    "RobustBoostParams",
    "sigma_sq",
    "mu",
    "potential",
    "weight",
    "solve_rho",
    "baseline_weight",
    "baseline_potential",
]

RHO_TOL = 1e-9


class PotentialKind(enum.Enum):
    ADABOOST = "adaboost"
    LOGITBOOST = "logitboost"
    ROBUSTBOOST = "robustboost"


def _check_time(t: float) -> float:
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"time must lie in [0, 1], got {t}")
    return t


def sigma_sq(t: float, sigma_f: float) -> float:
    """Squared width of the potential at time t.

    (sigma_f^2 + 1) * exp(2 (1 - t)) - 1: strictly decreasing in t, equal to
    sigma_f^2 at the horizon t = 1.
    """
    t = _check_time(t)
    return (sigma_f * sigma_f + 1.0) * math.exp(2.0 * (1.0 - t)) - 1.0


def mu(t: float, theta: float, rho: float) -> float:
    """Center of the potential at time t: (theta - 2 rho) e^(1-t) + 2 rho.

    Relaxes toward the goal margin theta as t -> 1.
    """
    t = _check_time(t)
    return (theta - 2.0 * rho) * math.exp(1.0 - t) + 2.0 * rho


@dataclass(frozen=True)
class RobustBoostParams:
    """Immutable parameter bundle for the robust booster.

    epsilon is the target error (the fraction of examples the booster may
    give up on), theta the goal margin, sigma_f the slope scale of the
    final potential step, and rho the drift derived from the other three
    via the initial-potential identity potential(0, 0) = epsilon.

    Use :meth:`solve` to construct; direct construction re-validates the
    identity and rejects an inconsistent rho.
    """

    epsilon: float
    theta: float
    sigma_f: float = 0.1
    rho: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.theta < 0.0:
            raise DomainError(f"theta must be >= 0, got {self.theta}")
        if not (self.sigma_f > 0.0):
            raise DomainError(f"sigma_f must be positive, got {self.sigma_f}")
        resid = abs(float(potential(0.0, 0.0, self)) - self.epsilon)
        if resid > RHO_TOL:
            raise DomainError(
                f"rho={self.rho} violates the initial-potential identity: "
                f"|potential(0,0) - epsilon| = {resid:.3e} > {RHO_TOL}"
            )

    @classmethod
    def solve(cls, epsilon: float, theta: float, sigma_f: float = 0.1,
              settings: SolverSettings | None = None) -> "RobustBoostParams":
        """Derive rho from (epsilon, theta, sigma_f) and build the bundle."""
        rho = solve_rho(epsilon, theta, sigma_f, settings)
        return cls(epsilon=epsilon, theta=theta, sigma_f=sigma_f, rho=rho)


def potential(m, t: float, params: RobustBoostParams):
    """Potential of margin m at time t; vectorized over m.

    Strictly decreasing in m, with limits 1 (m -> -inf) and 0 (m -> +inf).
    At t = 1 it approximates the step 1{m <= theta} with slope scale
    sigma_f.
    """
    s = math.sqrt(sigma_sq(t, params.sigma_f))
    c = mu(t, params.theta, params.rho)
    return normal_cdf((c - np.asarray(m, dtype=float)) / s)


def weight(m, t: float, params: RobustBoostParams):
    """Unnormalized example weight at time t; vectorized over m.

    A Gaussian bump of width sigma(t) centered at mu(t), maximal (1) at
    m = mu(t) and proportional to -dPhi/dm.
    """
    s2 = sigma_sq(t, params.sigma_f)
    d = np.asarray(m, dtype=float) - mu(t, params.theta, params.rho)
    return np.exp(-(d * d) / (2.0 * s2))


def solve_rho(epsilon: float, theta: float, sigma_f: float = 0.1,
              settings: SolverSettings | None = None) -> float:
    """Drift rho such that the initial potential at zero margin equals epsilon.

    The residual potential(0, 0) - epsilon is strictly decreasing in rho
    (the CDF argument grows linearly in rho), so a bracketing solve is
    exact.  The bracket [-10, 10] covers every parameterization of
    practical interest and is expanded geometrically otherwise.
    """
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not (sigma_f > 0.0):
        raise DomainError(f"sigma_f must be positive, got {sigma_f}")
    settings = settings or SolverSettings(abs_tol=1e-12, max_iters=200)
    s0 = math.sqrt(sigma_sq(0.0, sigma_f))

    def residual(rho: float) -> float:
        # potential(0, 0) with mu(0) expanded; avoids building params early
        center = (theta - 2.0 * rho) * math.e + 2.0 * rho
        return float(normal_cdf(center / s0)) - epsilon

    return solve_scalar(residual, -10.0, 10.0, settings)


def baseline_weight(kind: PotentialKind, m):
    """Weight function of the convex baselines; vectorized over m.

    exp(-m) for AdaBoost, 1/(1 + exp(m)) for LogitBoost.  The robust
    weight is time-dependent; use :func:`weight` for it.
    """
    m = np.asarray(m, dtype=float)
    if kind is PotentialKind.ADABOOST:
        return np.exp(-m)
    if kind is PotentialKind.LOGITBOOST:
        # expit(-m), written out to keep scipy out of this hot path
        out = np.empty_like(m)
        pos = m >= 0
        out[pos] = np.exp(-m[pos]) / (1.0 + np.exp(-m[pos]))
        out[~pos] = 1.0 / (1.0 + np.exp(m[~pos]))
        return out
    raise DomainError(f"{kind} has a time-dependent weight; use weight(m, t, params)")


def baseline_potential(kind: PotentialKind, m):
    """Potential of the convex baselines: exp(-m) or ln(1 + exp(-m))."""
    m = np.asarray(m, dtype=float)
    if kind is PotentialKind.ADABOOST:
        return np.exp(-m)
    if kind is PotentialKind.LOGITBOOST:
        return np.logaddexp(0.0, -m)
    raise DomainError(f"{kind} has a time-dependent potential; use potential(m, t, params)")
