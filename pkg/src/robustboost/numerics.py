"""Scalar special functions and safeguarded root solvers.

Everything here is a pure function of its arguments and is safe to call
concurrently.  The two solvers implement deliberately boring, bracketing
strategies: bisection is the correctness contract, Newton is only an
accelerator for the 2-D solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

from .errors import BoundaryHit, DomainError, NoBracket, NoConvergence

__all__ = [
    "SolverSettings",
    "erf_lower",
    "normal_cdf",
    "solve_scalar",
    "solve_2d",
    "Solve2DResult",
]


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and iteration budgets for the root solvers.

    ``abs_tol`` is an absolute residual tolerance: a solve is accepted when
    |f(x)| <= abs_tol (per component in the 2-D case).  Callers working with
    sums over N samples should pass an N-scaled tolerance.
    """

    abs_tol: float = 1e-10
    max_iters: int = 200
    bracket_expansion_limit: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0.0):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.bracket_expansion_limit < 0:
            raise DomainError("bracket_expansion_limit must be >= 0")


DEFAULT_SETTINGS = SolverSettings()


def erf_lower(a):
    """Error-function variant accumulated from -infinity.

    erf_lower(a) = (1/sqrt(pi)) * integral of exp(-x^2) over (-inf, a].

    This is a rescaled Gaussian CDF, not the conventional error function:
    erf_lower(a) = Phi(a * sqrt(2)) where Phi is the standard normal CDF.
    It rises from 0 at -inf to 1 at +inf with erf_lower(0) = 1/2.
    Computed via erfc to stay accurate in both tails.
    """
    return 0.5 * erfc(-np.asarray(a, dtype=float))


def normal_cdf(x):
    """Standard normal CDF, stable in both tails."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))


def _expand_bracket(f, lo: float, hi: float, limit: int):
    """Grow [lo, hi] geometrically about its midpoint until f changes sign."""
    flo, fhi = f(lo), f(hi)
    for _ in range(limit + 1):
        if flo == 0.0:
            return lo, lo, flo, flo
        if fhi == 0.0:
            return hi, hi, fhi, fhi
        if (flo > 0.0) != (fhi > 0.0):
            return lo, hi, flo, fhi
        mid = 0.5 * (lo + hi)
        half = hi - mid
        lo, hi = mid - 2.0 * half, mid + 2.0 * half
        flo, fhi = f(lo), f(hi)
    raise NoBracket(f"no sign change found in expanded interval [{lo}, {hi}]")


def solve_scalar(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    settings: SolverSettings = DEFAULT_SETTINGS,
    expand: bool = True,
) -> float:
    """Find x in [lo, hi] with |f(x)| <= settings.abs_tol by bisection.

    Requires f(lo) and f(hi) to have opposite signs; if they do not and
    ``expand`` is set, the interval is grown (up to
    ``bracket_expansion_limit`` doublings) until a sign change appears.

    Raises NoBracket if no sign change is found and NoConvergence if the
    residual tolerance is not met within ``max_iters`` bisections.
    """
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if abs(flo) <= settings.abs_tol:
        return lo
    if abs(fhi) <= settings.abs_tol:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        if not expand:
            raise NoBracket(f"f({lo})={flo} and f({hi})={fhi} have the same sign")
        lo, hi, flo, fhi = _expand_bracket(f, lo, hi, settings.bracket_expansion_limit)
        if lo == hi:
            return lo

    best_x, best_f = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    for _ in range(settings.max_iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break  # interval collapsed to adjacent floats
        fmid = f(mid)
        if abs(fmid) < abs(best_f):
            best_x, best_f = mid, fmid
        if abs(fmid) <= settings.abs_tol:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    if abs(best_f) <= settings.abs_tol:
        return best_x
    raise NoConvergence(
        f"bisection stalled at x={best_x} with |f(x)|={abs(best_f)} > {settings.abs_tol}",
        point=best_x,
        residuals=best_f,
    )


@dataclass(frozen=True)
class Solve2DResult:
    x: float
    y: float
    residuals: tuple[float, float]
    on_boundary: tuple[bool, bool]  # per coordinate: pinned to a box face
    iterations: int
    method: str  # "newton" or "nested"


def _clip(v, lo, hi):
    return lo if v < lo else (hi if v > hi else v)


def _fd_jacobian(F, x, y, box):
    """Central-difference Jacobian, falling back to one-sided at box faces."""
    (xlo, xhi), (ylo, yhi) = box
    J = np.empty((2, 2))
    for j, (v, vlo, vhi) in enumerate(((x, xlo, xhi), (y, ylo, yhi))):
        h = max(1e-6, 1e-6 * abs(v))
        vp = min(v + h, vhi)
        vm = max(v - h, vlo)
        if vp == vm:
            raise NoConvergence("degenerate box prevents differencing", point=(x, y))
        if j == 0:
            Fp, Fm = F(vp, y), F(vm, y)
        else:
            Fp, Fm = F(x, vp), F(x, vm)
        J[0, j] = (Fp[0] - Fm[0]) / (vp - vm)
        J[1, j] = (Fp[1] - Fm[1]) / (vp - vm)
    return J


def _newton_2d(F, init, box, settings):
    (xlo, xhi), (ylo, yhi) = box
    x = _clip(init[0], xlo, xhi)
    y = _clip(init[1], ylo, yhi)
    fx = F(x, y)
    norm = max(abs(fx[0]), abs(fx[1]))
    for it in range(settings.max_iters):
        if norm <= settings.abs_tol:
            on_b = (x in (xlo, xhi), y in (ylo, yhi))
            return Solve2DResult(x, y, (fx[0], fx[1]), on_b, it, "newton")
        J = _fd_jacobian(F, x, y, box)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if not np.isfinite(det) or abs(det) < 1e-300:
            return None
        px = (-fx[0] * J[1, 1] + fx[1] * J[0, 1]) / det
        py = (-fx[1] * J[0, 0] + fx[0] * J[1, 0]) / det
        lam = 1.0
        improved = False
        for _ in range(30):
            xn = _clip(x + lam * px, xlo, xhi)
            yn = _clip(y + lam * py, ylo, yhi)
            fn = F(xn, yn)
            nn = max(abs(fn[0]), abs(fn[1]))
            if np.isfinite(nn) and nn < norm:
                x, y, fx, norm = xn, yn, fn, nn
                improved = True
                break
            lam *= 0.5
        if not improved:
            return None  # flat region or bad basin; caller falls back
    return None


def _nested_2d(F, box, settings, grid_pts=33, inner_pts=65):
    """Bracketing fallback: bisect F1 over x with y solved from F2(x, .) = 0.

    For each probed x the inner solve finds the first sign change of
    F2(x, .) along a y-grid and refines it with solve_scalar.  If F1 never
    changes sign over the inner-feasible x range, the root is pinned to a
    box face and BoundaryHit is raised with the best constrained point.
    """
    (xlo, xhi), (ylo, yhi) = box
    inner_settings = SolverSettings(
        abs_tol=settings.abs_tol,
        max_iters=max(settings.max_iters, 100),
        bracket_expansion_limit=0,
    )

    def inner(x):
        g = lambda yv: F(x, yv)[1]
        ys = np.linspace(ylo, yhi, inner_pts)
        vals = [g(v) for v in ys]
        for k in range(inner_pts - 1):
            if vals[k] == 0.0:
                return ys[k]
            if (vals[k] > 0.0) != (vals[k + 1] > 0.0):
                return solve_scalar(g, ys[k], ys[k + 1], inner_settings, expand=False)
        return None

    def outer(x):
        yv = inner(x)
        if yv is None:
            return None, None
        return F(x, yv)[0], yv

    xs = np.linspace(xlo, xhi, grid_pts)
    evals = [(xv,) + outer(xv) for xv in xs]
    feas = [(xv, g, yv) for xv, g, yv in evals if g is not None]
    if not feas:
        raise NoConvergence(
            "nested solve: inner equation has no root anywhere in the box",
            point=None,
        )
    for (x0, g0, y0), (x1, g1, y1) in zip(feas, feas[1:]):
        if (g0 > 0.0) != (g1 > 0.0):
            lo, glo = x0, g0
            hi = x1
            yv = y0
            for _ in range(settings.max_iters):
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                gm, ym = outer(mid)
                if gm is None:
                    hi = mid
                    continue
                yv = ym
                if abs(gm) <= settings.abs_tol:
                    fx = F(mid, ym)
                    return Solve2DResult(
                        mid, ym, (fx[0], fx[1]),
                        (mid in (xlo, xhi), ym in (ylo, yhi)),
                        0, "nested",
                    )
                if (gm > 0.0) == (glo > 0.0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            fx = F(lo, yv)
            raise NoConvergence(
                "nested bisection stalled", point=(lo, yv), residuals=(fx[0], fx[1])
            )
    # F1 is one-signed over the feasible range: constrained solution on a face
    xb, gb, yb = min(feas, key=lambda r: abs(r[1]))
    face_side = "hi" if abs(xb - xhi) <= abs(xb - xlo) else "lo"
    raise BoundaryHit(
        f"first residual does not change sign; pinned near x {face_side} face",
        face=(0, face_side),
        point=(xb, yb),
        residuals=(gb, 0.0),
    )


def solve_2d(
    F: Callable[[float, float], Sequence[float]],
    init: tuple[float, float],
    box: tuple[tuple[float, float], tuple[float, float]],
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Solve2DResult:
    """Solve F(x, y) = (0, 0) inside a rectangular box.

    Strategy: damped Newton with a finite-difference Jacobian, projecting
    iterates into the box and halving the step until the residual norm
    decreases.  On Newton failure the nested bracketing search takes over.

    Raises NoConvergence when neither route meets the tolerance, and
    BoundaryHit when the solution is pinned to a box face (only the second
    residual can be zeroed there).
    """
    (xlo, xhi), (ylo, yhi) = box
    if not (xlo <= xhi and ylo <= yhi):
        raise DomainError(f"malformed box {box}")
    res = _newton_2d(F, init, box, settings)
    if res is not None:
        return res
    return _nested_2d(F, box, settings)
