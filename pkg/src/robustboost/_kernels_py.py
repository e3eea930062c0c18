"""NumPy implementations of the hot kernels.

These are the reference semantics; the compiled extension in
``_kernels_cy`` mirrors them loop-for-loop.  Candidate enumeration order
(and therefore tie-breaking) is identical between the two backends:
column-major, then split position, then polarity +1 before -1, with the
first strict maximum winning.
"""

from __future__ import annotations

import math

import numpy as np

from .numerics import normal_cdf

NAME = "numpy"


def signed_coordinate_scan(X: np.ndarray, wy: np.ndarray):
    """Best signed coordinate under weights: max over (i, sign) of sign * sum(wy * X[:, i]).

    Returns (corr, column, sign).
    """
    c = wy @ X
    cand = np.stack([c, -c], axis=1).ravel()  # i-major, sign +1 then -1
    k = int(np.argmax(cand))
    return float(cand[k]), k // 2, (1 if k % 2 == 0 else -1)


def stump_scan(sorted_vals: np.ndarray, wy_sorted: np.ndarray):
    """Best threshold stump over pre-sorted columns.

    ``sorted_vals[k, i]`` is the k-th smallest value of column i and
    ``wy_sorted`` the weights*labels gathered in that order.  Split
    position k means the k smallest points predict -polarity; k = 0 and
    k = N are the constant predictors (+-inf thresholds).  Only positions
    between distinct values are candidates.

    Returns (corr, column, split_position, polarity).
    """
    n, d = sorted_vals.shape
    cums = np.cumsum(wy_sorted, axis=0)
    totals = cums[-1, :]
    corr = np.empty((n + 1, d))
    corr[0, :] = totals
    corr[1:, :] = totals[None, :] - 2.0 * cums
    valid = np.ones((n + 1, d), dtype=bool)
    valid[1:n, :] = sorted_vals[:-1, :] != sorted_vals[1:, :]
    cand = np.stack([corr.T, -corr.T], axis=2)  # (d, n+1, 2)
    cand[~valid.T, :] = -np.inf
    k = int(np.argmax(cand))
    col, rem = divmod(k, 2 * (n + 1))
    split, pol_idx = divmod(rem, 2)
    return float(cand.ravel()[k]), col, split, (1 if pol_idx == 0 else -1)


def step_residuals(
    margins: np.ndarray,
    yh: np.ndarray,
    t: float,
    dt: float,
    dm: float,
    theta: float,
    rho: float,
    sigma_f: float,
):
    """Residual pair of one robust boosting step candidate (dt, dm).

    Margins evolve as m' = m e^{-dt} + yh dm.  Returns

        r1      = sum(yh * w(m', t + dt))        (de-correlation residual)
        phi_sum = sum(Phi(m', t + dt))           (new total potential)

    The conservation residual is phi_sum minus the caller's stored total.
    """
    t2 = min(t + dt, 1.0)
    mp = margins * math.exp(-dt) + yh * dm
    s2 = (sigma_f * sigma_f + 1.0) * math.exp(2.0 * (1.0 - t2)) - 1.0
    s = math.sqrt(s2)
    center = (theta - 2.0 * rho) * math.exp(1.0 - t2) + 2.0 * rho
    dev = mp - center
    w = np.exp(-(dev * dev) / (2.0 * s2))
    r1 = float(np.sum(yh * w))
    phi = normal_cdf(-dev / s)
    return r1, float(np.sum(phi))
