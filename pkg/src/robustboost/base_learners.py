"""Weak learners: +-1 valued base hypotheses fit to a weighted sample.

Three hypothesis families are supported: signed coordinates (for binary
+-1 features), threshold stumps over real features, and two-level trees
whose internal tests are stumps.  Coordinate and stump search are exact
maximizations of the weighted correlation sum(D * y * h(x)) over their
candidate sets; the tree is grown greedily by weighted Gini impurity with
weighted-majority leaf labels, the conventional construction for small
decision trees.

Tie-breaking is total and documented per search, so identical inputs give
identical hypotheses on every backend.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels
from .data import Dataset
from .errors import DomainError, NoWeakLearner

__all__ = [
    "SignedCoordinate",
    "ThresholdStump",
    "Tree2",
    "BaseHypothesis",
    "WeightedData",
    "CoordinateLearner",
    "StumpLearner",
    "Tree2Learner",
    "LEARNERS",
    "best_signed_coordinate",
    "best_threshold_stump",
    "best_tree2",
    "predict",
    "predict_batch",
]


@dataclass(frozen=True)
class SignedCoordinate:
    """h(x) = sign * sign(x[index]), with sign(0) := +1."""

    index: int
    sign: int


@dataclass(frozen=True)
class ThresholdStump:
    """h(x) = polarity if x[index] >= threshold else -polarity.

    A +-inf threshold makes the stump a constant predictor.
    """

    index: int
    threshold: float
    polarity: int


@dataclass(frozen=True)
class Tree2:
    """Depth-2 tree: the root stump routes to one of two child stumps and
    each of the four leaves carries its own +-1 sign.

    ``left`` handles examples the root sends to -1, ``right`` to +1.
    ``leaf_signs[a][b]`` is the output for root outcome a and child
    outcome b, with index 0 meaning -1 and 1 meaning +1.
    """

    root: ThresholdStump
    left: ThresholdStump
    right: ThresholdStump
    leaf_signs: tuple[tuple[int, int], tuple[int, int]]


BaseHypothesis = Union[SignedCoordinate, ThresholdStump, Tree2]


@dataclass
class WeightedData:
    """A dataset together with a probability distribution over its rows."""

    dataset: Dataset
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.dataset.n,):
            raise DomainError("weights length disagrees with the dataset")
        if (w < 0.0).any():
            raise DomainError("weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {float(w.sum())!r}")
        self.weights = w


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


def predict_batch(h: BaseHypothesis, X: np.ndarray) -> np.ndarray:
    """Vectorized +-1 predictions for a feature matrix."""
    if isinstance(h, SignedCoordinate):
        return np.where(X[:, h.index] >= 0.0, h.sign, -h.sign).astype(np.int64)
    if isinstance(h, ThresholdStump):
        return np.where(X[:, h.index] >= h.threshold, h.polarity, -h.polarity).astype(np.int64)
    if isinstance(h, Tree2):
        root_side = predict_batch(h.root, X)
        out = np.empty(X.shape[0], dtype=np.int64)
        for side, child in ((-1, h.left), (1, h.right)):
            mask = root_side == side
            if not mask.any():
                continue
            child_side = predict_batch(child, X[mask])
            signs = h.leaf_signs[(side + 1) // 2]
            out[mask] = np.where(child_side > 0, signs[1], signs[0])
        return out
    raise DomainError(f"unknown hypothesis type {type(h).__name__}")


def predict(h: BaseHypothesis, x) -> int:
    """Single-example prediction; validates the feature dimension."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("predict expects a single feature vector")
    needed = _max_index(h)
    if x.shape[0] <= needed:
        raise DomainError(
            f"feature vector has {x.shape[0]} entries but the hypothesis "
            f"indexes coordinate {needed}"
        )
    return int(predict_batch(h, x[None, :])[0])


def _max_index(h: BaseHypothesis) -> int:
    if isinstance(h, (SignedCoordinate, ThresholdStump)):
        return h.index
    return max(h.root.index, h.left.index, h.right.index)


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------


def best_signed_coordinate(wd: WeightedData) -> SignedCoordinate:
    """Exact search over all (coordinate, sign) pairs.

    Ties break toward the smallest coordinate, then sign +1.  Raises
    NoWeakLearner when no candidate has positive weighted correlation.
    """
    X = wd.dataset.features
    if X.size and not np.isin(X, (-1.0, 1.0)).all():
        raise DomainError("signed-coordinate search requires +-1 features")
    wy = wd.weights * wd.dataset.labels
    corr, col, sign = kernels.signed_coordinate_scan(
        np.ascontiguousarray(X), np.ascontiguousarray(wy)
    )
    if corr <= 0.0:
        raise NoWeakLearner(f"best signed coordinate has correlation {corr}")
    return SignedCoordinate(index=int(col), sign=int(sign))


def _threshold_from_split(sorted_col: np.ndarray, split: int) -> float:
    n = sorted_col.shape[0]
    if split == 0:
        return -math.inf
    if split == n:
        return math.inf
    lo, hi = sorted_col[split - 1], sorted_col[split]
    mid = 0.5 * (lo + hi)
    # midpoint can round onto the lower value when lo and hi are adjacent
    # floats; the predict convention (>= threshold) then needs hi itself
    return mid if mid > lo else hi


def _sorted_view(wd: WeightedData):
    X = wd.dataset.features
    order = np.argsort(X, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(X, order, axis=0)
    return order, np.ascontiguousarray(sorted_vals)


def best_threshold_stump(wd: WeightedData) -> ThresholdStump:
    """Exact search over all midpoint thresholds plus +-inf sentinels.

    Candidate thresholds per coordinate sit between consecutive distinct
    sorted values; ties break lexicographically on (coordinate, threshold,
    polarity +1 first).
    """
    order, sorted_vals = _sorted_view(wd)
    wy = wd.weights * wd.dataset.labels
    wy_sorted = np.ascontiguousarray(np.take_along_axis(wy[:, None], order, axis=0))
    corr, col, split, pol = kernels.stump_scan(sorted_vals, wy_sorted)
    if corr <= 0.0:
        raise NoWeakLearner(f"best threshold stump has correlation {corr}")
    thr = _threshold_from_split(sorted_vals[:, col], split)
    return ThresholdStump(index=int(col), threshold=thr, polarity=int(pol))


_CONSTANT_PLUS = ThresholdStump(index=0, threshold=-math.inf, polarity=1)


def _gini_split(X: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Best (coordinate, threshold) by weighted Gini impurity of the split.

    Only proper splits (both sides with positive weight) are candidates;
    returns None when no coordinate admits one.  Ties break toward the
    smallest coordinate, then the smallest threshold.
    """
    n, d = X.shape
    total_w = float(w.sum())
    if n == 0 or total_w <= 0.0:
        return None
    wp = w * (y > 0)
    total_p = float(wp.sum())
    if total_p == 0.0 or total_p == total_w:
        return None  # pure node: nothing to split
    best_score = -np.inf
    best = None
    for i in range(d):
        o = np.argsort(X[:, i], kind="stable")
        xs = X[o, i]
        cw = np.cumsum(w[o])
        cp = np.cumsum(wp[o])
        ks = np.nonzero(xs[:-1] != xs[1:])[0]
        if ks.size == 0:
            continue
        wl = cw[ks]
        pl = cp[ks]
        wr = total_w - wl
        pr = cp[-1] - pl
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 2.0 * pl * (wl - pl) / wl + 2.0 * pr * (wr - pr) / wr
        g = np.where((wl > 0.0) & (wr > 0.0), g, np.inf)
        j = int(np.argmin(g))
        if np.isinf(g[j]):
            continue
        score = -float(g[j])
        if score > best_score:
            k = ks[j]
            best_score = score
            best = (i, _threshold_from_split(xs, k + 1))
    return best


def best_tree2(wd: WeightedData) -> Tree2:
    """Grow a depth-2 tree: Gini-best root split, Gini-best split per side,
    weighted-majority sign per leaf (ties and empty leaves go to +1).

    Nodes without a proper split get a constant child stump.  Raises
    NoWeakLearner when the finished tree has correlation <= 0.
    """
    X = wd.dataset.features
    y = wd.dataset.labels
    w = wd.weights
    root_split = _gini_split(X, y, w)
    if root_split is None:
        root = _CONSTANT_PLUS
    else:
        root = ThresholdStump(index=root_split[0], threshold=root_split[1], polarity=1)
    root_side = predict_batch(root, X)
    children = {}
    leaf_signs = [[1, 1], [1, 1]]
    for side in (-1, 1):
        mask = root_side == side
        child_split = _gini_split(X[mask], y[mask], w[mask]) if mask.any() else None
        child = (
            _CONSTANT_PLUS
            if child_split is None
            else ThresholdStump(index=child_split[0], threshold=child_split[1], polarity=1)
        )
        children[side] = child
        child_side = predict_batch(child, X)
        for cs in (-1, 1):
            leaf = mask & (child_side == cs)
            balance = float(np.sum(w[leaf] * y[leaf]))
            leaf_signs[(side + 1) // 2][(cs + 1) // 2] = 1 if balance >= 0.0 else -1
    tree = Tree2(
        root=root,
        left=children[-1],
        right=children[1],
        leaf_signs=(tuple(leaf_signs[0]), tuple(leaf_signs[1])),
    )
    corr = float(np.sum(w * y * predict_batch(tree, X)))
    if corr <= 0.0:
        raise NoWeakLearner(f"assembled tree has correlation {corr}")
    return tree


# ---------------------------------------------------------------------------
# Learner objects (the callables the boosters consume)
# ---------------------------------------------------------------------------


class CoordinateLearner:
    def __call__(self, wd: WeightedData) -> BaseHypothesis:
        return best_signed_coordinate(wd)


class StumpLearner:
    """Stump search with the per-dataset sort order cached across calls."""

    def __init__(self):
        self._cache_ref = lambda: None
        self._cache = None

    def __call__(self, wd: WeightedData) -> BaseHypothesis:
        if self._cache_ref() is not wd.dataset:
            self._cache_ref = weakref.ref(wd.dataset)
            self._cache = _sorted_view(wd)
        order, sorted_vals = self._cache
        wy = wd.weights * wd.dataset.labels
        wy_sorted = np.ascontiguousarray(np.take_along_axis(wy[:, None], order, axis=0))
        corr, col, split, pol = kernels.stump_scan(sorted_vals, wy_sorted)
        if corr <= 0.0:
            raise NoWeakLearner(f"best threshold stump has correlation {corr}")
        thr = _threshold_from_split(sorted_vals[:, col], split)
        return ThresholdStump(index=int(col), threshold=thr, polarity=int(pol))


class Tree2Learner:
    def __call__(self, wd: WeightedData) -> BaseHypothesis:
        return best_tree2(wd)


LEARNERS = {
    "coordinate": CoordinateLearner,
    "stump": StumpLearner,
    "tree2": Tree2Learner,
}
