"""Experiment runner: repeated seeded runs, aggregation, reports, exports.

A single JSON config describes a benchmark problem, a weak-learner family,
and a list of algorithm settings; ``run_experiment`` trains every
algorithm on every repetition's freshly generated data and aggregates the
error rates into a report (JSON plus an aligned text table).

Seeding: repetition r draws its training set with seed ``base_seed + r``
and its held-out test set with seed ``base_seed + r + 2**32`` so the two
streams never collide.  Reports are a pure function of (config, seeds):
two identical invocations produce byte-identical JSON.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__, kernels
from .base_learners import LEARNERS, SignedCoordinate, ThresholdStump, Tree2
from .boosters import (
    Ensemble,
    error_rates,
    train_adaboost,
    train_logitboost,
    train_robustboost,
)
from .data import gen_long_servedio, gen_mease_wyner
from .errors import AllInfeasible, DomainError, MissingSnapshot
from .potential import (
    PotentialKind,
    RobustBoostParams,
    baseline_potential,
    baseline_weight,
    mu,
    potential,
    sigma_sq,
    weight,
)

__all__ = [
    "AlgorithmSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "epsilon_search",
    "export_score_distribution",
    "default_long_servedio_config",
    "default_mease_wyner_config",
    "format_table",
    "train_algorithm",
    "ensemble_to_dict",
    "ensemble_from_dict",
]

TEST_SEED_OFFSET = 2**32

GENERATORS = {
    "long_servedio": gen_long_servedio,
    "mease_wyner": gen_mease_wyner,
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """Per-algorithm settings inside an experiment."""

    name: str
    kind: str                  # adaboost | logitboost | robustboost
    iterations: int
    epsilon: float | None = None
    theta: float = 0.0
    sigma_f: float = 0.1
    shrinkage: float = 0.25    # logitboost step damping

    def __post_init__(self):
        if self.kind not in ("adaboost", "logitboost", "robustboost"):
            raise DomainError(f"unknown algorithm kind {self.kind!r}")
        if self.kind == "robustboost" and self.epsilon is None:
            raise DomainError(f"algorithm {self.name!r} needs an epsilon")
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    n_train: int
    n_test: int
    q: float
    learner: str
    algorithms: tuple
    repetitions: int
    base_seed: int
    snapshot_iterations: tuple = ()
    workers: int = 1

    def __post_init__(self):
        if self.problem not in GENERATORS:
            raise DomainError(f"unknown problem {self.problem!r}")
        if self.learner not in LEARNERS:
            raise DomainError(f"unknown learner {self.learner!r}")
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise DomainError("algorithm names must be unique")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = [asdict(a) for a in self.algorithms]
        d["snapshot_iterations"] = list(self.snapshot_iterations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        algos = tuple(AlgorithmSpec(**a) for a in d.pop("algorithms"))
        d["snapshot_iterations"] = tuple(d.get("snapshot_iterations", ()))
        return cls(algorithms=algos, **d)


def default_long_servedio_config(**overrides) -> ExperimentConfig:
    """Reference-scale binary-feature benchmark: 800 training examples, 10 reps,
    300 rounds, 10% label noise, single-coordinate weak learners."""
    cfg = ExperimentConfig(
        problem="long_servedio",
        n_train=800,
        n_test=2000,
        q=0.1,
        learner="coordinate",
        algorithms=(
            AlgorithmSpec(name="adaboost", kind="adaboost", iterations=300),
            AlgorithmSpec(name="logitboost", kind="logitboost", iterations=300),
            AlgorithmSpec(
                name="robust_theta0", kind="robustboost", iterations=300,
                epsilon=0.14, theta=0.0, sigma_f=0.1,
            ),
            AlgorithmSpec(
                name="robust_theta02", kind="robustboost", iterations=300,
                epsilon=0.14, theta=0.2, sigma_f=0.1,
            ),
        ),
        repetitions=10,
        base_seed=1000,
        snapshot_iterations=(100, 200),
    )
    return replace(cfg, **overrides) if overrides else cfg


def default_mease_wyner_config(q: float = 0.1, learner: str = "stump", **overrides) -> ExperimentConfig:
    """Reference-scale uniform-feature benchmark: 2000 train / 2000 test, 15 reps,
    up to 500 rounds.  The error goal follows the noise rate (0.15 at q=0.1,
    0.25 at q=0.2); the logistic step damping is halved less for the stronger
    tree learner (0.5 vs 0.25)."""
    epsilon = 0.15 if q < 0.15 else 0.25
    shrinkage = 0.5 if learner == "tree2" else 0.25
    cfg = ExperimentConfig(
        problem="mease_wyner",
        n_train=2000,
        n_test=2000,
        q=q,
        learner=learner,
        algorithms=(
            AlgorithmSpec(name="adaboost", kind="adaboost", iterations=500),
            AlgorithmSpec(name="logitboost", kind="logitboost", iterations=500,
                          shrinkage=shrinkage),
            AlgorithmSpec(
                name="robustboost", kind="robustboost", iterations=500,
                epsilon=epsilon, theta=1.0, sigma_f=0.1,
            ),
        ),
        repetitions=15,
        base_seed=1000,
    )
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# Single repetition
# ---------------------------------------------------------------------------


def train_algorithm(algo: AlgorithmSpec, ds, learner, snapshots=()):
    """Train one configured algorithm on a dataset; returns (ensemble, trace)."""
    if algo.kind == "adaboost":
        return train_adaboost(ds, learner, algo.iterations, snapshot_iterations=snapshots)
    if algo.kind == "logitboost":
        return train_logitboost(
            ds, learner, algo.iterations, shrinkage=algo.shrinkage,
            snapshot_iterations=snapshots,
        )
    params = RobustBoostParams.solve(algo.epsilon, algo.theta, algo.sigma_f)
    return train_robustboost(
        ds, learner, params, algo.iterations, snapshot_iterations=snapshots
    )


def _run_repetition(cfg: ExperimentConfig, r: int) -> dict:
    seed = cfg.base_seed + r
    gen = GENERATORS[cfg.problem]
    train_ds = gen(cfg.n_train, cfg.q, seed)
    test_ds = gen(cfg.n_test, cfg.q, seed + TEST_SEED_OFFSET) if cfg.n_test > 0 else None
    learner = LEARNERS[cfg.learner]()
    out = {"repetition": r, "seed": seed, "algorithms": {}}
    for algo in cfg.algorithms:
        ensemble, trace = train_algorithm(
            algo, train_ds, learner, snapshots=cfg.snapshot_iterations
        )
        rates = error_rates(ensemble, train_ds, theta=algo.theta)
        robust = algo.kind == "robustboost"
        entry = {
            "train_noisy_error": rates.noisy_error,
            "train_clean_error": rates.clean_error,
            "train_below_theta": rates.below_theta_fraction,
            "train_clean_error_above_theta": rates.clean_error_above_theta,
            # baselines always count; a robust repetition only counts toward
            # the aggregates when it reached its horizon
            "terminated": trace.terminated if robust else True,
            "status": trace.status,
            "iterations": trace.iterations,
        }
        if robust:
            entry["final_t"] = trace.final_t
        if test_ds is not None:
            trates = error_rates(ensemble, test_ds, theta=algo.theta)
            entry.update(
                test_noisy_error=trates.noisy_error,
                test_clean_error=trates.clean_error,
                test_below_theta=trates.below_theta_fraction,
                test_clean_error_above_theta=trates.clean_error_above_theta,
            )
        out["algorithms"][algo.name] = entry
    return out


# ---------------------------------------------------------------------------
# Aggregation and the report object
# ---------------------------------------------------------------------------

_METRIC_KEYS = (
    "train_noisy_error",
    "train_clean_error",
    "train_below_theta",
    "train_clean_error_above_theta",
    "test_noisy_error",
    "test_clean_error",
    "test_below_theta",
    "test_clean_error_above_theta",
)


@dataclass
class ExperimentReport:
    """Aggregated results of one experiment.

    ``aggregate`` averages every repetition (non-terminated robust runs
    contribute the ensemble they had when the budget ran out, which is how
    the reference protocol tabulates errors); ``aggregate_terminated``
    restricts to repetitions whose robust run reached its horizon.
    """

    config: dict
    per_repetition: list
    aggregate: dict
    aggregate_terminated: dict
    orderings: dict
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "per_repetition": self.per_repetition,
            "aggregate": self.aggregate,
            "aggregate_terminated": self.aggregate_terminated,
            "orderings": self.orderings,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _sample_std(vals) -> float:
    if len(vals) < 2:
        return 0.0
    return float(np.std(np.asarray(vals, dtype=float), ddof=1))


def _aggregate(cfg: ExperimentConfig, reps: list, terminated_only: bool) -> dict:
    agg = {}
    for algo in cfg.algorithms:
        entries = [rep["algorithms"][algo.name] for rep in reps]
        used = [e for e in entries if e["terminated"]] if terminated_only else entries
        stats = {}
        for key in _METRIC_KEYS:
            vals = [e[key] for e in used if key in e]
            if not vals:
                continue
            stats[key] = {
                "mean": float(np.mean(vals)),
                "std": _sample_std(vals),
                "min": float(np.min(vals)),
                "max": float(np.max(vals)),
            }
        stats["repetitions_used"] = len(used)
        stats["non_terminated"] = sum(1 for e in entries if not e["terminated"])
        agg[algo.name] = stats
    return agg


def _headline_key(cfg: ExperimentConfig) -> str:
    return "train_noisy_error" if cfg.n_test == 0 or cfg.problem == "long_servedio" else "test_noisy_error"


def _orderings(cfg: ExperimentConfig, reps: list) -> dict:
    key = _headline_key(cfg)
    names = [a.name for a in cfg.algorithms]
    counts = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            counts[f"{a}<{b}"] = sum(
                1 for rep in reps
                if rep["algorithms"][a][key] < rep["algorithms"][b][key]
            )
    return {"metric": key, "counts": counts, "comparisons": len(reps)}


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Train every configured algorithm on every repetition and aggregate.

    Repetitions are independent; with ``workers > 1`` (or the
    ROBUSTBOOST_WORKERS environment override) they run in a process pool.
    Results are keyed by repetition index, so the report is identical
    regardless of worker count.
    """
    workers = int(os.environ.get("ROBUSTBOOST_WORKERS", cfg.workers))
    indices = list(range(cfg.repetitions))
    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(workers) as pool:
            reps = pool.starmap(_run_repetition, [(cfg, r) for r in indices])
    else:
        reps = [_run_repetition(cfg, r) for r in indices]
    reps.sort(key=lambda rep: rep["repetition"])
    return ExperimentReport(
        config=cfg.to_dict(),
        per_repetition=reps,
        aggregate=_aggregate(cfg, reps, terminated_only=False),
        aggregate_terminated=_aggregate(cfg, reps, terminated_only=True),
        orderings=_orderings(cfg, reps),
        provenance={
            "version": __version__,
            "backend": kernels.backend_name(),
            "config_hash": config_hash(cfg),
            "seeds": [cfg.base_seed + r for r in indices],
        },
    )


_TABLE_ROWS = (
    ("train_noisy_error", "Err (train)"),
    ("train_clean_error", "Clean (train)"),
    ("test_noisy_error", "Err (test)"),
    ("test_clean_error", "Clean (test)"),
    ("test_below_theta", "Low margin (test)"),
    ("test_clean_error_above_theta", "Clean err above theta"),
)


def format_table(report: ExperimentReport) -> str:
    """Aligned percent table, one column per algorithm."""
    agg = report.aggregate
    names = [a["name"] for a in report.config["algorithms"]]
    cells = {}
    rows = []
    for key, label in _TABLE_ROWS:
        present = [n for n in names if key in agg[n]]
        if not present:
            continue
        rows.append((key, label))
        for n in names:
            if key in agg[n]:
                s = agg[n][key]
                cells[(key, n)] = f"{100 * s['mean']:.1f} ± {100 * s['std']:.1f}"
            else:
                cells[(key, n)] = "-"
    label_w = max(len(label) for _, label in rows) if rows else 0
    col_w = {n: max(len(n), max((len(cells[(k, n)]) for k, _ in rows), default=0)) for n in names}
    lines = [" " * label_w + "  " + "  ".join(n.rjust(col_w[n]) for n in names)]
    for key, label in rows:
        lines.append(
            label.ljust(label_w) + "  "
            + "  ".join(cells[(key, n)].rjust(col_w[n]) for n in names)
        )
    nt = [f"{n}: {agg[n]['non_terminated']}" for n in names if agg[n]["non_terminated"]]
    if nt:
        lines.append("non-terminated repetitions -- " + ", ".join(nt))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Error-goal feasibility search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsilonSearchResult:
    minimal_feasible: float
    outcomes: tuple
    anomalies: tuple


def epsilon_search(cfg: ExperimentConfig, grid, budget: int) -> EpsilonSearchResult:
    """Smallest error goal that self-terminates within ``budget`` iterations.

    Runs the robust booster once per candidate on a single dataset seeded
    from the config.  Candidates are tried in descending order; a smaller
    goal terminating while a larger one does not is reported as an anomaly
    rather than an error.  Raises AllInfeasible when nothing terminates.
    """
    if budget < 1:
        raise DomainError("budget must be >= 1")
    robust = next((a for a in cfg.algorithms if a.kind == "robustboost"), None)
    if robust is None:
        raise DomainError("config has no robustboost algorithm to search over")
    ds = GENERATORS[cfg.problem](cfg.n_train, cfg.q, cfg.base_seed)
    learner = LEARNERS[cfg.learner]()
    outcomes = []
    for eps in sorted(set(float(e) for e in grid), reverse=True):
        params = RobustBoostParams.solve(eps, robust.theta, robust.sigma_f)
        _, trace = train_robustboost(ds, learner, params, budget)
        outcomes.append(
            {
                "epsilon": eps,
                "terminated": trace.terminated,
                "iterations": trace.iterations,
                "final_t": trace.final_t,
                "status": trace.status,
            }
        )
    feasible = [o["epsilon"] for o in outcomes if o["terminated"]]
    if not feasible:
        raise AllInfeasible(
            f"no candidate in {sorted(grid, reverse=True)} terminated within {budget} iterations"
        )
    anomalies = []
    for hi, lo in zip(outcomes, outcomes[1:]):
        if lo["terminated"] and not hi["terminated"]:
            anomalies.append(
                f"epsilon={lo['epsilon']} terminated but larger epsilon={hi['epsilon']} did not"
            )
    return EpsilonSearchResult(
        minimal_feasible=min(feasible),
        outcomes=tuple(outcomes),
        anomalies=tuple(anomalies),
    )


# ---------------------------------------------------------------------------
# Score-distribution export
# ---------------------------------------------------------------------------


def export_score_distribution(trace, params, iteration: int, path) -> None:
    """Write the margin/weight snapshot of one iteration plus the potential curve.

    CSV columns: row_type (example | curve), margin, weight, clean_correct,
    kind.  Example rows carry each training example's margin, its
    (unnormalized) weight at the snapshot time, whether the ensemble's sign
    agrees with the clean label, and the example kind when the generator
    recorded one.  Curve rows sample the potential over a margin grid (the
    weight column holds the potential value), enough to re-plot the score
    distribution against the potential in any plotting tool.
    """
    if iteration not in trace.snapshots:
        raise MissingSnapshot(
            f"iteration {iteration} was not snapshotted (have {sorted(trace.snapshots)})"
        )
    snap = trace.snapshots[iteration]
    m = snap.margins
    robust = trace.kind is PotentialKind.ROBUSTBOOST
    if robust:
        if params is None:
            raise DomainError("robust snapshots need the training parameters")
        wvals = weight(m, snap.t, params)
        center = mu(snap.t, params.theta, params.rho)
        spread = math.sqrt(sigma_sq(snap.t, params.sigma_f))
        half = max(4.0 * spread, float(np.max(np.abs(m - center))) + 1.0 if m.size else 1.0)
        grid = center + np.linspace(-half, half, 401)
        curve = potential(grid, snap.t, params)
    else:
        wvals = baseline_weight(trace.kind, m)
        lo = float(np.min(m)) - 1.0 if m.size else -1.0
        hi = float(np.max(m)) + 1.0 if m.size else 1.0
        grid = np.linspace(lo, hi, 401)
        curve = baseline_potential(trace.kind, grid)
    agree = trace.labels * trace.clean_labels
    kinds = trace.kinds
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("row_type,margin,weight,clean_correct,kind\n")
        for j in range(m.shape[0]):
            clean_ok = int(m[j] * agree[j] > 0.0)
            kind = kinds[j] if kinds is not None else ""
            fh.write(
                f"example,{m[j]:.17g},{wvals[j]:.17g},{clean_ok},{kind}\n"
            )
        for g, p in zip(grid, curve):
            fh.write(f"curve,{g:.17g},{p:.17g},,\n")


# ---------------------------------------------------------------------------
# Ensemble (de)serialization for the train/evaluate CLI round trip
# ---------------------------------------------------------------------------


def _float_out(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def _float_in(v) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


def _hyp_to_dict(h) -> dict:
    if isinstance(h, SignedCoordinate):
        return {"type": "coordinate", "index": h.index, "sign": h.sign}
    if isinstance(h, ThresholdStump):
        return {
            "type": "stump",
            "index": h.index,
            "threshold": _float_out(h.threshold),
            "polarity": h.polarity,
        }
    if isinstance(h, Tree2):
        return {
            "type": "tree2",
            "root": _hyp_to_dict(h.root),
            "left": _hyp_to_dict(h.left),
            "right": _hyp_to_dict(h.right),
            "leaf_signs": [list(h.leaf_signs[0]), list(h.leaf_signs[1])],
        }
    raise DomainError(f"cannot serialize hypothesis {h!r}")


def _hyp_from_dict(d: dict):
    kind = d["type"]
    if kind == "coordinate":
        return SignedCoordinate(index=int(d["index"]), sign=int(d["sign"]))
    if kind == "stump":
        return ThresholdStump(
            index=int(d["index"]),
            threshold=_float_in(d["threshold"]),
            polarity=int(d["polarity"]),
        )
    if kind == "tree2":
        return Tree2(
            root=_hyp_from_dict(d["root"]),
            left=_hyp_from_dict(d["left"]),
            right=_hyp_from_dict(d["right"]),
            leaf_signs=(
                tuple(int(v) for v in d["leaf_signs"][0]),
                tuple(int(v) for v in d["leaf_signs"][1]),
            ),
        )
    raise DomainError(f"unknown hypothesis type {kind!r}")


def ensemble_to_dict(ensemble: Ensemble, trace=None) -> dict:
    out = {
        "kind": ensemble.kind.value,
        "terms": [
            {"coefficient": float(c), "hypothesis": _hyp_to_dict(h)}
            for h, c in ensemble.terms
        ],
    }
    if trace is not None:
        out["training"] = {
            "status": trace.status,
            "iterations": trace.iterations,
            "final_t": None if math.isnan(trace.final_t) else trace.final_t,
        }
    return out


def ensemble_from_dict(d: dict) -> Ensemble:
    return Ensemble(
        kind=PotentialKind(d["kind"]),
        terms=tuple(
            (_hyp_from_dict(t["hypothesis"]), float(t["coefficient"]))
            for t in d["terms"]
        ),
    )
