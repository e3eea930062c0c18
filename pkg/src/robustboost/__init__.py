"""Noise-tolerant boosting with a time-varying non-convex potential.

The robust booster drives down the average of a potential whose shape
sharpens, over an internal clock on [0, 1], into a step at the goal
margin; mislabeled examples with large negative margins lose their weight
instead of dominating the run, which is what defeats the convex baselines
(AdaBoost, LogitBoost — both included here for comparison).

See the README for the CLI, the experiment harness, and the benchmark
suite comparing the compiled and NumPy kernel backends.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AllInfeasible,
    BoundaryHit,
    DomainError,
    MissingSnapshot,
    NoBracket,
    NoConvergence,
    NonTermination,
    NoWeakLearner,
    ParseError,
    RobustBoostError,
    StepStall,
)
from .numerics import SolverSettings, erf_lower, normal_cdf, solve_2d, solve_scalar  # noqa: E402
from .potential import (  # noqa: E402
    PotentialKind,
    RobustBoostParams,
    baseline_potential,
    baseline_weight,
    mu,
    potential,
    sigma_sq,
    solve_rho,
    weight,
)
from .data import (  # noqa: E402
    Dataset,
    DatasetMeta,
    flip_labels,
    gen_long_servedio,
    gen_mease_wyner,
    load_csv,
    save_csv,
)
from .base_learners import (  # noqa: E402
    BaseHypothesis,
    CoordinateLearner,
    SignedCoordinate,
    StumpLearner,
    ThresholdStump,
    Tree2,
    Tree2Learner,
    WeightedData,
    best_signed_coordinate,
    best_threshold_stump,
    best_tree2,
    predict,
    predict_batch,
)
from .boosters import (  # noqa: E402
    BoostTrace,
    Ensemble,
    ErrorRates,
    Margins,
    error_rates,
    margins,
    robustboost_step,
    train_adaboost,
    train_logitboost,
    train_robustboost,
)
from .harness import (  # noqa: E402
    AlgorithmSpec,
    ExperimentConfig,
    ExperimentReport,
    default_long_servedio_config,
    default_mease_wyner_config,
    epsilon_search,
    export_score_distribution,
    run_experiment,
)
