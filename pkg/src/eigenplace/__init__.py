"""Sensor placement for linear inverse problems by greedy eigenspace methods.

Pick M rows of a known full-column-rank representation matrix so that the
minimum-variance unbiased estimate of the underlying parameters is accurate:
greedy minimum-eigenspace projection and minimum-nonzero-eigenvalue pursuit,
plus frame-potential elimination, a Frank-Wolfe log-det relaxation, random
and exhaustive baselines, 2-opt polishing, and a Monte-Carlo benchmark CLI.
"""

from .ensembles import EnsembleSpec, generate, trial_spec
from .errors import (
    ConfigError,
    GenerationError,
    NumericFailureError,
    RankDeficiencyError,
)
from .linalg import (
    OrthonormalBasis,
    Projector,
    SymmetricEigenSystem,
    min_eigenspace_projector,
    nullspace_projector,
    orthonormalize,
    secular_min_eigenvalue,
    sym_eigendecompose,
)
from .metrics import (
    MetricReport,
    NoiseModel,
    condition_number,
    frame_potential,
    metric_report,
    mse_index,
    mvue_estimate,
    reconstruct_field,
    wcev_index,
)
from .placement import (
    CandidatePool,
    FrankWolfeConfig,
    PlacementResult,
    RelaxationWeights,
    SelectionState,
    StoppingRule,
    exhaustive_oracle,
    extend_state,
    init_state,
    local_optimize,
    projection_score,
    run_convex_relaxation,
    run_framesense,
    run_mnep,
    run_mpme,
    run_random,
)
from .bench import (
    BenchmarkConfig,
    CampaignReport,
    TimingReport,
    TrialRecord,
    place_file,
    run_campaign,
    timing_study,
)

__version__ = "0.1.0"
