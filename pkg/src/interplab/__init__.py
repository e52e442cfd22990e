"""Numerical laboratory for minimum-norm interpolation in overparameterized
Gaussian linear regression: scenario generation, minimum-l2 and minimum-l1
interpolants, exact excess-risk evaluation, support reduction, concentration
checks, and a reproducible sweep harness."""

__version__ = "0.1.0"

from .numerics import (  # noqa: E402
    NoConvergence,
    RankDeficient,
    SeedSpec,
    Stream,
    derive_stream,
    gram_solve,
    op_norm,
)
from .scenario import (  # noqa: E402
    Dataset,
    HeadTailSplit,
    McRiskEstimate,
    ScenarioParams,
    generate,
    head_tail_split,
    mc_excess_risk,
    mc_excess_risk_estimate,
    uniform_head_theta,
)
from .interpolators import (  # noqa: E402
    EXTERNAL,
    MIN_L1,
    MIN_L2,
    SPARSIFIED,
    Interpolant,
    IterationLimit,
    LpOptions,
    NotInterpolable,
    NumericalBreakdown,
    min_l1,
    min_l2,
    sparsify,
    support,
)
from .risk import (  # noqa: E402
    BoundInputs,
    DomainError,
    PreconditionChecklist,
    RiskReport,
    excess_risk,
    ols_theory_curve,
    residual_identity_gap,
    sparse_lower_curve,
    theorem_preconditions,
)
from .concentration import (  # noqa: E402
    BlowupCheckReport,
    BudgetExceeded,
    SparseOpNormReport,
    TailCheckReport,
    chi2_tail_check,
    head_opnorm_check,
    sparse_blowup_check,
    sparse_opnorm_max,
    y_norm_lower_check,
)
from .harness import (  # noqa: E402
    AggregateRow,
    ConcentrationConfig,
    ExperimentConfig,
    ResultRow,
    aggregate,
    concentration_suite,
    run_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
