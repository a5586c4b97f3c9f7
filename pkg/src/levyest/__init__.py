"""Nonparametric estimation of Levy densities by penalized projection."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateDataError,
    DegenerateGridError,
    EmptyAdmissibleError,
    InsufficientDataError,
    InvalidArgumentError,
    InvalidDataError,
    LevyEstError,
    NumericFailureError,
)
from .levy_sim import (  # noqa: E402
    GammaParams,
    IncrementSeries,
    JumpSet,
    RngStream,
    VGParams,
    gamma_pair_to_vg,
    jumps_to_increments,
    simulate_gamma_jumps,
    simulate_gamma_skeleton,
    simulate_vg_difference,
    simulate_vg_timechange,
    vg_to_gamma_pair,
)
from .projection import (  # noqa: E402
    INVERSE_SQUARE,
    LEBESGUE,
    Histogram,
    LinearModel,
    ProjectionEstimate,
    ReferenceMeasure,
    RegularHistogram,
    RegularizedHistogram,
    build_model,
    contrast,
    gamma_density,
    orthogonal_projection,
    project,
    variance_term,
    vg_density,
    vhat,
)
from .model_selection import (  # noqa: E402
    DEFAULT_PENALTY,
    PenaltyForm,
    admissible,
    penalty,
    regular_histograms,
    regularized_histograms,
    select,
)
from .discrete import approx_penalty, approx_project, approx_select, poisson_integral, poisson_integral_approx  # noqa: E402
from .fitting import lse_gamma_direct, lse_gamma_log, lse_vg_tails, mle_gamma, mom_vg  # noqa: E402
