"""chbreak: a numerical laboratory for wave breaking in a damped
Camassa-Holm-type equation.

The package simulates the band-limited Galerkin truncation of the nonlocal
form of the equation, checks energy-based breaking criteria with certified
blow-up time bounds, follows characteristics through breaking, and extracts
the blow-up time, rate, and location from runs.
"""

from .config import RunConfig, emit_config, load_config, parse_config
from .criteria import (
    CriterionReport,
    check_criterion1,
    check_criterion2,
    compute_K,
    forcing_constant,
    m_prime_rhs,
    riccati_forcing,
    slope_threshold,
)
from .diagnostics import (
    DiagnosticsRecord,
    RateEstimate,
    energy_law_residual,
    estimate_blowup,
    track_rate,
)
from .errors import (
    ChbreakError,
    ConfigError,
    EdgeDecayError,
    NumericsError,
    SearchError,
)
from .grid import (
    Field,
    Grid,
    band_limit,
    check_edge_decay,
    conv_P_minus,
    conv_P_plus,
    dealiased_product,
    dealiased_square,
    deriv,
    h1_norm_sq,
    helmholtz_inverse,
    interp,
    resample,
    second_deriv,
    smoothed_edge_decay,
    tail_fraction,
)
from .model import (
    BreakingSearchResult,
    DissipationProfile,
    InitialDatum,
    bounded_forcing,
    find_breaking_datum,
    h_eval,
    make_datum,
    rhs,
    slope_rhs,
)
from .riccati import (
    CoupledTrajectory,
    OdeTrajectory,
    chen_bound,
    omega_bound,
    solve_coupled,
    solve_omega,
    two_sided_bound,
)
from .characteristics import (
    CharacteristicTrack,
    LemmaResidual,
    MixedMonitor,
    advance,
    build_aux,
    diffeo_factor,
    lemma_residual,
    mixed_monitor,
    start_track,
)
from .solver import RunOutcome, SolverConfig, SolverState, run, step

__version__ = "0.1.0"

__all__ = [
    "BreakingSearchResult",
    "CharacteristicTrack",
    "ChbreakError",
    "ConfigError",
    "CoupledTrajectory",
    "CriterionReport",
    "DiagnosticsRecord",
    "DissipationProfile",
    "EdgeDecayError",
    "Field",
    "Grid",
    "InitialDatum",
    "LemmaResidual",
    "MixedMonitor",
    "NumericsError",
    "OdeTrajectory",
    "RateEstimate",
    "RunConfig",
    "RunOutcome",
    "SearchError",
    "SolverConfig",
    "SolverState",
    "advance",
    "band_limit",
    "bounded_forcing",
    "build_aux",
    "check_criterion1",
    "check_criterion2",
    "check_edge_decay",
    "chen_bound",
    "compute_K",
    "conv_P_minus",
    "conv_P_plus",
    "dealiased_product",
    "dealiased_square",
    "deriv",
    "diffeo_factor",
    "emit_config",
    "energy_law_residual",
    "estimate_blowup",
    "find_breaking_datum",
    "forcing_constant",
    "h1_norm_sq",
    "h_eval",
    "helmholtz_inverse",
    "interp",
    "lemma_residual",
    "load_config",
    "m_prime_rhs",
    "make_datum",
    "mixed_monitor",
    "omega_bound",
    "parse_config",
    "resample",
    "rhs",
    "riccati_forcing",
    "run",
    "second_deriv",
    "slope_rhs",
    "slope_threshold",
    "smoothed_edge_decay",
    "solve_coupled",
    "solve_omega",
    "start_track",
    "step",
    "tail_fraction",
    "track_rate",
    "two_sided_bound",
    "__version__",
]
