"""Entropic quantities of integer log-concave distributions.

Certified computation of Shannon entropy, the shift-overlap smoothness
parameter q, and the differential entropy of uniform-smoothed sums, plus a
registry of checks for the identities, bounds, and decay rates relating
them.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .bounds import (
    BoundEvaluation,
    DecayOnsetResult,
    entropy_tail_envelope,
    epi_entropy_threshold,
    find_ratio_decay_onset,
    mode_location_window,
    pmax_bounds,
    ratio_decay_factor,
    ratio_decay_sigma_threshold,
    smoothing_gap_bound,
    xlogx_increment_bound,
)
from .convolve import (
    ConvolutionReport,
    DirectCapError,
    convolve_direct,
    convolve_fft,
    self_convolve,
)
from .families import exact_variance, family_names, from_family, params_for_sigma
from .pmf import (
    DEFAULT_TAIL_TOL,
    DistStats,
    IntegerPmf,
    WindowCapError,
    entropy_tail,
    from_weights,
    interval_probability,
    is_log_concave,
    load_pmf,
    pmf_from_json,
    pmf_to_json,
    random_log_concave_pmf,
    save_pmf,
    stats,
    tv_shift_distance,
)
from .smooth import (
    IrwinHallSpline,
    QuadratureResult,
    ResidualReport,
    SmoothedDensity,
    density_mass,
    density_mean,
    density_variance,
    differential_entropy,
    entropy_outside,
    irwin_hall,
    mass_between,
    scaled_entropy,
    smoothed_density,
    step_residuals,
)
from .verify import (
    CHECK_IDS,
    CheckResult,
    Report,
    SweepFailure,
    SweepSpec,
    run_check,
    run_sweep,
)
