"""Finite-SNR capacity bounds for Rayleigh block-fading multiple-access
channels without a-priori channel state information.

The package computes duality-based upper bounds and unitary-input /
Gaussian-input lower bounds on the sum-rate capacity, plus the plumbing
to sweep them over SNR and emit tables and plots.
"""

from .channel import BOUND_KINDS, BoundEstimate, ChannelConfig
from .capacity_lb import (
    DiagSpectrum,
    LbSampleBudget,
    gaussian_lb,
    two_user_lb,
    ustm_lb,
    ustm_lb_multiantenna,
)
from .capacity_ub import (
    SaddleConfig,
    g_general,
    g_star,
    perfect_csi_ub,
    saddle_solve,
    u_general,
    u_star,
)
from .errors import (
    DegenerateSpectrumError,
    DimensionError,
    DomainError,
    FadingMacError,
    NegativeInnerAverageError,
    NonConvergenceError,
    PerturbationInstabilityError,
    QuadratureError,
)
from .randmat import (
    ConstantCache,
    McConfig,
    McEstimate,
    RngStream,
    estimate_order_constant,
    estimate_zeta,
    sample_cgauss,
    sample_gaussian_input_spectrum,
    sample_mac_ustm_input,
    sample_stiefel,
)
from .sweep import PointResult, SweepSpec, emit_csv, emit_json, run_sweep
from .svgplot import emit_plot

__version__ = "0.1.0"

__all__ = [
    "BOUND_KINDS",
    "BoundEstimate",
    "ChannelConfig",
    "ConstantCache",
    "DegenerateSpectrumError",
    "DiagSpectrum",
    "DimensionError",
    "DomainError",
    "FadingMacError",
    "LbSampleBudget",
    "McConfig",
    "McEstimate",
    "NegativeInnerAverageError",
    "NonConvergenceError",
    "PerturbationInstabilityError",
    "PointResult",
    "QuadratureError",
    "RngStream",
    "SaddleConfig",
    "SweepSpec",
    "emit_csv",
    "emit_json",
    "emit_plot",
    "estimate_order_constant",
    "estimate_zeta",
    "g_general",
    "g_star",
    "gaussian_lb",
    "perfect_csi_ub",
    "run_sweep",
    "saddle_solve",
    "sample_cgauss",
    "sample_gaussian_input_spectrum",
    "sample_mac_ustm_input",
    "sample_stiefel",
    "two_user_lb",
    "u_general",
    "u_star",
    "ustm_lb",
    "ustm_lb_multiantenna",
    "__version__",
]
