"""Exceptional points of real symmetric matrix pencils H(lam) = H0 + lam * H1."""
from .ep_local import chirality_decompose, ep_eigenvector, local_report, phase_rigidity
from .ep_locator import (
    ExceptionalPoint,
    discriminant_poly,
    locate_eps,
    refine_ep,
    two_level_ep,
)
from .errors import (
    ConfigurationError,
    EpscopeError,
    NumericalError,
    ParameterError,
    StatisticsError,
)
from .matrix_model import (
    MatrixPencil,
    PencilParams,
    asymptotic_lines,
    build_pencil,
    evaluate,
    sample_ensemble,
    unperturbed_intersections,
)
from .monodromy import LambdaPath, crossing_scan, loop_monodromy, track_spectrum
from .spectral_stats import (
    angular_isotropy,
    ep_radial_distribution,
    fan_out_sweep,
    fit_spacing_law,
    intersection_distribution,
    unfolded_spacings,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "EpscopeError",
    "ExceptionalPoint",
    "LambdaPath",
    "MatrixPencil",
    "NumericalError",
    "ParameterError",
    "PencilParams",
    "StatisticsError",
    "angular_isotropy",
    "asymptotic_lines",
    "build_pencil",
    "chirality_decompose",
    "crossing_scan",
    "discriminant_poly",
    "ep_eigenvector",
    "ep_radial_distribution",
    "evaluate",
    "fan_out_sweep",
    "fit_spacing_law",
    "intersection_distribution",
    "local_report",
    "locate_eps",
    "loop_monodromy",
    "phase_rigidity",
    "refine_ep",
    "sample_ensemble",
    "track_spectrum",
    "two_level_ep",
    "unfolded_spacings",
    "unperturbed_intersections",
]
