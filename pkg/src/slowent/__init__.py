"""Slow entropy of Z^k actions by commuting unimodular integer matrices."""

from .action import (
    IntegerMatrixAction,
    LyapunovFunctional,
    LyapunovSpectrum,
    compute_spectrum,
    evaluate_exponent,
    suspend,
    verify_action,
)
from .bowen import (
    BowenBody,
    SandwichRectangles,
    SlopeFit,
    VolumeEstimate,
    bowen_constraints,
    estimate_local_slow_entropy,
    exact_volume_2d,
    fit_slope,
    mc_volume,
    sandwich_rectangles,
)
from .chambers import (
    Chamber,
    HyperplaneArrangement,
    Regular,
    Singular,
    classify_element,
    enumerate_chambers,
    lyapunov_hyperplanes,
    pick_generic_element,
)
from .cover import CoverEstimate, covering_number
from .entropy import (
    GammaAssignment,
    NormSearchResult,
    SlowEntropyReport,
    minimize_over_norm_family,
    pesin_entropy,
    slow_entropy,
    validate_gammas,
)
from .norms import NormSpec, dual_max, norm_value, unit_ball_volume

__version__ = "0.1.0"
