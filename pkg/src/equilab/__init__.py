"""equilab: a small numerical laboratory for equidistribution of real sequences."""

__version__ = "0.1.0"

from .errors import ValidationError
from .generators import (
    GeneratorSpec,
    SequencePrefix,
    ShiftVector,
    apply_shift,
    generate,
    sample_gaussian_prefix,
)
from .measures import (
    CylinderEvent,
    GaussianSchedule,
    borel_cantelli_sum,
    gaussian_mass,
    geometric_envelope,
    limsup_hit_estimate,
    normal_cdf,
    normal_quantile,
    normal_sf,
    shift_monotonicity_check,
)
from .equidist import (
    EquidistReport,
    IndexDensityEstimate,
    IntervalRatio,
    TestFunction,
    center_shift,
    default_bank,
    fractional_parts,
    index_set_density,
    interval_ratio,
    star_discrepancy,
    ud_verdict,
    weyl_average,
)
from .experiments import ExperimentConfig, ExperimentResult, run

__all__ = [
    "__version__",
    "ValidationError",
    "GeneratorSpec",
    "SequencePrefix",
    "ShiftVector",
    "apply_shift",
    "generate",
    "sample_gaussian_prefix",
    "CylinderEvent",
    "GaussianSchedule",
    "borel_cantelli_sum",
    "gaussian_mass",
    "geometric_envelope",
    "limsup_hit_estimate",
    "normal_cdf",
    "normal_quantile",
    "normal_sf",
    "shift_monotonicity_check",
    "EquidistReport",
    "IndexDensityEstimate",
    "IntervalRatio",
    "TestFunction",
    "center_shift",
    "default_bank",
    "fractional_parts",
    "index_set_density",
    "interval_ratio",
    "star_discrepancy",
    "ud_verdict",
    "weyl_average",
    "ExperimentConfig",
    "ExperimentResult",
    "run",
]
