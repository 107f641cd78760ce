"""Optimal FIR filter design for fault enhancement under varying shaft speed.

Filters are designed by maximising an envelope-spectrum signal-to-noise
objective computed with the velocity synchronous DFT.
"""

from .errors import (
    ConfigError,
    DegenerateObjectiveError,
    Ges2nError,
    SchemaError,
    SingularAutocorrelationError,
    StaleCacheError,
)
from .signal_model import (
    AngleProfile,
    FilteredSignal,
    FilterState,
    VibrationRecord,
    fir_filter,
    integrate_angle,
    normalize_filter,
)
from .vs_spectrum import (
    CyclicGrid,
    SesResult,
    VsDftOperator,
    build_grid,
    default_resolution,
    squared_envelope_spectrum,
    vs_dft,
)
from .objective import (
    VARIANT_NAMES,
    BandSpec,
    VariantConfig,
    WeightingSpec,
    build_denominator,
    build_numerator_base,
    build_weighting,
    evaluate_objective,
    process_numerator,
    variant_config,
)
from .gradient import finite_difference_check, grad_log_psi_wrt_g, grad_log_psi_wrt_h
from .optimizer import (
    Ges2nProblem,
    OptimizationTrace,
    OptimizerConfig,
    conjugate_gradient,
    lpc_init,
    minimize,
)
from .metrics import (
    MetricsReport,
    compute_metrics,
    filter_frequency_response,
    harmonic_amplitudes,
    log_median_normalize,
    normalize_for_display,
)
from .synth import SynthConfig, generate
from .io import read_record, read_ses, write_record
from .pipeline import RunConfig, run_pipeline

__version__ = "0.1.0"
