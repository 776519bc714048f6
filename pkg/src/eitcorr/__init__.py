"""Classical-noise laboratory for intensity correlations of two beams in a Lambda medium."""
from ._kernels import BACKEND
from .errors import ConfigError, EitcorrError, NumericalError
from .lambda_medium import (
    Coherences,
    ComplexLinewidths,
    DriveFields,
    LambdaAtomParams,
    complex_linewidths,
    steady_state,
)
from .laser_noise import FrequencySeries, NoiseModel, derive_seed, generate
from .phase_lock import LockParams, PhaseTrajectory, integrate_theta, lock_diagnostics
from .propagation import (
    FieldState,
    MediumConfig,
    PropagationProfile,
    coupling_constants,
    propagate,
    step,
    transmission,
)
from .scenarios import (
    ExperimentConfig,
    SweepResult,
    correlation_vs_field,
    default_config,
    eit_sweep,
    synthesize_waveforms,
    zeeman_detuning,
)
from .signal_analysis import (
    CorrelationCurve,
    IntensitySeries,
    cross_correlation,
    peak_stats,
    power_spectrum,
    resonance_width,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Coherences",
    "ComplexLinewidths",
    "ConfigError",
    "CorrelationCurve",
    "DriveFields",
    "EitcorrError",
    "ExperimentConfig",
    "FieldState",
    "FrequencySeries",
    "IntensitySeries",
    "LambdaAtomParams",
    "LockParams",
    "MediumConfig",
    "NoiseModel",
    "NumericalError",
    "PhaseTrajectory",
    "PropagationProfile",
    "SweepResult",
    "complex_linewidths",
    "correlation_vs_field",
    "coupling_constants",
    "cross_correlation",
    "default_config",
    "derive_seed",
    "eit_sweep",
    "generate",
    "integrate_theta",
    "lock_diagnostics",
    "peak_stats",
    "power_spectrum",
    "propagate",
    "resonance_width",
    "steady_state",
    "step",
    "synthesize_waveforms",
    "transmission",
    "zeeman_detuning",
    "__version__",
]
