"""EMF exposure index and uplink coverage in stochastic-geometry cellular networks."""

from .core_types import (
    ConfigError,
    ExposureBreakdown,
    NetworkParams,
    ObserverKind,
    QuadratureSpec,
    UserModel,
    cutoff_radius,
    load_config,
    normalized_noise,
    validate,
    with_density_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExposureBreakdown",
    "NetworkParams",
    "ObserverKind",
    "QuadratureSpec",
    "UserModel",
    "cutoff_radius",
    "load_config",
    "normalized_noise",
    "validate",
    "with_density_ratio",
    "__version__",
]
