"""Certified asymptotic key rates for PSK continuous-variable QKD.

Typical use::

    from cvqkd_psk import ProtocolConfig, compute_key_rate
    res = compute_key_rate(ProtocolConfig(distance_km=50, xi=0.01, n_cutoff=10))
    print(res.rate)
"""

from .protocol import ProtocolConfig, ConfigError, build_constraints, build_region_operators, kraus_and_pinching
from .objective import ObjectiveContext
from .engine import compute_key_rate, KeyRateResult, PipelineError
from .oracle import lossonly_key_rate, optimal_alpha

__all__ = [
    "ProtocolConfig",
    "ConfigError",
    "build_constraints",
    "build_region_operators",
    "kraus_and_pinching",
    "ObjectiveContext",
    "compute_key_rate",
    "KeyRateResult",
    "PipelineError",
    "lossonly_key_rate",
    "optimal_alpha",
]
