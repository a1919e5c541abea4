"""Numerical security analysis of two-way continuous-variable QKD
with receiver-side optical amplifiers under a two-mode collective attack."""

from .gaussian import (
    CovarianceMatrix,
    SymplecticSpectrum,
    SymplecticTransform,
    von_neumann_entropy,
)
from .keyrate import KeyRateResult, secret_key_rate
from .protocol import (
    AmplifierSpec,
    ChannelModel,
    DetectorModel,
    ProtocolParams,
)

__version__ = "0.1.0"

__all__ = [
    "AmplifierSpec",
    "ChannelModel",
    "CovarianceMatrix",
    "DetectorModel",
    "KeyRateResult",
    "ProtocolParams",
    "SymplecticSpectrum",
    "SymplecticTransform",
    "__version__",
    "secret_key_rate",
    "von_neumann_entropy",
]
