"""Signal decomposition: mode sifting and the noise-ensemble variant."""

from .backend import active_backend, use
from .ceemdan import CeemdanConfig, Decomposition, ceemdan
from .emd import EmdConfig, emd, has_imf_property

__all__ = [
    "CeemdanConfig",
    "Decomposition",
    "EmdConfig",
    "active_backend",
    "ceemdan",
    "emd",
    "has_imf_property",
    "use",
]
