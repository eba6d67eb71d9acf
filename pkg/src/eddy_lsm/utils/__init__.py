"""Utility modules for eddy-lsm."""

from eddy_lsm.utils.logging import setup_logging
from eddy_lsm.utils.validators import validate_band, validate_noise_level, validate_positive_length

__all__ = [
    "setup_logging",
    "validate_band",
    "validate_noise_level",
    "validate_positive_length",
]
