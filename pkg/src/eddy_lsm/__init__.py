"""Eddy-current imaging of deposits on tubes.

Axisymmetric finite-element simulation of eddy-current probes inside a
conductive tube, synthetic multistatic data, and qualitative deposit
reconstruction with the Linear Sampling Method.
"""

__version__ = "0.1.0"

from eddy_lsm.config.settings import Settings
from eddy_lsm.config.run import RunConfig

__all__ = [
    "Settings",
    "RunConfig",
    "__version__",
]
