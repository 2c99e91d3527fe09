"""Noncolliding diffusions as determinantal processes.

Martingale functions, correlation kernels, Fredholm determinants and path
simulators for Dyson's Brownian motion, the noncolliding squared Bessel
process and noncolliding Brownian motion on a circle.
"""

__version__ = "0.1.0"

from .configspace import Configuration, equidistant_config
from .transition import ProcessSpec
from .martingale import MartingaleEvaluator, det_martingale, multipoint_M
from .kernel import CorrelationKernel, corr_kernel, corr_function, fredholm_det
from .sde import SdeConfig, simulate

__all__ = [
    "Configuration", "equidistant_config", "ProcessSpec", "MartingaleEvaluator",
    "det_martingale", "multipoint_M", "CorrelationKernel", "corr_kernel",
    "corr_function", "fredholm_det", "SdeConfig", "simulate",
]
