"""Simulation and numerical verification toolkit for an anisotropic
(2+1)-dimensional growth model driven by q-Whittaker dynamics on interlacing
arrays: exact samplers and event-driven simulators, contour-integral moment
formulas, law-of-large-numbers determinants, Gaussian fluctuation covariances
and SDEs, large-time propagators, and closed-form large-N asymptotics.
"""

__version__ = "0.1.0"

from . import (asymptotics, contours, dynamics, fluctuations, harness,
               largetime, moments, qcore, verify)

__all__ = ["asymptotics", "contours", "dynamics", "fluctuations", "harness",
           "largetime", "moments", "qcore", "verify", "__version__"]
