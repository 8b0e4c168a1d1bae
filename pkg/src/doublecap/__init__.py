"""Double-cap volumes and classical communication bounds for simulating qubit channels."""

from .capgeom import (
    BoundsRow,
    complex_cap_volume,
    complex_cap_volume_decomposed,
    log2_real_cap_volume,
    lower_bounds,
    monte_carlo_cap_volume,
    real_cap_volume,
)
from .hilbert import BlochVector, PureState, RandomStream, born_probability
from .tabulated import TabulatedProtocol

__version__ = "0.1.0"
