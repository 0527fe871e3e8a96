"""Two-solitary-wave laboratory for the damped nonlinear Klein-Gordon equation."""

__version__ = "0.1.0"

from .params import Grid1D, ModelParams, RadialGridSpec

__all__ = ["ModelParams", "RadialGridSpec", "Grid1D", "__version__"]
