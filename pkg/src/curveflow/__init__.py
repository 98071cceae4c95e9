"""Curve diffusion flow of open planar curves with contact-angle ends."""
from .curve_core import SampledCurve, DifferentialData  # noqa: F401
from .kernels import BACKEND  # noqa: F401

__version__ = "0.1.0"
