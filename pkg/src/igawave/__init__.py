"""Isogeometric explicit-in-structure, implicit-in-time wave solvers with direction splitting."""
from . import assembly, elasticity, linalg, pwave, splines, stability

__version__ = "0.1.0"

__all__ = ["assembly", "elasticity", "linalg", "pwave", "splines", "stability", "__version__"]
