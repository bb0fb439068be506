"""Radial solutions, singular eigenvalues, Morse indices and nonradial
bifurcation points for the Henon problem -Delta u = |x|^alpha |u|^{p-1} u in
the unit ball."""

__version__ = "0.1.0"

from .errors import HenonError
from .params import ProblemParams

__all__ = ["HenonError", "ProblemParams", "__version__"]
