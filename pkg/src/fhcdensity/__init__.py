"""Weighted densities, dyadic sequences and a weighted-shift counterexample."""
from . import dyadic, shiftlab, weights
from .dyadic import StepFunction, dyadic_profile, nk_recursive
from .shiftlab import ShiftParameters, ShiftProfile
from .weights import IntegerSet, WeightFamily, density_estimate

__version__ = "0.1.0"
