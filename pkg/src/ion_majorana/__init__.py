"""Majorana modes in dimerized trapped-ion spin chains: static and Floquet BdG toolkit."""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, GapClosedError, ResonanceError, SymmetryViolation
from .model import BdGOperator, ChainSpec, bloch_bdg, real_space_bdg
