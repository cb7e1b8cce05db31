"""Exception types shared across the package."""


class GapClosedError(ArithmeticError):
    """An invariant was requested at a point where the relevant gap is closed."""


class SymmetryViolation(AssertionError):
    """A constructed operator broke a symmetry it must have by construction."""


class ConvergenceError(RuntimeError):
    """A refinement loop (k-grid, time slicing) hit its cap without converging."""


class ResonanceError(ZeroDivisionError):
    """Beatnote detuning sits on a phonon mode frequency."""


class ConfigError(ValueError):
    """Malformed run configuration or input schema."""
