"""Exception hierarchy shared by all modules."""


class FChangeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(FChangeError, ValueError):
    """Arrays or grids do not line up."""


class ParameterError(FChangeError, ValueError):
    """A tuning parameter is outside its admissible range."""


class InputError(FChangeError, ValueError):
    """Ill-formed user input (files, operators that should be self-adjoint)."""


class DegeneracyError(FChangeError, ArithmeticError):
    """The data carry no usable variation (e.g. zero long-run covariance)."""


class RankError(DegeneracyError):
    """Fewer positive eigenvalues than requested components."""


class NumericalError(FChangeError, ArithmeticError):
    """A numerical routine failed or produced an inadmissible result."""
