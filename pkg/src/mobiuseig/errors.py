"""Exception hierarchy shared by all modules."""


class MobiusEigError(Exception):
    """Base class for package errors."""


class StructuralError(MobiusEigError, ValueError):
    """Malformed sparse structure (index out of range, bad pointers)."""


class DimensionError(MobiusEigError, ValueError):
    """Vector or matrix dimensions do not agree."""


class MatrixMarketError(MobiusEigError, ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LDiagFormatError(MobiusEigError, ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SingularShift(MobiusEigError, ArithmeticError):
    """``J - aL`` is numerically singular: ``a`` is (close to) a pencil eigenvalue."""

    def __init__(self, shift, detail=""):
        self.shift = complex(shift)
        msg = f"J - aL is singular for a = {self.shift}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class DegenerateShift(MobiusEigError, ArithmeticError):
    """Shift coincides with the spurious eigenvalue 1 of the Cayley transform."""


class SingularJ4(MobiusEigError, ArithmeticError):
    """The algebraic-algebraic block of J is singular."""


class DenseCapExceeded(MobiusEigError, ValueError):
    pass


class ConvergenceError(MobiusEigError, RuntimeError):
    pass


class RankDeficientBasis(MobiusEigError, ArithmeticError):
    """Gram matrix of the iteration block is numerically singular."""
