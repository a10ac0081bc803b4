"""Exception types raised across the package.

Color and block indices carried by these exceptions are 0-based.
"""


class UrnError(Exception):
    """Base class for all package errors."""


class ValidationError(UrnError, ValueError):
    """The supplied model is not a balanced triangular urn."""


class NonSquare(ValidationError):
    def __init__(self, shape):
        self.shape = shape
        super().__init__(f"replacement matrix must be square, got rows of lengths {shape}")


class InitialLengthMismatch(ValidationError):
    def __init__(self, expected, got):
        self.expected, self.got = expected, got
        super().__init__(f"initial composition has {got} entries, expected {expected}")


class NegativeEntry(ValidationError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"negative entry at ({i}, {j})")


class NotTriangular(ValidationError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"nonzero entry below the diagonal at ({i}, {j})")


class RowSumNotOne(ValidationError):
    def __init__(self, i, total):
        self.i, self.total = i, total
        super().__init__(f"row {i} sums to {total}, not 1")


class NonPositiveInitial(ValidationError):
    def __init__(self, i):
        self.i = i
        super().__init__(f"initial count of color {i} is not positive")


class InitialSumNotOne(ValidationError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"initial composition sums to {total}, not 1 (use normalize=True to rescale)")


class InvalidPermutation(UrnError, ValueError):
    pass


class AssumptionFailure(UrnError):
    """Equal-eigenvalue adjacent blocks with no flow into the later leading color.

    ``block`` is the earlier block of the offending pair; ``rearrangement`` holds
    the increasing-order rearrangement that was checked, when one exists.
    """

    def __init__(self, block, lam, rearrangement=None):
        self.block = block
        self.lam = lam
        self.rearrangement = rearrangement
        super().__init__(
            f"blocks {block} and {block + 1} share eigenvalue {lam} but the leading color "
            f"of block {block + 1} receives nothing from block {block}"
        )


class ZeroDenominator(UrnError, ArithmeticError):
    pass


class NotApplicable(UrnError, ValueError):
    pass


class NegativeIntegerParameter(UrnError, ValueError):
    pass


class ScheduleEmpty(UrnError, ValueError):
    pass


class TooLarge(UrnError, ValueError):
    pass


class InsufficientData(UrnError, ValueError):
    pass


class AssumptionViolation(UrnError, ValueError):
    pass


class WrongRegime(UrnError, ValueError):
    pass
