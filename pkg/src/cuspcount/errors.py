"""Exception hierarchy shared by all cuspcount modules.

Validation failures (bad Gram matrices, non-isometries, parse errors, ...)
derive from LatticeError so the CLI can map them all to exit code 2.
BudgetExceeded is separate and maps to exit code 3.
"""


class LatticeError(ValueError):
    """Base class for all validation errors."""


class NotSymmetric(LatticeError):
    pass


class OddDiagonal(LatticeError):
    pass


class Degenerate(LatticeError):
    pass


class UnknownName(LatticeError):
    pass


class BadParams(LatticeError):
    pass


class NonIntegralRescale(LatticeError):
    pass


class ZeroVector(LatticeError):
    pass


class NotPrimitive(LatticeError):
    pass


class DegenerateSublattice(LatticeError):
    pass


class NotIsometry(LatticeError):
    pass


class NotIsotropic(LatticeError):
    pass


class SubgroupNotContained(LatticeError):
    pass


class DivisorNotOne(LatticeError):
    pass


class VectorNotInComplement(LatticeError):
    pass


class DoesNotFixL(LatticeError):
    pass


class FImagesDiffer(LatticeError):
    pass


class NoneFoundInWindow(LatticeError):
    pass


class NotIsotropicPlane(LatticeError):
    pass


class NotRank2(LatticeError):
    pass


class BoundTooSmall(LatticeError):
    pass


class HypothesisFails(LatticeError):
    pass


class IncompleteInputs(LatticeError):
    pass


class ParseError(LatticeError):
    """Raised on malformed lattice expressions; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured budget."""
