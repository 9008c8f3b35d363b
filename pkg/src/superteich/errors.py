"""Exception types shared across the package."""


class SuperTeichError(Exception):
    """Base class for domain errors raised by superteich."""


class GeneratorMismatchError(SuperTeichError, ValueError):
    """Two Grassmann values live in algebras with different generator counts."""


class NonInvertibleError(SuperTeichError, ZeroDivisionError):
    """The body of a supernumber is zero (or not positive where required)."""


class ParityError(SuperTeichError, ValueError):
    """A value of the wrong parity sits in a parity-constrained slot."""


class NonGenericFlipError(SuperTeichError):
    """A flip outside the generic case (distinct triangles, four distinct outer edges)."""


class CrossRatioError(SuperTeichError):
    """The cross ratios around a puncture do not multiply to one."""


class PunctureTypeError(SuperTeichError):
    """An operation was applied to a puncture of the wrong type (NS vs Ramond)."""


class NormalFormError(SuperTeichError):
    """A monodromy matrix is not of the lower-triangular normal form, or cannot be standardized."""


class RankDeficiencyError(SuperTeichError):
    """The Ramond constraint system cannot be solved for one variable per puncture."""
