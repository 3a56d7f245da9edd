"""Exception types shared across the package.

Every failure mode a caller is expected to handle gets its own class, so
batch drivers can map them to exit codes without string matching.
"""


class HoloindexError(Exception):
    """Base class for all package-specific errors."""


class ParseError(HoloindexError):
    """Malformed polynomial or scalar text; carries the offending position."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class SchemaError(HoloindexError):
    """Problem file failed validation before any computation."""


class CompositionUnsafe(HoloindexError):
    """Series composition whose result cannot be certified to the cutoff."""


class NotDivisible(HoloindexError):
    """Exact division failed; the nonzero remainder is attached."""

    def __init__(self, message, remainder=None):
        super().__init__(message)
        self.remainder = remainder


class InsufficientTruncation(HoloindexError):
    """The carried cutoff is too low to certify the requested quantity."""


class IdentityMap(HoloindexError):
    """The map coincides with the identity to the available depth."""


class NotTangentToIdentity(HoloindexError):
    """A point germ whose differential at the fixed point is not the identity."""


class NotAdapted(HoloindexError):
    """A coordinate change that does not preserve the cutting locus."""


class NotSplitting(HoloindexError):
    """Second-order chart check requested on a pair failing the first-order one."""


class NotCodimensionOne(HoloindexError):
    """Operation defined only for hypersurface germs."""


class NuMismatch(HoloindexError):
    """Section kind incompatible with the computed contact order."""


class TruncationTooLowToSolve(HoloindexError):
    """Root solving attempted on data without enough certified coefficients."""


class UnsupportedCenter(HoloindexError):
    """Blow-up center that is not a linear coordinate subspace."""


class NormalActionNotIdentity(HoloindexError):
    """Lift requested for a germ whose differential moves normal directions."""


class DegenerateZero(HoloindexError):
    """Point residue requested at a common zero with vanishing Jacobian."""

    def __init__(self, message, jacobian=None):
        super().__init__(message)
        self.jacobian = jacobian


class NotCommonZero(HoloindexError):
    """Residue requested at a point that is not a zero of the section."""


class BranchNotOnCurve(HoloindexError):
    """Parametrization does not satisfy the curve equation."""


class PoleAtInfinityOfTruncation(HoloindexError):
    """Laurent data exhausted before the pole order was resolved."""


class ZeroDenominatorIdentically(HoloindexError):
    """Residue integrand whose denominator vanishes identically."""


class HypothesesUnmet(HoloindexError):
    """Formula preconditions (atlas or contact-order hypotheses) not satisfied."""


class ChartCoverIncomplete(HoloindexError):
    """Global residue cross-check fed with data not covering the curve."""


class SectionIdenticallyZero(HoloindexError):
    """Zero-divisor count requested for an identically vanishing section."""


class UnsupportedGeometry(HoloindexError):
    """Compact geometry outside the built-in table."""


class CorpusMissing(HoloindexError):
    """Corpus directory absent or empty."""
