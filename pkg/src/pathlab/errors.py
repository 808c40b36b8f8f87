"""Exception types shared across the package.

Everything derives from PathlabError so the CLI can map validation
failures to a single exit code.
"""


class PathlabError(Exception):
    """Base class for all pathlab validation and numerics errors."""


class DimensionMismatch(PathlabError):
    """Operands disagree on tensor dim or depth, or vector length is wrong."""


class DepthExceeded(PathlabError):
    """A word or product would leave the truncation order."""


class NonMonotoneTime(PathlabError):
    """Event times decrease, or observation times are not strictly increasing."""


class NegativeDuration(PathlabError):
    """A continuous segment was given a negative time increment."""


class TimeLetterForbidden(PathlabError):
    """The time letter (index 0) was used where only space letters are legal."""


class EmptyEnsemble(PathlabError):
    """An operation that averages over paths received none."""


class RankDeficient(PathlabError):
    """Anchor selection could not retain enough independent directions."""


class DenominatorDegenerate(PathlabError):
    """A rank-1 inverse update hit a vanishing denominator."""


class EmptyCandidates(PathlabError):
    """Herding was started with an empty candidate pool."""


class TraceTooShort(PathlabError):
    """A rate fit needs more herding steps than the trace contains."""


class HorizonExceeded(PathlabError):
    """A sampler step would pass the end of the run window."""


class ProxyGridGap(PathlabError):
    """The proxy grid does not cover the requested run window."""


class SwitchOutsideHorizon(PathlabError):
    """A regime switch time falls outside the simulated horizon."""


class FullSpaceTooLarge(PathlabError):
    """The flattened tensor space is too large for a dense full-space probe."""


class GridOutsideSupport(PathlabError):
    """A proxy grid point falls outside the reference paths' time support."""
