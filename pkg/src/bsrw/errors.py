"""Exception types raised across the package."""


class BSError(Exception):
    """Base class for all errors raised by bsrw."""


class ZeroParameter(BSError, ValueError):
    pass


class PresentationMismatch(BSError, ValueError):
    pass


class WrongClass(BSError, ValueError):
    """Operation undefined for this group class (e.g. hyperbolic projection of BS(2,2))."""


class NotAdjacent(BSError, ValueError):
    pass


class TruncationError(BSError):
    """Finite recorded data is too short to answer the query."""


class MembershipError(BSError, ValueError):
    pass


class CapExceeded(BSError):
    pass


class WeightSumError(BSError, ValueError):
    pass


class DuplicateSupport(BSError, ValueError):
    pass


class OracleUnresolved(BSError):
    """Word length could not be pinned down under the BFS cap."""


class DepthTooDeep(BSError):
    pass


class WrongDrift(BSError, ValueError):
    pass


class InsufficientSamples(BSError):
    pass


class DegenerateStrip(BSError, ValueError):
    pass
