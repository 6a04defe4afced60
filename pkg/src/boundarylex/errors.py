"""Exception types shared by all modules."""


class BoundarylexError(Exception):
    """Base class for all errors raised by this package."""


class UnknownLetter(BoundarylexError):
    """A word contains a symbol outside the alphabet."""


class NotSmallCancellation(BoundarylexError):
    """A Dehn-algorithm operation was invoked on a non small-cancellation oracle."""


class SmallCancellationViolation(BoundarylexError):
    """The symmetrized relator set fails the metric C'(1/6) piece condition."""


class NotGeodesic(BoundarylexError):
    """A word that must be geodesic is not."""


class NotGeodesicReplacement(BoundarylexError):
    """A proposed segment replacement is not a geodesic word between the segment endpoints."""


class NotAPath(BoundarylexError):
    """Consecutive vertices of an alleged path are not adjacent."""


class OutOfRange(BoundarylexError):
    """A requested element or parameter lies outside the constructed ball."""


class ResourceLimit(BoundarylexError):
    """A configured resource cap (vertex count, closure size) was exceeded."""


class EmptyTargetSet(BoundarylexError):
    """A target vertex set came out empty."""


class AlphabetMismatch(BoundarylexError):
    """Two sequence models live over different alphabets."""


class WindowTooSmall(BoundarylexError):
    """Truncated sequences are too short for the configured minimum overlap."""


class NotShiftClosed(BoundarylexError):
    """A carrier handed to the cover construction is not closed under one shift step."""


class InternalConsistencyError(BoundarylexError):
    """An internal cross-check failed; indicates a bug or a violated modelling assumption."""


class ConfigError(BoundarylexError):
    """A presentation file or run configuration is malformed."""
