"""Exception types raised by the samplers."""


class SamplerError(Exception):
    """Base class for all sampler errors."""


class InvalidIntervalError(SamplerError, ValueError):
    """An interval with ``lo >= hi`` or a non-finite endpoint."""


class InvalidParameterError(SamplerError, ValueError):
    """A distribution parameter outside its admissible range."""


class InvalidStateError(SamplerError, ValueError):
    """A chain state that violates the sampler's invariants.

    Typically a chain started outside the support of the target.
    """


class InvalidTargetError(SamplerError, ValueError):
    """A target density or mass function that cannot be sampled."""


class ShrinkStallError(SamplerError, RuntimeError):
    """The shrinkage loop hit its iteration guard without an acceptance.

    For a continuous target whose current point lies inside the slice this
    should not happen; it usually means the log density returns NaN or is
    discontinuous at the current point.
    """
