"""Exception hierarchy shared by all modules."""


class WaveboundError(Exception):
    """Base class for every error raised by this package."""


class SingularMode(WaveboundError):
    """Division by the dispersion relation hits a nonzero p = 0 mode (m = 0)."""


class GridMismatch(WaveboundError):
    pass


class DecayViolated(WaveboundError):
    """Field mass reaches the outer shell of the periodic box."""


class RegionOutsideGrid(WaveboundError):
    pass


class MassNotZero(WaveboundError):
    pass


class NotLocalized(WaveboundError):
    """Cauchy data carry mass outside the closure of the region."""


class NotSpacelikeRight(WaveboundError):
    pass


class SolveFailure(WaveboundError):
    pass


class TruncationNotConverged(WaveboundError):
    pass


class TraceMismatch(WaveboundError):
    pass


class ZeroDenominator(WaveboundError):
    pass


class EigSolveFailure(WaveboundError):
    pass


class ResampleUnderResolved(WaveboundError):
    pass


class ConfigInvalid(WaveboundError):
    pass
