"""Exception and warning types shared across the package."""


class LevyChaosError(Exception):
    """Base class for all library errors."""


class UnsupportedKindError(LevyChaosError):
    """The operation needs a measure representation it did not get
    (e.g. sampling from a bare moment sequence)."""


class MomentOrderError(LevyChaosError):
    """A moment beyond the stored order was requested."""


class NumericalBreakdownError(LevyChaosError):
    """The moment input is not positive definite: the recurrence produced
    a significantly negative squared norm."""


class DegenerateDegreeError(LevyChaosError):
    """A polynomial degree at or beyond the measure's support size was
    requested where only genuine degrees make sense."""


class TruncationOverflowError(LevyChaosError):
    """The exact result would leave the (particle, degree) truncation
    window; the operation refuses rather than silently projecting."""


class SizeExceededError(LevyChaosError):
    """A dense tensor request is too large for the oracle path."""


class ConfigError(LevyChaosError):
    """The experiment configuration is invalid."""


class IllConditionedWarning(UserWarning):
    """The moment-based recurrence lost more than six decimal digits."""
