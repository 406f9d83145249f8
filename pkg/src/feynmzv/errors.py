"""Shared exception types.

Every failure mode that callers are expected to branch on gets its own
class; anything else is a plain ValueError at the site of the offense.
"""


class FeynmzvError(Exception):
    """Base class for all engine errors."""


class NotLinearError(FeynmzvError):
    """A polynomial was required to be linear in a variable and is not."""


class PolarPartError(FeynmzvError):
    """A regularized limit hit a genuine pole (non-logarithmic divergence)."""


class PolynomialGrowthError(FeynmzvError):
    """An expression grows polynomially at infinity; Reg is undefined."""


class UnresolvedConstantError(FeynmzvError):
    """A constant escaped the supported period classes (e.g. log of a
    non-unit rational content, or a numeric fit that failed or was
    ambiguous)."""


class NotReducibleError(FeynmzvError):
    """No admissible elimination order exists for the requested job."""


class AlphabetError(FeynmzvError):
    """A denominator root did not resolve to a letter of the working
    alphabet (reduction promised it would)."""
