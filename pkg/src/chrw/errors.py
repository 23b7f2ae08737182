"""Exception hierarchy shared by all modules.

Each exception carries an ``exit_code`` used by the command-line frontend.
"""

from __future__ import annotations


class ChrwError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ParameterError(ChrwError, ValueError):
    exit_code = 2


class NonPositiveFrequency(ParameterError):
    pass


class EqualFrequencies(ParameterError):
    pass


class NegativeAmplitude(ParameterError):
    pass


class NonFiniteArgument(ParameterError):
    pass


class NoConvergence(ChrwError):
    """The renormalization equations could not be solved at this point."""

    exit_code = 3


class NoTruncationConvergence(ChrwError):
    exit_code = 3


class DerivativeCrossCheckFailed(ChrwError):
    exit_code = 3


class StepTooLarge(ChrwError):
    exit_code = 3


class TruncationTooSmall(ChrwError, ValueError):
    exit_code = 4


class DimensionOverflow(ChrwError):
    exit_code = 4


class NotHermitian(ChrwError, ValueError):
    pass


class DegenerateSelection(ChrwError):
    """Two independent central Floquet states could not be identified."""

    exit_code = 3


class BandLost(ChrwError):
    """Continuation lost the resonance line it was following."""

    exit_code = 3
