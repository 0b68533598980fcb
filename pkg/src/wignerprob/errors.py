"""Exception hierarchy shared by all modules.

Validation problems (bad arguments, sub-quantum cells) derive from
``ValueError``; numerical tolerance failures (truncation, quadrature,
inconsistent fields) derive from ``ArithmeticError``. The CLI maps the two
families onto distinct exit codes.
"""


class WignerProbError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WignerProbError, ValueError):
    """An argument or constructed object violates a documented invariant."""


class RefinementError(ValidationError):
    """A cell or partition would contain a domain smaller than hbar/2."""


class NumericalError(WignerProbError, ArithmeticError):
    """A numerical result failed its tolerance check."""


class TruncationError(NumericalError):
    """The Fock cutoff is too small for the requested state or operator."""

    def __init__(self, message, required_cutoff=None, tail_weight=None):
        super().__init__(message)
        self.required_cutoff = required_cutoff
        self.tail_weight = tail_weight


class QuadratureError(NumericalError):
    """A quadrature did not converge to the requested accuracy."""


class InconsistencyError(NumericalError):
    """A computed field violates a structural property (realness, mass, sign)."""
