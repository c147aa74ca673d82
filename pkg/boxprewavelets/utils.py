import math
from fractions import Fraction


class PrewaveletError(Exception):
    """Base class for errors raised by boxprewavelets."""


class InconclusiveCertificate(PrewaveletError):
    """No certificate was found within the configured budget.

    This never means the polynomial has zeros on the torus.
    """


class VerificationError(PrewaveletError):
    """An exact check failed.

    Args:
        message (str): Human readable description.
        index (tuple, optional): Offending mask index. Default: None
        residual (LaurentPoly, optional): Offending residual polynomial. Default: None
    """

    def __init__(self, message, index=None, residual=None):
        super(VerificationError, self).__init__(message)
        self.index = index
        self.residual = residual


class EigenproblemError(PrewaveletError):
    """The refinement eigenvalue 1 is not simple."""


def lcm_of_denominators(values):
    result = 1
    for value in values:
        result = math.lcm(result, Fraction(value).denominator)
    return result


def parse_rational(text):
    """Parse '3', '-1/2' or '0.25' into an exact Fraction."""
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Invalid rational: '{text}'.")
    return value


def format_rational(value):
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
