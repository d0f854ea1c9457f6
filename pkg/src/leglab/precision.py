"""Arithmetic contexts threaded through every numeric operation.

Three modes are supported: plain IEEE double (the workhorse), mpmath
big-floats with a configurable significand, and exact rationals via
``fractions.Fraction``.  A context converts inputs into its native number
type; arithmetic then happens through ordinary Python operators, so the
same recurrence code serves all three modes.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Union

import mpmath

Number = Union[float, Fraction, Any]  # Any: mpmath.mpf

F64 = "f64"
BIG = "big"
EXACT = "exact"


class PrecisionError(ArithmeticError):
    """Raised when a computation cannot certify its result at the requested precision."""


@dataclass(frozen=True)
class PrecisionContext:
    """Arithmetic configuration: mode plus significand bits (big-float mode only)."""

    mode: str = F64
    bits: int = 0

    def __post_init__(self):
        if self.mode not in (F64, BIG, EXACT):
            raise ValueError(f"unknown precision mode {self.mode!r}")
        if self.mode == BIG and self.bits < 64:
            raise ValueError("big-float precision requires at least 64 bits")
        if self.mode != BIG and self.bits:
            raise ValueError("bits is only meaningful in big-float mode")

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT

    @property
    def eps(self) -> float:
        """Unit roundoff of the context (0 for exact rationals)."""
        if self.mode == F64:
            return 2.0 ** -52
        if self.mode == BIG:
            return 2.0 ** (1 - self.bits)
        return 0.0

    @contextmanager
    def active(self) -> Iterator[None]:
        """Activate the mpmath working precision for the duration of a block."""
        if self.mode == BIG:
            with mpmath.workprec(self.bits):
                yield
        else:
            yield

    def convert(self, x) -> Number:
        """Coerce ``x`` into the context's native number type."""
        if self.mode == F64:
            return float(x)
        if self.mode == BIG:
            with mpmath.workprec(self.bits):
                if isinstance(x, Fraction):
                    return mpmath.mpf(x.numerator) / x.denominator
                return mpmath.mpf(x)
        if isinstance(x, (Fraction, int)):
            return Fraction(x)
        if isinstance(x, float):
            # floats are dyadic rationals; the conversion is exact
            return Fraction(x)
        raise TypeError(f"exact-rational mode cannot represent {type(x).__name__} input")

    def zero(self) -> Number:
        return self.convert(0)

    def one(self) -> Number:
        return self.convert(1)

    def sqrt(self, x) -> Number:
        if self.mode == BIG:
            with mpmath.workprec(self.bits):
                return mpmath.sqrt(x)
        if self.mode == EXACT:
            raise PrecisionError("square roots are not rational; use a floating mode")
        return math.sqrt(x)

    def to_float(self, x) -> float:
        return float(x)

    def require_inexact(self, op: str) -> None:
        """Reject exact-rational mode for operations with irrational results."""
        if self.mode == EXACT:
            raise PrecisionError(f"{op} produces irrational values; exact-rational mode is not accepted")

    def describe(self) -> str:
        if self.mode == BIG:
            return f"big:{self.bits}"
        return self.mode


FLOAT64 = PrecisionContext(F64)
EXACT_RATIONAL = PrecisionContext(EXACT)


def bigfloat(bits: int = 256) -> PrecisionContext:
    return PrecisionContext(BIG, bits)


def parse_precision(text: str) -> PrecisionContext:
    """Parse a CLI precision spec: ``f64``, ``big:<bits>``, or ``exact``."""
    text = text.strip().lower()
    if text == F64:
        return FLOAT64
    if text == EXACT:
        return EXACT_RATIONAL
    if text.startswith("big"):
        _, _, b = text.partition(":")
        return bigfloat(int(b) if b else 256)
    raise ValueError(f"cannot parse precision spec {text!r}")


def neumaier_sum(values) -> float:
    """Compensated float sum (Neumaier variant); exactness helper for tests."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp
