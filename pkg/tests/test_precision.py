import math
from fractions import Fraction

import pytest

from leglab.precision import (EXACT_RATIONAL, FLOAT64, PrecisionContext, PrecisionError,
                              bigfloat, neumaier_sum, parse_precision)


def test_modes_and_validation():
    assert FLOAT64.mode == "f64" and FLOAT64.eps == 2.0 ** -52
    assert bigfloat(256).bits == 256
    with pytest.raises(ValueError):
        PrecisionContext("big", 32)
    with pytest.raises(ValueError):
        PrecisionContext("f64", 128)
    with pytest.raises(ValueError):
        PrecisionContext("weird")


def test_parse_precision():
    assert parse_precision("f64") is FLOAT64
    assert parse_precision("big:512").bits == 512
    assert parse_precision("big").bits == 256
    assert parse_precision("exact").is_exact
    with pytest.raises(ValueError):
        parse_precision("quad")


def test_convert_roundtrip():
    big = bigfloat(128)
    assert float(big.convert(0.25)) == 0.25
    assert EXACT_RATIONAL.convert(3) == Fraction(3)
    assert EXACT_RATIONAL.convert(Fraction(1, 3)) == Fraction(1, 3)
    assert big.convert(Fraction(1, 4)) == 0.25


def test_exact_mode_rejects_irrational_ops():
    with pytest.raises(PrecisionError):
        EXACT_RATIONAL.sqrt(Fraction(2))
    with pytest.raises(PrecisionError):
        EXACT_RATIONAL.require_inexact("op")
    FLOAT64.require_inexact("op")  # no-op


def test_neumaier_sum_matches_fsum():
    vals = [1e16, 1.0, -1e16, 3.0, 0.1, -0.1] * 50
    assert neumaier_sum(vals) == math.fsum(vals)


def test_context_is_immutable():
    with pytest.raises(AttributeError):
        FLOAT64.bits = 128
