import random
from fractions import Fraction

import pytest

from bnftrace.errors import FieldError
from bnftrace.fields import (FloatField, RationalComplex, RationalField,
                             field_from_name)


def _random_rc(rng):
    return RationalComplex(Fraction(rng.randint(-20, 20), rng.randint(1, 9)),
                           Fraction(rng.randint(-20, 20), rng.randint(1, 9)))


def test_rational_field_axioms_randomized():
    rng = random.Random(42)
    F = RationalField()
    for _ in range(200):
        a, b, c = (_random_rc(rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + b == b + a
        assert a * b == b * a
        assert a + F.zero == a
        assert a * F.one == a
        if not F.is_zero(a):
            assert a * F.inv(a) == F.one


def test_rational_exact_addition():
    F = RationalField()
    third = F.from_rational("1/3")
    two_thirds = F.from_rational("2/3")
    assert third + two_thirds == F.one


def test_i_squared():
    F = RationalField()
    assert F.i * F.i == -F.one


def test_rational_parse_format_roundtrip():
    F = RationalField()
    x = F.parse("-7/3", "22/5")
    re, im = F.format(x)
    assert F.parse(re, im) == x


def test_rational_sqrt_exact():
    F = RationalField()
    assert F.sqrt(F.from_int(4)) == F.from_int(2)
    assert F.sqrt(F.from_rational("9/16")) == F.from_rational("3/4")
    assert F.sqrt(F.from_int(-4)) == F.from_rational(0, 2)
    z = F.from_rational("7/25", "24/25")  # (4/5 + 3i/5)^2
    s = F.sqrt(z)
    assert s * s == z
    assert s == F.from_rational("4/5", "3/5")


def test_rational_sqrt_inexact_raises():
    F = RationalField()
    with pytest.raises(FieldError):
        F.sqrt(F.from_int(2))
    with pytest.raises(FieldError):
        F.sqrt(F.from_rational("3/5", "4/5"))


def test_rational_exp_unavailable():
    F = RationalField()
    with pytest.raises(FieldError):
        F.exp(F.one)


def test_float_field_tolerance():
    F = FloatField()
    assert F.close(1.0 + 0j, 1.0 + 1e-14j)
    assert not F.close(1.0 + 0j, 1.0 + 1e-6j)
    assert F.is_zero(0j)
    assert not F.is_zero(1e-300 + 0j)  # pruning is exact-zero only


def test_float_parse_rational_strings():
    F = FloatField()
    x = F.parse("1/4", "0")
    assert abs(x - 0.25) < 1e-15


def test_field_from_name():
    assert field_from_name("rational").exact
    assert not field_from_name("float").exact
    with pytest.raises(FieldError):
        field_from_name("decimal")


def test_extended_precision_field():
    F = field_from_name("float", precision=128)
    x = F.from_rational("1/3")
    y = x * F.from_int(3) - F.one
    assert F.abs(y) < 1e-35
    assert F.abs(F.exp(F.zero) - F.one) == 0
