"""Pluggable complex coefficient fields.

Two families are provided:

* :class:`RationalField` -- complex numbers with exact rational real and
  imaginary parts (``fractions.Fraction`` pairs).  Field axioms hold
  exactly; equality is bit-exact.  Used by the round-trip fixtures whose
  data is rational (hyperbolic exponents of the form mu = 2 log(p/q)).
* :class:`FloatField` -- binary floating point complex numbers.  The
  default precision of 64 bits is plain ``complex``; higher precisions are
  backed by ``mpmath.mpc``.  Comparisons always go through a tolerance.

Field *values* are ordinary objects with arithmetic dunders; the field
object itself only provides construction, conversion and the few
operations that depend on the backend (exact zero test, sqrt, exp).
"""

import cmath
import math
from fractions import Fraction

from .errors import FieldError


def _isqrt_exact(n):
    """Integer square root if ``n`` is a perfect square, else None."""
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def _sqrt_fraction(q):
    """Exact square root of a nonnegative Fraction, or None."""
    if q < 0:
        return None
    num = _isqrt_exact(q.numerator)
    den = _isqrt_exact(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


class RationalComplex:
    """A complex number with exact rational real/imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other):
        other = _coerce(other)
        return RationalComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        return RationalComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero RationalComplex")
        return RationalComplex(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer powers supported")
        if k < 0:
            return RationalComplex(1) / self ** (-k)
        out = RationalComplex(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = _coerce(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self):
        return RationalComplex(self.re, -self.im)

    def norm_sq(self):
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"({self.re})+({self.im})i"


def _coerce(x):
    if isinstance(x, RationalComplex):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalComplex(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into RationalComplex")


def _format_fraction(q):
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


class RationalField:
    """Exact field of complex rationals."""

    name = "rational"
    exact = True

    def __init__(self):
        self.zero = RationalComplex(0)
        self.one = RationalComplex(1)
        self.i = RationalComplex(0, 1)

    def from_int(self, n):
        return RationalComplex(n)

    def from_rational(self, re, im=0):
        return RationalComplex(Fraction(re), Fraction(im))

    def parse(self, re_str, im_str="0"):
        return RationalComplex(Fraction(re_str), Fraction(im_str))

    def format(self, x):
        return _format_fraction(x.re), _format_fraction(x.im)

    def is_zero(self, x, tol=None):
        return x.re == 0 and x.im == 0

    def close(self, x, y, tol=None):
        return x == y

    def inv(self, x):
        return RationalComplex(1) / x

    def conj(self, x):
        return x.conjugate()

    def abs(self, x):
        return math.sqrt(float(x.norm_sq()))

    def to_complex(self, x):
        return complex(x)

    def real_part(self, x):
        return x.re

    def sqrt(self, x):
        """Exact square root in Q(i); raises FieldError when none exists."""
        if x.im == 0:
            r = _sqrt_fraction(x.re)
            if r is not None:
                return RationalComplex(r)
            r = _sqrt_fraction(-x.re)
            if r is not None:
                return RationalComplex(0, r)
            raise FieldError(f"no exact square root of {x!r} in Q(i)")
        s = _sqrt_fraction(x.norm_sq())
        if s is None:
            raise FieldError(f"no exact square root of {x!r} in Q(i)")
        u2 = (x.re + s) / 2
        u = _sqrt_fraction(u2)
        if u is None or u == 0:
            raise FieldError(f"no exact square root of {x!r} in Q(i)")
        v = x.im / (2 * u)
        cand = RationalComplex(u, v)
        if cand * cand == x:
            return cand
        raise FieldError(f"no exact square root of {x!r} in Q(i)")

    def exp(self, x):
        raise FieldError("exp is not exact on the rational field")

    def factorial_inv(self, m):
        return RationalComplex(Fraction(1, math.factorial(m)))

    def from_pyint_fraction(self, p, q=1):
        return RationalComplex(Fraction(p, q))


class FloatField:
    """Floating point complex field.

    ``precision`` counts bits of the underlying binary format; 64 selects
    native ``complex`` (IEEE double), anything larger switches to
    ``mpmath.mpc`` with a matching mantissa.
    """

    exact = False

    def __init__(self, precision=64, tol=1e-12):
        self.precision = precision
        self.tol = tol
        if precision <= 64:
            self.name = "float"
            self._mp = None
            self.zero = 0j
            self.one = 1 + 0j
            self.i = 1j
        else:
            import mpmath

            self.name = "float"
            ctx = mpmath.mp.clone()
            ctx.prec = precision
            self._mp = ctx
            self.zero = ctx.mpc(0)
            self.one = ctx.mpc(1)
            self.i = ctx.mpc(0, 1)

    def from_int(self, n):
        return self.one * n

    def from_rational(self, re, im=0):
        if self._mp is None:
            return complex(float(Fraction(re)), float(Fraction(im)))
        re, im = Fraction(re), Fraction(im)
        return self._mp.mpc(re.numerator, 0) / re.denominator + self.i * (
            self._mp.mpc(im.numerator, 0) / im.denominator
        )

    def parse(self, re_str, im_str="0"):
        if "/" in re_str or "/" in im_str:
            return self.from_rational(Fraction(re_str), Fraction(im_str))
        if self._mp is None:
            return complex(float(re_str), float(im_str))
        return self._mp.mpc(re_str, im_str)

    def format(self, x):
        return repr(float(x.real)), repr(float(x.imag))

    def is_zero(self, x, tol=None):
        # Normalisation prunes only exact zeros; tolerances are for comparisons.
        return x == 0

    def close(self, x, y, tol=None):
        t = self.tol if tol is None else tol
        return abs(x - y) <= t * max(1.0, abs(x), abs(y))

    def inv(self, x):
        return self.one / x

    def conj(self, x):
        return x.conjugate()

    def abs(self, x):
        return float(abs(x))

    def to_complex(self, x):
        return complex(x)

    def real_part(self, x):
        return x.real

    def sqrt(self, x):
        if self._mp is None:
            return cmath.sqrt(x)
        return self._mp.sqrt(x)

    def exp(self, x):
        if self._mp is None:
            return cmath.exp(x)
        return self._mp.exp(x)

    def factorial_inv(self, m):
        return self.one / math.factorial(m)


def field_from_name(name, precision=64):
    if name == "rational":
        return RationalField()
    if name == "float":
        return FloatField(precision=precision)
    raise FieldError(f"unknown coefficient field {name!r}")
