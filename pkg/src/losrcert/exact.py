"""Exact scalars: rationals and the quadratic field Q(sqrt 2).

Measurement statistics of the GHZ strategies only involve the angles
0, pi/4 and pi/2, so every probability lives in Q(sqrt 2).  ``QSqrt2``
carries ``a + b*sqrt(2)`` with rational ``a, b`` and supports exact sign
tests, which is all the certificate checker needs.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[int, Fraction, "QSqrt2", float]


class QSqrt2:
    """Element ``a + b*sqrt(2)`` of Q(sqrt 2), immutable and hashable."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))

    def __setattr__(self, name, value):
        raise AttributeError("QSqrt2 is immutable")

    @staticmethod
    def coerce(x) -> "QSqrt2":
        if isinstance(x, QSqrt2):
            return x
        if isinstance(x, (int, Rational)):
            return QSqrt2(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QSqrt2")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return QSqrt2.coerce(other) - self

    def __mul__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self) -> "QSqrt2":
        return QSqrt2(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 2 * self.b * self.b

    def __truediv__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        num = self * o.conjugate()
        return QSqrt2(num.a / n, num.b / n)

    def __rtruediv__(self, other):
        return QSqrt2.coerce(other) / self

    # ordering -------------------------------------------------------------
    def sign(self) -> int:
        """Exact sign of ``a + b*sqrt(2)``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with 2 b^2
        d = self.a * self.a - 2 * self.b * self.b
        return sa if d > 0 else (-sa if d < 0 else 0)

    def _cmp(self, other) -> int:
        return (self - QSqrt2.coerce(other)).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(2.0)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        return f"QSqrt2({self.a}, {self.b})"

    def __str__(self):
        return format_exact(self)


SQRT2 = QSqrt2(0, 1)

_QS_RE = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)?\s*(?:(?P<sgn>[+-])\s*(?P<b>\d+(?:/\d+)?)\*sqrt2)?\s*$"
)


def format_exact(x) -> str:
    """Render an exact scalar as ``"p/q"`` or ``"p/q+r/s*sqrt2"``."""
    if isinstance(x, QSqrt2):
        if x.b == 0:
            return format_exact(x.a)
        sgn = "+" if x.b > 0 else "-"
        return f"{format_exact(x.a)}{sgn}{format_exact(abs(x.b))}*sqrt2"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_exact(text: str):
    """Inverse of :func:`format_exact`; returns ``Fraction`` when rational."""
    if not isinstance(text, str):
        raise TypeError(f"expected exact string, got {type(text).__name__}")
    m = _QS_RE.match(text)
    if m is None or (m.group("a") is None and m.group("b") is None):
        raise ValueError(f"malformed exact scalar {text!r}")
    a = Fraction(m.group("a") or 0)
    if m.group("b") is None:
        return a
    b = Fraction(m.group("b"))
    if m.group("sgn") == "-":
        b = -b
    return QSqrt2(a, b)


def to_exact(x, max_denominator: int = 10**9):
    """Convert to an exact scalar; floats are rounded to a nearby rational."""
    if isinstance(x, (QSqrt2, Fraction, int)):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(float(x)).limit_denominator(max_denominator)


def exact_sign(x) -> int:
    if isinstance(x, QSqrt2):
        return x.sign()
    return (x > 0) - (x < 0)


def simplify(x):
    """Collapse a rational-valued ``QSqrt2`` to ``Fraction``."""
    if isinstance(x, QSqrt2) and x.b == 0:
        return x.a
    return x
