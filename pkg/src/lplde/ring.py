"""Coefficient rings for series arithmetic.

Two rings are supported:

* the exact rational field. Public scalars are :class:`fractions.Fraction`;
  series store :class:`gmpy2.mpq` internally because it is an order of
  magnitude faster and, like ``Fraction``, always kept in lowest terms.
* big floats at a fixed binary precision, represented publicly by
  :class:`BigFloat` and internally by :class:`gmpy2.mpfr`.

Plain Python ``int`` values act as literals in either ring. Anything else
(a ``Fraction`` meeting a ``BigFloat``, two ``BigFloat`` of different
precision, a Python ``float``) raises :class:`RingMismatch`; conversions
are always explicit.
"""

from __future__ import annotations

import math
import operator
import os
from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import DivisionByZero, RingMismatch

__all__ = [
    "DEFAULT_PRECISION",
    "BigFloat",
    "RationalRing",
    "BigFloatRing",
    "Ring",
    "RingScalar",
    "EXACT",
    "to_bigfloat",
    "scalar_to_str",
    "scalar_from_str",
    "precision_context",
]

DEFAULT_PRECISION = int(os.environ.get("LPLDE_PRECISION", "256"))
MIN_PRECISION = 64


def precision_context(precision: int):
    """gmpy2 context manager running mpfr arithmetic at ``precision`` bits.

    Inexact results are never trapped inside it, so a test can enable
    ``trap_inexact`` globally to catch arithmetic that escaped the context.
    """
    return gmpy2.context(gmpy2.get_context(), precision=precision, trap_inexact=False)


def _check_precision(precision: int) -> int:
    if int(precision) != precision or precision < MIN_PRECISION:
        raise ValueError(f"precision must be an integer >= {MIN_PRECISION}, got {precision!r}")
    return int(precision)


class BigFloat:
    """Immutable arbitrary precision float carrying its precision.

    Parameters
    ----------
    value : int, float, str, Fraction, BigFloat or gmpy2 number
        Value to round to ``precision`` bits. Strings are parsed in decimal;
        floats (numpy scalars included) go through their shortest decimal
        repr, so ``BigFloat(0.1)`` is one tenth rather than the nearest double.
    precision : int, default=DEFAULT_PRECISION
        Mantissa size in bits, at least 64.
    """

    __slots__ = ("_value", "_precision")

    def __init__(self, value=0, precision: int = DEFAULT_PRECISION):
        precision = _check_precision(precision)
        if isinstance(value, BigFloat):
            value = value._value
        elif isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        elif isinstance(value, float):
            value = repr(float(value))
        with precision_context(precision):
            self._value = mpfr(value)
        self._precision = precision

    @classmethod
    def _from_raw(cls, raw, precision: int) -> "BigFloat":
        obj = object.__new__(cls)
        obj._value = raw
        obj._precision = precision
        return obj

    @property
    def value(self):
        """Underlying :class:`gmpy2.mpfr`."""
        return self._value

    @property
    def precision(self) -> int:
        return self._precision

    def _operand(self, other):
        if isinstance(other, BigFloat):
            if other._precision != self._precision:
                raise RingMismatch(
                    f"BigFloat precision mismatch: {self._precision} vs {other._precision} bits"
                )
            return other._value
        if isinstance(other, int) and not isinstance(other, bool):
            return other
        raise RingMismatch(f"cannot combine BigFloat with {type(other).__name__}")

    def _binary(self, other, op, reflected=False):
        rhs = self._operand(other)
        with precision_context(self._precision):
            out = op(rhs, self._value) if reflected else op(self._value, rhs)
        return BigFloat._from_raw(out, self._precision)

    def __add__(self, other):
        return self._binary(other, operator.add)

    def __radd__(self, other):
        return self._binary(other, operator.add, reflected=True)

    def __sub__(self, other):
        return self._binary(other, operator.sub)

    def __rsub__(self, other):
        return self._binary(other, operator.sub, reflected=True)

    def __mul__(self, other):
        return self._binary(other, operator.mul)

    def __rmul__(self, other):
        return self._binary(other, operator.mul, reflected=True)

    def __truediv__(self, other):
        if not self._operand(other):
            raise DivisionByZero("BigFloat division by zero")
        return self._binary(other, operator.truediv)

    def __rtruediv__(self, other):
        self._operand(other)
        if not self._value:
            raise DivisionByZero("BigFloat division by zero")
        return self._binary(other, operator.truediv, reflected=True)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise RingMismatch("BigFloat powers take integer exponents")
        if exponent < 0 and not self._value:
            raise DivisionByZero("zero to a negative power")
        with precision_context(self._precision):
            return BigFloat._from_raw(self._value**exponent, self._precision)

    def __neg__(self):
        with precision_context(self._precision):
            return BigFloat._from_raw(-self._value, self._precision)

    def __pos__(self):
        return self

    def __abs__(self):
        with precision_context(self._precision):
            return BigFloat._from_raw(abs(self._value), self._precision)

    def __bool__(self):
        return bool(self._value)

    def __float__(self):
        return float(self._value)

    def _compare(self, other, op):
        if isinstance(other, BigFloat):
            rhs = self._operand(other)
        elif isinstance(other, Fraction):
            rhs = mpq(other.numerator, other.denominator)
        elif isinstance(other, (int, float)):
            rhs = other
        else:
            return NotImplemented
        return op(self._value, rhs)

    def __eq__(self, other):
        return self._compare(other, operator.eq)

    def __lt__(self, other):
        return self._compare(other, operator.lt)

    def __le__(self, other):
        return self._compare(other, operator.le)

    def __gt__(self, other):
        return self._compare(other, operator.gt)

    def __ge__(self, other):
        return self._compare(other, operator.ge)

    def __hash__(self):
        return hash((self._precision, self._value))

    def __repr__(self):
        return f"BigFloat('{self.to_decimal()}', precision={self._precision})"

    def __str__(self):
        return self.to_decimal()

    def to_decimal(self, digits: int | None = None) -> str:
        """Decimal string with enough digits to round-trip (by default)."""
        if digits is None:
            digits = math.ceil(self._precision * math.log10(2)) + 1
        return format(self._value, f".{digits}g")

    def sqrt(self) -> "BigFloat":
        if self._value < 0:
            raise ValueError("square root of a negative BigFloat")
        with precision_context(self._precision):
            return BigFloat._from_raw(gmpy2.sqrt(self._value), self._precision)

    def ulp(self) -> "BigFloat":
        """Unit in the last place at this value's magnitude."""
        if not self._value:
            exp = gmpy2.get_emin_min()
        else:
            man, exp = self._value.as_mantissa_exp()
            exp += abs(man).bit_length()
        with precision_context(self._precision):
            return BigFloat._from_raw(mpfr(2) ** (exp - self._precision), self._precision)

    def to_mpmath(self):
        """Exact conversion to an :mod:`mpmath` number."""
        import mpmath

        man, exp = self._value.as_mantissa_exp()
        return mpmath.mpf((int(man), int(exp)))


RingScalar = Union[Fraction, BigFloat]


@dataclass(frozen=True)
class RationalRing:
    """Exact rational field."""

    @property
    def exact(self) -> bool:
        return True

    def context(self):
        return nullcontext()

    def raw(self, value):
        """Strictly convert a ring scalar (or int literal) to the raw mpq."""
        if isinstance(value, bool):
            raise RingMismatch("bool is not a ring scalar")
        if isinstance(value, Fraction):
            return mpq(value.numerator, value.denominator)
        if isinstance(value, int):
            return mpq(value)
        if type(value) is type(mpq()):
            return value
        raise RingMismatch(f"exact ring cannot hold {type(value).__name__}")

    def coerce(self, value):
        """Lenient conversion used for user input: accepts str like '3/4'."""
        if isinstance(value, str):
            return mpq(Fraction(value).numerator, Fraction(value).denominator)
        if isinstance(value, float):
            return mpq(Fraction(value).numerator, Fraction(value).denominator)
        return self.raw(value)

    def scalar(self, raw) -> Fraction:
        return Fraction(int(raw.numerator), int(raw.denominator))

    def zero(self):
        return mpq(0)

    def one(self):
        return mpq(1)

    def to_str(self, raw) -> str:
        return f"{raw.numerator}/{raw.denominator}"

    def __str__(self):
        return "exact"


@dataclass(frozen=True)
class BigFloatRing:
    """Big floats at a fixed binary precision."""

    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        _check_precision(self.precision)

    @property
    def exact(self) -> bool:
        return False

    def context(self):
        return precision_context(self.precision)

    def raw(self, value):
        if isinstance(value, BigFloat):
            if value.precision != self.precision:
                raise RingMismatch(
                    f"BigFloat of precision {value.precision} in a {self.precision}-bit ring"
                )
            return value.value
        if isinstance(value, int) and not isinstance(value, bool):
            with self.context():
                return mpfr(value)
        if type(value) is type(mpfr()):
            if value.precision != self.precision:
                raise RingMismatch("raw mpfr precision differs from ring precision")
            return value
        raise RingMismatch(f"{self.precision}-bit float ring cannot hold {type(value).__name__}")

    def coerce(self, value):
        if isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        elif isinstance(value, BigFloat):
            value = value.value
        with self.context():
            return mpfr(value)

    def scalar(self, raw) -> BigFloat:
        return BigFloat._from_raw(raw, self.precision)

    def zero(self):
        with self.context():
            return mpfr(0)

    def one(self):
        with self.context():
            return mpfr(1)

    def to_str(self, raw) -> str:
        return scalar_to_str(self.scalar(raw))

    def __str__(self):
        return f"bf{self.precision}"


Ring = Union[RationalRing, BigFloatRing]
EXACT = RationalRing()


def ring_of(value: RingScalar) -> Ring:
    if isinstance(value, BigFloat):
        return BigFloatRing(value.precision)
    if isinstance(value, (Fraction, int)):
        return EXACT
    raise RingMismatch(f"{type(value).__name__} is not a ring scalar")


def to_bigfloat(x, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """Round an exact rational to the nearest ``precision``-bit float."""
    if isinstance(x, BigFloat):
        raise RingMismatch("to_bigfloat expects an exact rational")
    x = Fraction(x)
    return BigFloat(x, precision)


def scalar_to_str(x: RingScalar) -> str:
    """Serialize a scalar: ``"num/den"`` or ``"bf<prec>:<decimal>"``."""
    if isinstance(x, BigFloat):
        return f"bf{x.precision}:{x.to_decimal()}"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def scalar_from_str(text: str) -> RingScalar:
    """Inverse of :func:`scalar_to_str`."""
    if text.startswith("bf"):
        tag, _, digits = text.partition(":")
        return BigFloat(digits, int(tag[2:]))
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or 1))
