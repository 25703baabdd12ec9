"""Finite trigonometric polynomials in the strained time.

A :class:`TrigSeries` is ``sum_k a_k cos(k tau) + b_k sin(k tau)`` with
finitely many non-zero coefficients, all drawn from one ring (see
:mod:`lplde.ring`).  Zero coefficients are never stored, so equality of
series is equality of their coefficient maps.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2

from .errors import ResonantRHS, RingMismatch, DivisionByZero
from .ring import (
    DEFAULT_PRECISION,
    EXACT,
    BigFloat,
    BigFloatRing,
    precision_context,
    scalar_from_str,
    scalar_to_str,
)

__all__ = ["TrigSeries"]


def _accumulate_product(oc, os_, s, t):
    """Add twice the product ``s * t`` into raw cos/sin accumulators."""
    for k1, a in s._cos.items():
        for k2, b in t._cos.items():
            p = a * b
            d = k1 - k2 if k1 >= k2 else k2 - k1
            oc[d] = oc.get(d, 0) + p
            oc[k1 + k2] = oc.get(k1 + k2, 0) + p
        for k2, b in t._sin.items():
            # cos a sin b = (sin(b+a) + sin(b-a)) / 2
            p = a * b
            os_[k1 + k2] = os_.get(k1 + k2, 0) + p
            d = k2 - k1
            if d > 0:
                os_[d] = os_.get(d, 0) + p
            elif d < 0:
                os_[-d] = os_.get(-d, 0) - p
    for k1, a in s._sin.items():
        for k2, b in t._cos.items():
            p = a * b
            os_[k1 + k2] = os_.get(k1 + k2, 0) + p
            d = k1 - k2
            if d > 0:
                os_[d] = os_.get(d, 0) + p
            elif d < 0:
                os_[-d] = os_.get(-d, 0) - p
        for k2, b in t._sin.items():
            # sin a sin b = (cos(a-b) - cos(a+b)) / 2
            p = a * b
            d = k1 - k2 if k1 >= k2 else k2 - k1
            oc[d] = oc.get(d, 0) + p
            oc[k1 + k2] = oc.get(k1 + k2, 0) - p


def _prune(coeffs):
    return {k: v for k, v in coeffs.items() if v}


class TrigSeries:
    """Sparse trigonometric polynomial.

    Parameters
    ----------
    ring : RationalRing or BigFloatRing, default=EXACT
        Coefficient ring shared by every term.
    cos : dict, optional
        Harmonic index ``k >= 0`` to coefficient of ``cos(k tau)``. Index 0
        is the constant term.
    sin : dict, optional
        Harmonic index ``k >= 1`` to coefficient of ``sin(k tau)``.

    Coefficients must be scalars of ``ring`` (``Fraction`` or ``BigFloat``)
    or plain ints.
    """

    __slots__ = ("ring", "_cos", "_sin")

    def __init__(self, ring=EXACT, cos=None, sin=None):
        self.ring = ring
        cos = cos or {}
        sin = sin or {}
        if any(k < 0 for k in cos) or any(k < 1 for k in sin):
            raise ValueError("cos indices must be >= 0 and sin indices >= 1")
        self._cos = _prune({int(k): ring.raw(v) for k, v in cos.items()})
        self._sin = _prune({int(k): ring.raw(v) for k, v in sin.items()})

    @classmethod
    def _from_raw(cls, ring, cos, sin, prune=True):
        obj = object.__new__(cls)
        obj.ring = ring
        obj._cos = _prune(cos) if prune else cos
        obj._sin = _prune(sin) if prune else sin
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ring=EXACT) -> "TrigSeries":
        return cls._from_raw(ring, {}, {}, prune=False)

    @classmethod
    def constant(cls, value, ring=EXACT) -> "TrigSeries":
        return cls(ring, cos={0: value})

    @classmethod
    def cosine(cls, k: int = 1, coeff=1, ring=EXACT) -> "TrigSeries":
        return cls(ring, cos={k: coeff})

    @classmethod
    def sine(cls, k: int = 1, coeff=1, ring=EXACT) -> "TrigSeries":
        return cls(ring, sin={k: coeff})

    # -- inspection -------------------------------------------------------

    def cos_coeff(self, k: int):
        return self.ring.scalar(self._cos.get(k, self.ring.zero()))

    def sin_coeff(self, k: int):
        return self.ring.scalar(self._sin.get(k, self.ring.zero()))

    @property
    def cos_coeffs(self) -> dict:
        return {k: self.ring.scalar(v) for k, v in sorted(self._cos.items())}

    @property
    def sin_coeffs(self) -> dict:
        return {k: self.ring.scalar(v) for k, v in sorted(self._sin.items())}

    @property
    def max_harmonic(self) -> int:
        """Largest harmonic index present, or -1 for the zero series."""
        return max(max(self._cos, default=-1), max(self._sin, default=-1))

    def harmonics(self) -> set:
        return set(self._cos) | set(self._sin)

    def is_zero(self) -> bool:
        return not self._cos and not self._sin

    def resonant_part(self):
        """Coefficients ``(cos tau, sin tau)`` of the fundamental harmonic."""
        return self.cos_coeff(1), self.sin_coeff(1)

    def value_at_zero(self):
        """Exact value at ``tau = 0`` (the sum of the cosine coefficients)."""
        with self.ring.context():
            total = sum(self._cos.values(), self.ring.zero())
        return self.ring.scalar(total)

    def __len__(self):
        return len(self._cos) + len(self._sin)

    def __eq__(self, other):
        if not isinstance(other, TrigSeries):
            return NotImplemented
        return self.ring == other.ring and self._cos == other._cos and self._sin == other._sin

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self._cos.items())), tuple(sorted(self._sin.items()))))

    def __repr__(self):
        terms = [f"{self.ring.to_str(v)}*cos({k}t)" for k, v in sorted(self._cos.items())]
        terms += [f"{self.ring.to_str(v)}*sin({k}t)" for k, v in sorted(self._sin.items())]
        return f"TrigSeries[{self.ring}]({' + '.join(terms) or '0'})"

    # -- linear algebra ---------------------------------------------------

    def _check(self, other: "TrigSeries"):
        if not isinstance(other, TrigSeries):
            raise TypeError(f"expected TrigSeries, got {type(other).__name__}")
        if other.ring != self.ring:
            raise RingMismatch(f"series rings differ: {self.ring} vs {other.ring}")

    def __add__(self, other: "TrigSeries") -> "TrigSeries":
        self._check(other)
        with self.ring.context():
            cos = dict(self._cos)
            for k, v in other._cos.items():
                cos[k] = cos[k] + v if k in cos else v
            sin = dict(self._sin)
            for k, v in other._sin.items():
                sin[k] = sin[k] + v if k in sin else v
        return TrigSeries._from_raw(self.ring, cos, sin)

    def __neg__(self) -> "TrigSeries":
        # mpfr negation rounds to the active context, so it needs the ring's
        with self.ring.context():
            cos = {k: -v for k, v in self._cos.items()}
            sin = {k: -v for k, v in self._sin.items()}
        return TrigSeries._from_raw(self.ring, cos, sin, prune=False)

    def __sub__(self, other: "TrigSeries") -> "TrigSeries":
        return self + (-other)

    def scale(self, c) -> "TrigSeries":
        """Multiply every coefficient by the ring scalar ``c``."""
        return self._scale_raw(self.ring.raw(c))

    def _scale_raw(self, c) -> "TrigSeries":
        if not c:
            return TrigSeries.zero(self.ring)
        with self.ring.context():
            cos = {k: v * c for k, v in self._cos.items()}
            sin = {k: v * c for k, v in self._sin.items()}
        return TrigSeries._from_raw(self.ring, cos, sin, prune=not self.ring.exact)

    def __mul__(self, other) -> "TrigSeries":
        if isinstance(other, TrigSeries):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other) -> "TrigSeries":
        return self.scale(other)

    # -- products ---------------------------------------------------------

    def mul(self, other: "TrigSeries") -> "TrigSeries":
        """Exact product via the product-to-sum identities."""
        return TrigSeries.sum_of_products([(self, other)])

    @staticmethod
    def sum_of_products(pairs, ring=None) -> "TrigSeries":
        """``sum(s * t for s, t in pairs)`` accumulated in a single pass."""
        pairs = list(pairs)
        if ring is None:
            if not pairs:
                raise ValueError("ring required for an empty sum")
            ring = pairs[0][0].ring
        oc, os_ = {}, {}
        with ring.context():
            for s, t in pairs:
                s._check(t)
                if s.ring != ring:
                    raise RingMismatch(f"series rings differ: {s.ring} vs {ring}")
                _accumulate_product(oc, os_, s, t)
            half = ring.coerce(Fraction(1, 2))
            cos = {k: v * half for k, v in oc.items()}
            sin = {k: v * half for k, v in os_.items()}
        return TrigSeries._from_raw(ring, cos, sin)

    def __pow__(self, exponent: int) -> "TrigSeries":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("series powers take non-negative integer exponents")
        result = TrigSeries.constant(1, self.ring)
        base = self
        while exponent:
            if exponent & 1:
                result = result.mul(base)
            exponent >>= 1
            if exponent:
                base = base.mul(base)
        return result

    # -- calculus ---------------------------------------------------------

    def differentiate(self) -> "TrigSeries":
        """Termwise ``d/dtau``."""
        with self.ring.context():
            sin = {k: -k * v for k, v in self._cos.items() if k}
            cos = {k: k * v for k, v in self._sin.items()}
        return TrigSeries._from_raw(self.ring, cos, sin, prune=False)

    def second_derivative(self) -> "TrigSeries":
        with self.ring.context():
            cos = {k: -k * k * v for k, v in self._cos.items() if k}
            sin = {k: -k * k * v for k, v in self._sin.items()}
        return TrigSeries._from_raw(self.ring, cos, sin, prune=False)

    def without_fundamental(self) -> "TrigSeries":
        cos = {k: v for k, v in self._cos.items() if k != 1}
        sin = {k: v for k, v in self._sin.items() if k != 1}
        return TrigSeries._from_raw(self.ring, cos, sin, prune=False)

    def solve_linear_oscillator(self, omega0_sq) -> "TrigSeries":
        """Particular solution of ``omega0_sq * (y'' + y) = self``.

        The result carries no ``cos tau`` / ``sin tau`` term; adding a
        homogeneous piece is left to the caller.

        Raises
        ------
        ResonantRHS
            If ``self`` contains the fundamental harmonic.
        """
        if 1 in self._cos or 1 in self._sin:
            raise ResonantRHS("right-hand side contains a secular cos(tau)/sin(tau) term")
        w = self.ring.raw(omega0_sq)
        if not w:
            raise DivisionByZero("omega0_sq must be non-zero")
        if w < 0:
            raise ValueError("omega0_sq must be positive")
        with self.ring.context():
            cos = {k: v / (w * (1 - k * k)) for k, v in self._cos.items()}
            sin = {k: v / (w * (1 - k * k)) for k, v in self._sin.items()}
        return TrigSeries._from_raw(self.ring, cos, sin, prune=False)

    # -- evaluation -------------------------------------------------------

    def evaluate(self, tau, precision: int | None = None) -> BigFloat:
        """Value at ``tau`` as a :class:`BigFloat`.

        ``precision`` defaults to the ring precision (BigFloat ring), the
        precision of ``tau`` when it is a BigFloat, or DEFAULT_PRECISION.
        """
        if precision is None:
            if isinstance(self.ring, BigFloatRing):
                precision = self.ring.precision
            elif isinstance(tau, BigFloat):
                precision = tau.precision
            else:
                precision = DEFAULT_PRECISION
        if isinstance(self.ring, BigFloatRing) and precision != self.ring.precision:
            raise RingMismatch("evaluation precision differs from ring precision")
        if isinstance(tau, BigFloat):
            if tau.precision != precision:
                raise RingMismatch("tau precision differs from evaluation precision")
            tau = tau.value
        elif isinstance(tau, Fraction):
            tau = gmpy2.mpq(tau.numerator, tau.denominator)
        with precision_context(precision):
            t = gmpy2.mpfr(tau)
            total = gmpy2.mpfr(0)
            for k, v in self._cos.items():
                total += gmpy2.mpfr(v) * gmpy2.cos(k * t)
            for k, v in self._sin.items():
                total += gmpy2.mpfr(v) * gmpy2.sin(k * t)
        return BigFloat._from_raw(total, precision)

    def to_float_arrays(self):
        """Dense float64 ``(cos, sin)`` coefficient arrays indexed by harmonic."""
        import numpy as np

        n = self.max_harmonic + 1
        c = np.zeros(max(n, 1))
        s = np.zeros(max(n, 1))
        for k, v in self._cos.items():
            c[k] = float(v)
        for k, v in self._sin.items():
            s[k] = float(v)
        return c, s

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "cos": {str(k): self.ring.to_str(v) for k, v in sorted(self._cos.items())},
            "sin": {str(k): self.ring.to_str(v) for k, v in sorted(self._sin.items())},
        }

    @classmethod
    def from_json(cls, data: dict, ring=None) -> "TrigSeries":
        cos = {int(k): scalar_from_str(v) for k, v in data.get("cos", {}).items()}
        sin = {int(k): scalar_from_str(v) for k, v in data.get("sin", {}).items()}
        if ring is None:
            sample = next(iter(list(cos.values()) + list(sin.values())), None)
            ring = BigFloatRing(sample.precision) if isinstance(sample, BigFloat) else EXACT
        return cls(ring, cos=cos, sin=sin)
