"""Order-by-order delta expansion with strained time.

The oscillator equation is interpolated with a solvable linear one,

    Omega^2 x'' + (1 + lam2) x = delta * [f(x, x') + lam2 x],

and both the frequency and the solution are expanded in the bookkeeping
parameter ``delta`` (set to 1 at the end).  Secular terms are removed order
by order, which fixes the frequency coefficients.  ``lam2`` is the square of
the arbitrary interpolation parameter; only its square ever appears.

Two families are supported:

* conservative oscillators with force ``-mu x**(2N-1)``; ``Omega**2`` is
  expanded, ``Omega**2 = sum(alpha_n)``.
* the Van der Pol oscillator, ``f = mu Omega (1 - x**2) x'``; ``Omega`` itself
  is expanded, ``Omega = sum(gamma_n)``, and the limit-cycle amplitude of each
  order is fixed one order late by the sine resonance condition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from .errors import (
    InsufficientData,
    InvalidFamily,
    NonOscillatory,
    NoRealRoot,
    OrderOutOfRange,
    ParameterDependence,
    RingMismatch,
)
from .ring import EXACT, BigFloat, BigFloatRing, RingScalar, precision_context, ring_of
from .trig import TrigSeries

__all__ = [
    "Conservative",
    "VanDerPol",
    "DUFFING",
    "SEXTIC",
    "OCTIC",
    "VAN_DER_POL",
    "Convention",
    "ProblemSpec",
    "ExpansionResult",
    "expand",
    "expand_conservative",
    "expand_vdp",
    "extract_kappa",
    "fit_kappa_decay",
    "fourier_coefficients",
    "beta_coefficients",
    "residual_check",
]


@dataclass(frozen=True)
class Conservative:
    """Potential ``x**2/2 + mu x**(2N) / (2N)``; ``N = 2`` is Duffing."""

    N: int = 2

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvalidFamily(f"conservative family needs integer N >= 2, got {self.N!r}")

    @property
    def exponent(self) -> int:
        return 2 * self.N - 1

    @property
    def name(self) -> str:
        return {2: "duffing", 3: "sextic", 4: "octic"}.get(self.N, f"anharmonic-{2 * self.N}")


@dataclass(frozen=True)
class VanDerPol:
    name: str = field(default="vdp", init=False)


DUFFING = Conservative(2)
SEXTIC = Conservative(3)
OCTIC = Conservative(4)
VAN_DER_POL = VanDerPol()


class Convention(str, enum.Enum):
    """Rule fixing the homogeneous ``cos(tau)`` term of each conservative ``x_n``."""

    AMPLITUDE_AT_ZERO = "amplitude-at-zero"
    NO_FUNDAMENTAL = "no-fundamental"


@dataclass(frozen=True)
class ProblemSpec:
    """Input of an expansion.

    The coefficient ring is taken from ``mu``: ``Fraction``/``int`` values run
    in the exact rational field, ``BigFloat`` values in the float ring of
    their precision.  ``amplitude`` is ignored for Van der Pol.
    """

    family: Conservative | VanDerPol
    mu: RingScalar
    amplitude: RingScalar = 1
    lambda_sq: RingScalar = 0
    max_order: int = 10
    convention: Convention = Convention.AMPLITUDE_AT_ZERO

    def __post_init__(self):
        if not isinstance(self.family, (Conservative, VanDerPol)):
            raise InvalidFamily(f"unknown family {self.family!r}")
        if self.max_order < 0:
            raise ValueError("max_order must be >= 0")
        ring = ring_of(self.mu)
        for name in ("amplitude", "lambda_sq"):
            if isinstance(self.family, VanDerPol) and name == "amplitude":
                continue
            other = ring_of(getattr(self, name))
            if other != ring and not isinstance(getattr(self, name), int):
                raise RingMismatch(f"{name} lives in {other}, mu in {ring}")
        object.__setattr__(self, "convention", Convention(self.convention))

    @property
    def ring(self):
        return ring_of(self.mu)

    @property
    def is_vdp(self) -> bool:
        return isinstance(self.family, VanDerPol)

    def replace(self, **changes) -> "ProblemSpec":
        from dataclasses import replace

        return replace(self, **changes)

    def check_oscillatory(self):
        """Raise :class:`NonOscillatory` if ``A`` lies beyond the turning points."""
        if self.is_vdp:
            return
        ring = self.ring
        mu, A = ring.raw(self.mu), ring.raw(self.amplitude)
        with ring.context():
            if 1 + mu * A ** (2 * self.family.N - 2) <= 0:
                raise NonOscillatory(
                    f"amplitude {A} is not inside the wells of V for mu = {mu}"
                )


@dataclass(frozen=True)
class ExpansionResult:
    """Output of :func:`expand_conservative` or :func:`expand_vdp`.

    Attributes
    ----------
    spec : ProblemSpec
    freq_coeffs : tuple
        ``alpha_n`` (conservative, terms of ``Omega**2``) or ``gamma_n``
        (Van der Pol, terms of ``Omega``), ``n = 0..max_order``.
    solutions : tuple of TrigSeries
        ``x_n(tau)``.  For Van der Pol the fundamental amplitude of the last
        order is only fixed at the next order and is left at zero.
    vdp_amplitudes : tuple
        Van der Pol only: ``cos(tau)`` amplitude ``a_n`` of ``x_n`` for
        ``n = 0..max_order-1``.
    """

    spec: ProblemSpec
    freq_coeffs: tuple
    solutions: tuple
    vdp_amplitudes: tuple = ()

    @property
    def ring(self):
        return self.spec.ring

    @property
    def max_order(self) -> int:
        return len(self.freq_coeffs) - 1

    def _sum(self, values):
        ring = self.ring
        with ring.context():
            total = sum((ring.raw(v) for v in values), ring.zero())
        return ring.scalar(total)

    def omega_sq_total(self, order: int | None = None) -> RingScalar:
        """``Omega**2`` at ``delta = 1`` truncated at ``order``."""
        n = self.max_order if order is None else order
        self._check_order(n)
        if self.spec.is_vdp:
            w = self.omega_total(n)
            return w * w
        return self._sum(self.freq_coeffs[: n + 1])

    def omega_total(self, order: int | None = None) -> BigFloat:
        """``Omega`` at ``delta = 1`` (a square root for conservative families)."""
        n = self.max_order if order is None else order
        self._check_order(n)
        if self.spec.is_vdp:
            return self._sum(self.freq_coeffs[: n + 1])
        w2 = self.omega_sq_total(n)
        if isinstance(w2, Fraction):
            w2 = BigFloat(w2)
        return w2.sqrt()

    def period(self, order: int | None = None) -> BigFloat:
        w = self.omega_total(order)
        with precision_context(w.precision):
            return BigFloat._from_raw(2 * gmpy2.const_pi() / w.value, w.precision)

    def solution(self, order: int | None = None) -> TrigSeries:
        """Assembled ``x(tau) = sum_{n <= order} x_n(tau)``.

        For Van der Pol the default order is ``max_order - 1``: the amplitude
        of ``x_max_order`` is still undetermined at that truncation.
        """
        if order is None:
            order = self.max_order - 1 if self.spec.is_vdp and self.max_order > 0 else self.max_order
        self._check_order(order)
        total = TrigSeries.zero(self.ring)
        for x in self.solutions[: order + 1]:
            total = total + x
        return total

    def fourier_corrections(self) -> list:
        """Matrix ``c[n][m]``: coefficient of ``cos((2n+1) tau)`` in ``x_m``."""
        rows = max(max(x.max_harmonic for x in self.solutions), 1) // 2 + 1
        return [[x.cos_coeff(2 * n + 1) for x in self.solutions] for n in range(rows)]

    def _check_order(self, order: int):
        if not 0 <= order <= self.max_order:
            raise OrderOutOfRange(f"order {order} outside 0..{self.max_order}")

    def to_json(self) -> dict:
        from .ring import scalar_to_str

        spec = self.spec
        out = {
            "family": spec.family.name,
            "N": getattr(spec.family, "N", None),
            "mu": scalar_to_str(spec.mu),
            "amplitude": None if spec.is_vdp else scalar_to_str(spec.amplitude),
            "lambda_sq": scalar_to_str(spec.lambda_sq),
            "max_order": spec.max_order,
            "convention": spec.convention.value,
            "freq_coeffs": [scalar_to_str(c) for c in self.freq_coeffs],
            "solutions": [x.to_json() for x in self.solutions],
        }
        if spec.is_vdp:
            out["vdp_amplitudes"] = [scalar_to_str(a) for a in self.vdp_amplitudes]
            out["omega"] = scalar_to_str(self.omega_total())
        else:
            out["omega_sq"] = scalar_to_str(self.omega_sq_total())
        return out


def expand(spec: ProblemSpec) -> ExpansionResult:
    """Dispatch on the family of ``spec``."""
    return expand_vdp(spec) if spec.is_vdp else expand_conservative(spec)


# --------------------------------------------------------------------------
# conservative family


def _graded_sum(pairs, ring):
    return TrigSeries.sum_of_products(pairs, ring=ring)


def expand_conservative(spec: ProblemSpec) -> ExpansionResult:
    """Expand ``Omega**2`` and ``x`` for the force ``-mu x**(2N-1)``.

    The right-hand side at order ``n`` is

        R_n = -sum_{k=1..n} alpha_k x''_{n-k} - mu [x**(2N-1)]_{n-1} + lam2 x_{n-1},

    ``alpha_n`` removes its ``cos(tau)`` component and ``x_n`` is the periodic
    response plus a homogeneous ``cos(tau)`` term chosen by the convention.
    """
    if not isinstance(spec.family, Conservative):
        raise InvalidFamily("expand_conservative needs a conservative family")
    spec.check_oscillatory()
    ring = spec.ring
    mu = ring.raw(spec.mu)
    A = ring.raw(spec.amplitude)
    lam2 = ring.raw(spec.lambda_sq)
    with ring.context():
        w2 = 1 + lam2
    if w2 <= 0:
        raise ValueError("1 + lambda_sq must be positive")
    zero = ring.zero()

    if not A:
        return ExpansionResult(
            spec,
            tuple(ring.scalar(w2 if n == 0 else zero) for n in range(spec.max_order + 1)),
            tuple(TrigSeries.zero(ring) for _ in range(spec.max_order + 1)),
        )

    p = spec.family.exponent
    x0 = TrigSeries._from_raw(ring, {1: A}, {})
    xs = [x0]
    d2 = [x0.second_derivative()]
    alphas = [w2]
    # graded[e][m]: order-m coefficient of (sum delta^k x_k)**e
    graded = {e: [x0**e] for e in range(2, p + 1)}
    graded[1] = xs
    half_is_zero = spec.convention is Convention.NO_FUNDAMENTAL

    for n in range(1, spec.max_order + 1):
        m = n - 1
        if m > 0:
            for e in range(2, p + 1):
                prev = graded[e - 1]
                graded[e].append(_graded_sum(((prev[i], xs[m - i]) for i in range(m + 1)), ring))
        rhs = xs[m]._scale_raw(lam2) - graded[p][m]._scale_raw(mu)
        for k in range(1, n):
            rhs = rhs - d2[n - k]._scale_raw(alphas[k])
        c1 = rhs._cos.get(1, zero)
        with ring.context():
            alpha_n = -c1 / A
        # -alpha_n x0'' = alpha_n A cos(tau) cancels c1; conservative rhs has no sin(tau)
        xn = rhs.without_fundamental().solve_linear_oscillator(ring.scalar(w2))
        if not half_is_zero:
            with ring.context():
                a_n = -sum(xn._cos.values(), zero)
            if a_n:
                cos = dict(xn._cos)
                cos[1] = a_n
                xn = TrigSeries._from_raw(ring, cos, xn._sin, prune=False)
        xs.append(xn)
        d2.append(xn.second_derivative())
        alphas.append(alpha_n)

    return ExpansionResult(spec, tuple(ring.scalar(a) for a in alphas), tuple(xs))


# --------------------------------------------------------------------------
# Van der Pol


def expand_vdp(spec: ProblemSpec) -> ExpansionResult:
    """Expand ``Omega`` and ``x`` for ``x'' + x = mu (1 - x**2) x'``.

    At order ``n`` the cosine and sine resonance conditions are linear in
    the pair ``(gamma_n, a_{n-1})``, with ``a_{n-1}`` the fundamental
    amplitude of ``x_{n-1}``.  At order 1 the sine condition is instead a
    cubic in ``a_0`` whose positive root is taken.  Every ``x_n`` is kept
    free of ``sin(tau)`` (phase convention).
    """
    if not spec.is_vdp:
        raise InvalidFamily("expand_vdp needs the Van der Pol family")
    ring = spec.ring
    if ring.exact:
        raise RingMismatch("Van der Pol expansions need a BigFloat ring")
    mu = ring.raw(spec.mu)
    lam2 = ring.raw(spec.lambda_sq)
    if mu <= 0:
        raise ValueError("Van der Pol expansion needs mu > 0")
    if lam2 < 0:
        raise ValueError("Van der Pol expansion needs lambda_sq >= 0")
    zero = ring.zero()
    with ring.context():
        w2 = 1 + lam2
        g0 = gmpy2.sqrt(w2)
        mu_g0 = mu * g0
    unit = TrigSeries._from_raw(ring, {1: ring.one()}, {})
    d_unit = unit.differentiate()

    # order-1 amplitude: sin(tau) part of mu g0 (1 - a^2 cos^2) (-a sin) is
    # mu g0 (c1 a + c3 a^3)
    c1 = d_unit._sin.get(1, zero)
    c3 = -(unit.mul(unit).mul(d_unit))._sin.get(1, zero)
    with ring.context():
        a0_sq = -c1 / c3
    if not a0_sq > 0:
        raise NoRealRoot("order-1 amplitude equation has no positive real root")
    with ring.context():
        a0 = gmpy2.sqrt(a0_sq)

    x0 = unit._scale_raw(a0)
    dx0 = x0.differentiate()
    xs = [x0]
    dxs = [dx0]
    d2 = [x0.second_derivative()]
    amps = [a0]
    gammas = [g0]
    s_sq = [x0.mul(x0)]  # graded x**2
    forcing = [dx0 - s_sq[0].mul(dx0)]  # graded (1 - x**2) x'
    omega_sq = [w2]  # graded Omega**2
    # d forcing_{n-1} / d a_{n-1}, identical at every order
    x0_unit2 = (x0.mul(unit))._scale_raw(ring.coerce(2))
    g_unit = d_unit - x0_unit2.mul(dx0) - s_sq[0].mul(d_unit)
    with ring.context():
        resonant_gamma = 2 * g0 * a0  # cos(tau) sensitivity to gamma_n

    for n in range(1, spec.max_order + 1):
        m = n - 1
        if m > 0:
            s_sq.append(_graded_sum(((xs[i], xs[m - i]) for i in range(m + 1)), ring))
            corr = _graded_sum(((s_sq[i], dxs[m - i]) for i in range(m + 1)), ring)
            forcing.append(dxs[m] - corr)
        with ring.context():
            partial_w2 = sum((gammas[i] * gammas[n - i] for i in range(1, n)), zero)
        rhs = xs[m]._scale_raw(lam2)
        for k in range(1, n):
            rhs = rhs - d2[n - k]._scale_raw(omega_sq[k])
        rhs = rhs - d2[0]._scale_raw(partial_w2)
        acc = TrigSeries.zero(ring)
        for i in range(n):
            acc = acc + forcing[m - i]._scale_raw(gammas[i])
        rhs = rhs + acc._scale_raw(mu)

        r_c = rhs._cos.get(1, zero)
        r_s = rhs._sin.get(1, zero)
        if n == 1:
            # a_0 is already fixed; only gamma_1 is free
            with ring.context():
                gamma_n = -r_c / resonant_gamma
                rhs = rhs + unit._scale_raw(gamma_n * resonant_gamma)
        else:
            with ring.context():
                sens_a = unit._scale_raw(omega_sq[1] + lam2) + g_unit._scale_raw(mu_g0)
            d_c = sens_a._cos.get(1, zero)
            d_s = sens_a._sin.get(1, zero)
            with ring.context():
                det = resonant_gamma * d_s
                if not det:
                    raise NoRealRoot(f"singular resonance system at order {n}")
                a_prev = -r_s / d_s
                gamma_n = (-r_c - d_c * a_prev) / resonant_gamma
            # fold a_{n-1} into x_{n-1} and everything built from it
            fund = unit._scale_raw(a_prev)
            xs[m] = xs[m] + fund
            dxs[m] = xs[m].differentiate()
            d2[m] = xs[m].second_derivative()
            s_sq[m] = s_sq[m] + x0_unit2._scale_raw(a_prev)
            forcing[m] = forcing[m] + g_unit._scale_raw(a_prev)
            amps.append(a_prev)
            with ring.context():
                rhs = rhs + sens_a._scale_raw(a_prev) + unit._scale_raw(gamma_n * resonant_gamma)
        gammas.append(gamma_n)
        with ring.context():
            omega_sq.append(sum((gammas[i] * gammas[n - i] for i in range(n + 1)), zero))
        xn = rhs.without_fundamental().solve_linear_oscillator(ring.scalar(w2))
        xs.append(xn)
        dxs.append(xn.differentiate())
        d2.append(xn.second_derivative())

    return ExpansionResult(
        spec,
        tuple(ring.scalar(g) for g in gammas),
        tuple(xs),
        tuple(ring.scalar(a) for a in amps),
    )


# --------------------------------------------------------------------------
# structural coefficients


def _scaling_parameter(spec: ProblemSpec):
    """Raw ``eps = mu A**(2N-2) / (1 + lam2)``, the per-order growth factor."""
    ring = spec.ring
    mu, A, lam2 = ring.raw(spec.mu), ring.raw(spec.amplitude), ring.raw(spec.lambda_sq)
    with ring.context():
        return mu * A ** (2 * spec.family.N - 2) / (1 + lam2)


def _second_pair(spec: ProblemSpec, order: int) -> ProblemSpec:
    """Same family and lam2-rule at halved amplitude (changes eps)."""
    ring = spec.ring
    mu, A, lam2 = ring.raw(spec.mu), ring.raw(spec.amplitude), ring.raw(spec.lambda_sq)
    with ring.context():
        A2 = A / 2
        scale = (A2 / A) ** (2 * spec.family.N - 2)
        new_lam2 = lam2 * scale
    return spec.replace(
        amplitude=ring.scalar(A2), lambda_sq=ring.scalar(new_lam2), max_order=order
    )


def _kappa_raw(result: ExpansionResult, n: int):
    spec = result.spec
    ring = spec.ring
    eps = _scaling_parameter(spec)
    alpha = ring.raw(result.freq_coeffs[n])
    w2 = ring.raw(result.freq_coeffs[0])
    with ring.context():
        return -alpha / (w2 * eps**n)


def extract_kappa(result: ExpansionResult, n: int, check: bool = True) -> RingScalar:
    """Numerical coefficient ``kappa_n`` of the frequency correction ``alpha_n``.

    ``alpha_n = -kappa_n (1 + lam2) eps**n`` with
    ``eps = mu A**(2N-2) / (1 + lam2)``; for Duffing with
    ``lam2 = 3 A**2 mu / 4`` this is
    ``alpha_n = -kappa_n (A**2 mu)**n / (1 + 3 A**2 mu / 4)**(n-1)``.

    With ``check`` the expansion is repeated at half the amplitude (``lam2``
    rescaled with ``A**(2N-2)``) and the two values must coincide.

    Raises
    ------
    OrderOutOfRange
        ``n`` is not in ``1..max_order``.
    ParameterDependence
        The second parameter pair gives a different ``kappa_n``.
    """
    spec = result.spec
    if spec.is_vdp:
        raise InvalidFamily("kappa is defined for conservative families")
    if not 1 <= n <= result.max_order:
        raise OrderOutOfRange(f"kappa_{n} needs 1 <= n <= {result.max_order}")
    if not ring_of(spec.mu).exact:
        raise RingMismatch("kappa extraction needs the exact ring")
    if not spec.mu or not spec.amplitude:
        raise ValueError("kappa is undefined for mu = 0 or A = 0")
    kappa = _kappa_raw(result, n)
    if check:
        other = expand_conservative(_second_pair(spec, n))
        if _kappa_raw(other, n) != kappa:
            raise ParameterDependence(f"kappa_{n} differs between parameter pairs")
    return spec.ring.scalar(kappa)


def fit_kappa_decay(kappas: Sequence[tuple[int, RingScalar]]) -> tuple[float, float]:
    """Least-squares fit ``kappa_n ~ prefactor * exp(-rate * n)``.

    Returns ``(prefactor, rate)``.
    """
    pts = [(n, k) for n, k in kappas]
    if len(pts) < 5:
        raise InsufficientData("need at least 5 orders to fit the kappa decay")
    n = np.array([float(p[0]) for p in pts])
    logs = []
    for _, k in pts:
        if k <= 0:
            raise ValueError("kappa values must be positive for a log fit")
        if isinstance(k, BigFloat):
            logs.append(float(gmpy2.log(k.value)))
        else:
            k = Fraction(k)
            logs.append(_log_fraction(k))
    slope, intercept = np.polyfit(n, np.array(logs), 1)
    return float(np.exp(intercept)), float(-slope)


def _log_fraction(x: Fraction) -> float:
    with precision_context(128):
        return float(gmpy2.log(gmpy2.mpq(x.numerator, x.denominator)))


def fourier_coefficients(result: ExpansionResult, order: int | None = None) -> list:
    """Approximate coefficients of ``cos((2n+1) tau)`` of the order-``order`` solution.

    Each is the sum over expansion orders of the corrections
    ``fourier_corrections()[n][m]``.  The list runs up to the highest
    harmonic present: ``n = 0..order`` for Duffing, further for higher powers.
    """
    if result.spec.is_vdp:
        raise InvalidFamily("fourier_coefficients is for conservative families")
    order = result.max_order if order is None else order
    x = result.solution(order)
    return [x.cos_coeff(2 * n + 1) for n in range(max(x.max_harmonic, 1) // 2 + 1)]


def beta_coefficients(result: ExpansionResult) -> list:
    """Matrix ``beta[n][m] = cbar[n][m] / (A eps**m)`` of numerical coefficients.

    ``eps = mu A**(2N-2) / (1 + lam2)``; for Duffing at the third-order
    ``lam2`` this is ``A**2 mu / (1 + 3 A**2 mu / 4)``.  Entries with ``m < n``
    vanish because ``x_m`` only reaches harmonic ``2m + 1``.
    """
    spec = result.spec
    if spec.is_vdp:
        raise InvalidFamily("beta coefficients are for conservative families")
    ring = spec.ring
    eps = _scaling_parameter(spec)
    A = ring.raw(spec.amplitude)
    out = []
    with ring.context():
        for n, row in enumerate(result.fourier_corrections()):
            out.append([ring.scalar(ring.raw(c) / (A * eps**m)) for m, c in enumerate(row)])
    return out


# --------------------------------------------------------------------------
# residual


def _delta_poly_mul(a: list, b: list, top: int, ring) -> list:
    """Truncated product of two delta-polynomials with series coefficients."""
    out = []
    for k in range(top + 1):
        pairs = [(a[i], b[k - i]) for i in range(k + 1) if i < len(a) and k - i < len(b)]
        out.append(TrigSeries.sum_of_products(pairs, ring=ring) if pairs else TrigSeries.zero(ring))
    return out


def _delta_poly_pow(a: list, e: int, top: int, ring) -> list:
    result = [TrigSeries.constant(1, ring)]
    base = a
    while e:
        if e & 1:
            result = _delta_poly_mul(result, base, top, ring)
        e >>= 1
        if e:
            base = _delta_poly_mul(base, base, top, ring)
    return result


def _max_abs(series: TrigSeries, ring):
    with ring.context():
        values = [abs(v) for v in list(series._cos.values()) + list(series._sin.values())]
    return ring.scalar(max(values) if values else ring.zero())


def residual_check(result: ExpansionResult, order: int) -> RingScalar:
    """Largest coefficient of the order-``order`` defect of the delta-graded equation.

    The defect is recomputed from the stored coefficients along an
    independent path (binary powering of truncated delta-polynomials).  It
    is exactly zero in the exact ring.
    """
    spec = result.spec
    ring = spec.ring
    if not 0 <= order <= result.max_order:
        raise OrderOutOfRange(f"order {order} outside 0..{result.max_order}")
    lam2 = ring.raw(spec.lambda_sq)
    mu = ring.raw(spec.mu)
    xs = list(result.solutions[: order + 1])
    with ring.context():
        w2 = 1 + lam2
    coeffs = [ring.raw(c) for c in result.freq_coeffs]
    if spec.is_vdp:
        with ring.context():
            w2_series = [
                sum((coeffs[i] * coeffs[k - i] for i in range(k + 1)), ring.zero())
                for k in range(order + 1)
            ]
    else:
        w2_series = coeffs
    lhs = xs[order]._scale_raw(w2)
    for k in range(order + 1):
        lhs = lhs + xs[order - k].second_derivative()._scale_raw(w2_series[k])
    if order == 0:
        return _max_abs(lhs, ring)
    if spec.is_vdp:
        sq = _delta_poly_pow(xs[:order], 2, order - 1, ring)
        dx = [x.differentiate() for x in xs[:order]]
        one_minus = [TrigSeries.constant(1, ring) - sq[0]] + [-s for s in sq[1:]]
        force = _delta_poly_mul(one_minus, dx, order - 1, ring)
        omega_force = _delta_poly_mul(
            [TrigSeries.constant(ring.scalar(c), ring) for c in coeffs[:order]],
            force,
            order - 1,
            ring,
        )
        rhs = omega_force[order - 1]._scale_raw(mu)
    else:
        power = _delta_poly_pow(xs[:order], spec.family.exponent, order - 1, ring)
        rhs = -power[order - 1]._scale_raw(mu)
    rhs = rhs + xs[order - 1]._scale_raw(lam2)
    return _max_abs(lhs - rhs, ring)
