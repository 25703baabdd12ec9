"""Choice of the interpolation parameter by minimal sensitivity.

The truncated frequency depends spuriously on ``lam2``; the optimal value is a
stationary point of that dependence.  Closed forms of the third-order
stationary point are available for the Duffing, sextic and octic families,
and the Van der Pol optimum at order 44 follows a straight line in ``mu``.
:func:`pms_search` locates stationary points numerically at any order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from scipy.optimize import brentq

from .core import Conservative, ProblemSpec, VanDerPol, expand
from .errors import InvalidFamily, NoSignChange, ToleranceNotReached
from .ring import DEFAULT_PRECISION, BigFloat, BigFloatRing, RingScalar, scalar_to_str

__all__ = [
    "PMSResult",
    "third_order_lambda_sq",
    "vdp_lambda_fit",
    "default_bracket",
    "pms_objective",
    "pms_search",
]

# third-order stationary points: lam2 = coeff * mu * A**(2N-2)
_THIRD_ORDER = {2: Fraction(3, 4), 3: Fraction(211, 312), 4: Fraction(10885, 16896)}

VDP_FIT_INTERCEPT = "0.212599"
VDP_FIT_SLOPE = "1.17166"
VDP_FIT_RANGE = (1, 10)


@dataclass
class PMSResult:
    lambda_sq_opt: BigFloat
    order_used: int
    objective: str  # "omega_sq" (conservative) or "omega" (Van der Pol)
    objective_value: BigFloat
    stationarity_residual: BigFloat
    search_trace: list = field(default_factory=list)
    sign_changes: list = field(default_factory=list)

    @property
    def lambda_opt(self) -> BigFloat:
        return self.lambda_sq_opt.sqrt() if self.lambda_sq_opt >= 0 else BigFloat(0, self.lambda_sq_opt.precision)

    def to_json(self) -> dict:
        return {
            "lambda_sq_opt": scalar_to_str(self.lambda_sq_opt),
            "order_used": self.order_used,
            "objective": self.objective,
            "objective_value": scalar_to_str(self.objective_value),
            "stationarity_residual": scalar_to_str(self.stationarity_residual),
            "sign_changes": [[float(a), float(b)] for a, b in self.sign_changes],
            "search_trace": [[float(l2), float(v)] for l2, v in self.search_trace],
        }


def third_order_lambda_sq(family, mu: RingScalar, A: RingScalar) -> RingScalar:
    """Closed-form third-order optimum of ``lam2``.

    Duffing ``3 mu A**2 / 4``, sextic ``211 A**4 mu / 312``, octic
    ``10885 A**6 mu / 16896``.  Negative ``mu`` gives a negative ``lam2``,
    which is returned as is since only ``lam2`` enters the expansion.
    """
    if not isinstance(family, Conservative) or family.N not in _THIRD_ORDER:
        raise InvalidFamily(f"no closed third-order optimum for {family!r}")
    coeff = _THIRD_ORDER[family.N]
    power = 2 * family.N - 2
    if isinstance(mu, BigFloat):
        c = BigFloat(coeff, mu.precision)
        return c * mu * A**power
    return coeff * Fraction(mu) * Fraction(A) ** power


def vdp_lambda_fit(mu, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """Linear fit ``lam = 0.212599 + 1.17166 mu`` of the order-44 optimum.

    The fit was made on ``1 <= mu <= 10``; values outside trigger a warning.
    """
    if not isinstance(mu, BigFloat):
        mu = BigFloat(Fraction(mu) if not isinstance(mu, str) else mu, precision)
    lo, hi = VDP_FIT_RANGE
    if mu < lo or mu > hi:
        warnings.warn(f"mu = {float(mu)} lies outside the fitted range [{lo}, {hi}]", stacklevel=2)
    p = mu.precision
    return BigFloat(VDP_FIT_INTERCEPT, p) + BigFloat(VDP_FIT_SLOPE, p) * mu


def _to_float_ring(spec: ProblemSpec, precision: int) -> ProblemSpec:
    def conv(v):
        if isinstance(v, BigFloat):
            if v.precision != precision:
                return BigFloat(v, precision)
            return v
        return BigFloat(Fraction(v), precision)

    changes = {"mu": conv(spec.mu), "lambda_sq": conv(spec.lambda_sq)}
    if not spec.is_vdp:
        changes["amplitude"] = conv(spec.amplitude)
    return spec.replace(**changes)


def pms_objective(template: ProblemSpec, order: int, lambda_sq: BigFloat) -> BigFloat:
    """``Omega**2`` (conservative) or ``Omega`` (Van der Pol) at ``lambda_sq``."""
    spec = template.replace(lambda_sq=lambda_sq, max_order=order)
    result = expand(spec)
    return result.omega_total() if spec.is_vdp else result.omega_sq_total()


def default_bracket(template: ProblemSpec, precision: int = DEFAULT_PRECISION):
    """``(lo, hi, seed)`` in ``lam2``.

    Conservative: ``[0.1, 10]`` times the third-order value.  Van der Pol:
    ``lam`` in ``[0.25, 4]`` times the linear fit.
    """
    if template.is_vdp:
        mu = template.mu if isinstance(template.mu, BigFloat) else BigFloat(Fraction(template.mu), precision)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = float(vdp_lambda_fit(mu))
        return (0.25 * fit) ** 2, (4 * fit) ** 2, fit**2
    mu = template.mu if isinstance(template.mu, BigFloat) else Fraction(template.mu)
    A = template.amplitude if isinstance(template.amplitude, BigFloat) else Fraction(template.amplitude)
    seed = float(third_order_lambda_sq(template.family, mu, A))
    lo, hi = sorted((0.1 * seed, 10 * seed))
    # keep 1 + lam2 positive
    lo = max(lo, -0.999)
    return lo, hi, seed


def pms_search(
    template: ProblemSpec,
    order: int,
    bracket: tuple | None = None,
    tol: float = 1e-12,
    *,
    seed: float | None = None,
    precision: int = DEFAULT_PRECISION,
    step: float = 1.01,
    max_scan: int = 2000,
) -> PMSResult:
    """Stationary point of the order-``order`` frequency as a function of ``lam2``.

    Starting at ``seed`` the derivative (centered differences in ``lam2``,
    step ``max(1e-6 |lam2|, 1e-8)``) is sampled on a geometric grid moving
    outwards in both directions; the sign change closest to the seed is then
    refined with Brent's method to relative tolerance ``tol``.

    Raises
    ------
    NoSignChange
        The derivative never changes sign inside ``bracket`` (this includes
        objectives that are flat to working precision).
    ToleranceNotReached
        The root refinement did not converge.
    """
    spec = _to_float_ring(template, precision)
    d_lo, d_hi, d_seed = default_bracket(spec, precision)
    lo, hi = (d_lo, d_hi) if bracket is None else sorted(float(b) for b in bracket)
    seed = min(max(d_seed if seed is None else seed, lo), hi)
    trace = []
    flat_floor = 2.0 ** (-precision / 2)

    def value(l2: float) -> BigFloat:
        v = pms_objective(spec, order, BigFloat(l2, precision))
        trace.append((l2, v))
        return v

    def deriv(l2: float) -> float:
        h = max(1e-6 * abs(l2), 1e-8)
        g = (value(l2 + h) - value(l2 - h)) / BigFloat(2 * h, precision)
        return 0.0 if abs(float(g)) <= flat_floor else float(g)

    def walk(direction):
        """Yield successive grid points from the seed towards one bracket end."""
        x = seed
        while True:
            if seed > 0:
                x = x * step if direction > 0 else x / step
            elif seed < 0:
                x = x / step if direction > 0 else x * step
            else:
                x = x + direction * (hi - lo) / 200
            if x >= hi:
                yield hi
                return
            if x <= lo:
                yield lo
                return
            yield x

    g_seed = deriv(seed)
    found = {}
    sides = {+1: walk(+1), -1: walk(-1)}
    last = {+1: (seed, g_seed), -1: (seed, g_seed)}
    active = {+1: True, -1: True}
    for _ in range(max_scan):
        if not any(active.values()):
            break
        for direction in (+1, -1):
            if not active[direction]:
                continue
            best = min((abs(b[0] - seed) for b in found.values()), default=math.inf)
            try:
                x = next(sides[direction])
            except StopIteration:
                active[direction] = False
                continue
            if abs(x - seed) > best:
                active[direction] = False
                continue
            gx = deriv(x)
            px, pg = last[direction]
            if pg == 0.0 and px == seed and g_seed == 0.0:
                last[direction] = (x, gx)
                continue
            if gx != 0.0 and pg != 0.0 and (gx > 0) != (pg > 0):
                found[direction] = (x, px)
                active[direction] = False
            elif gx != 0.0:
                last[direction] = (x, gx)
    if not found:
        raise NoSignChange(f"no stationary point of the order-{order} objective in [{lo}, {hi}]")
    sign_changes = sorted((min(a, b), max(a, b)) for a, b in found.values())
    a, b = min(sign_changes, key=lambda ab: min(abs(ab[0] - seed), abs(ab[1] - seed)))
    try:
        root, info = brentq(deriv, a, b, xtol=tol * max(abs(a), abs(b), 1e-300), full_output=True)
    except (RuntimeError, ValueError) as exc:
        raise ToleranceNotReached(str(exc)) from exc
    if not info.converged:
        raise ToleranceNotReached(f"Brent refinement stopped after {info.iterations} iterations")
    opt = BigFloat(root, precision)
    h = max(1e-6 * abs(root), 1e-8)
    g = (value(root + h) - value(root - h)) / BigFloat(2 * h, precision)
    return PMSResult(
        lambda_sq_opt=opt,
        order_used=order,
        objective="omega" if spec.is_vdp else "omega_sq",
        objective_value=value(root),
        stationarity_residual=abs(g),
        search_trace=sorted(trace, key=lambda t: t[0]),
        sign_changes=sign_changes,
    )
