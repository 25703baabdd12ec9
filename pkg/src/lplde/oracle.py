"""Numerical reference solutions.

* :func:`exact_period_conservative` integrates the period of a conservative
  oscillator by quadrature in multiple precision.
* :func:`rk_period_conservative` and :func:`vdp_limit_cycle` find periods
  from Runge-Kutta trajectories (double precision) by locating returns to the
  section ``v = 0, x > 0``.
* :func:`fourier_from_trajectory` extracts Fourier coefficients of one
  period by the trapezoid rule on a uniform resampling, which is spectrally
  accurate for smooth periodic data.
* :func:`error_metric` and :func:`energy_defect` are the diagnostics used to
  judge approximate solutions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath
import numpy as np
from scipy.optimize import brentq

from .core import Conservative, ExpansionResult
from .errors import (
    DivisionByZero,
    InsufficientSpan,
    InvalidFamily,
    NoConvergence,
    NoCrossing,
    NonOscillatory,
    QuadratureFailure,
)
from .ode import ConservativeRHS, DormandPrince, Trajectory, VanDerPolRHS, integrate_ivp
from .ring import DEFAULT_PRECISION, BigFloat, precision_context, scalar_to_str

__all__ = [
    "OracleResult",
    "exact_period_conservative",
    "rk_period_conservative",
    "vdp_limit_cycle",
    "fourier_from_trajectory",
    "error_metric",
    "period_error",
    "energy_defect",
    "potential",
]

RK_TOL = 1e-15
FOURIER_SAMPLES = 1024


@dataclass
class OracleResult:
    """Reference solution of one periodic orbit.

    Attributes
    ----------
    period : BigFloat
    omega_sq_exact : BigFloat
        ``(2 pi / period)**2``.
    fourier_cos, fourier_sin : list of BigFloat
        Coefficients of ``cos((2n+1) w t)`` and ``sin((2n+1) w t)`` for
        ``n = 0, 1, ...``; even harmonics vanish by symmetry for both
        families.  Empty when not requested.
    trajectory : ndarray
        Rows ``(t, x, v)`` sampled uniformly over one period, or ``None``.
    estimated_error : BigFloat
        Error estimate of ``period`` (absolute).
    amplitude : BigFloat
        Maximum of ``x`` on the orbit.
    """

    period: BigFloat
    omega_sq_exact: BigFloat
    fourier_cos: list = field(default_factory=list)
    fourier_sin: list = field(default_factory=list)
    trajectory: np.ndarray | None = None
    estimated_error: BigFloat | None = None
    amplitude: BigFloat | None = None

    @property
    def omega(self) -> BigFloat:
        return self.omega_sq_exact.sqrt()

    def to_json(self) -> dict:
        return {
            "period": scalar_to_str(self.period),
            "omega_sq_exact": scalar_to_str(self.omega_sq_exact),
            "fourier_cos": [scalar_to_str(c) for c in self.fourier_cos],
            "fourier_sin": [scalar_to_str(c) for c in self.fourier_sin],
            "estimated_error": None if self.estimated_error is None else scalar_to_str(self.estimated_error),
            "amplitude": None if self.amplitude is None else scalar_to_str(self.amplitude),
        }

    def write_fourier_json(self, path):
        with open(path, "w") as fh:
            json.dump({"fourier_cos": self.to_json()["fourier_cos"],
                       "fourier_sin": self.to_json()["fourier_sin"]}, fh, indent=1)

    def write_trajectory_csv(self, path):
        if self.trajectory is None:
            raise InsufficientSpan("no trajectory samples stored")
        with open(path, "w") as fh:
            fh.write("t,x,v\n")
            for t, x, v in self.trajectory:
                fh.write(f"{float(t)!r},{float(x)!r},{float(v)!r}\n")


def _big(value, precision: int) -> BigFloat:
    if isinstance(value, BigFloat):
        return BigFloat(value, precision)
    if isinstance(value, float):
        return BigFloat(value, precision)
    return BigFloat(Fraction(value), precision)


def _from_mpf(x, precision: int) -> BigFloat:
    man, exp = x.man_exp
    with precision_context(precision):
        raw = gmpy2.mpfr(int(man)) * gmpy2.exp2(int(exp))
    return BigFloat._from_raw(raw, precision)


def _omega_sq(period: BigFloat) -> BigFloat:
    p = period.precision
    with precision_context(p):
        raw = (2 * gmpy2.const_pi() / period.value) ** 2
    return BigFloat._from_raw(raw, p)


def _float_list(values, precision):
    return [BigFloat(float(v), precision) for v in values]


def potential(N: int, mu, x):
    """``V(x) = x**2/2 + mu x**(2N) / (2N)`` in the ring of the arguments."""
    return x * x / 2 + mu * x ** (2 * N) / (2 * N) if not isinstance(x, BigFloat) else (
        x * x / BigFloat(2, x.precision) + mu * x ** (2 * N) / BigFloat(2 * N, x.precision)
    )


def exact_period_conservative(
    N: int,
    mu,
    A,
    precision: int = DEFAULT_PRECISION,
    n_fourier: int = 0,
    rtol: float = RK_TOL,
) -> OracleResult:
    """Period of ``x'' + x + mu x**(2N-1) = 0`` at amplitude ``A`` by quadrature.

    With ``x = A sin(theta)`` the period integral becomes

        T = 4 int_0^{pi/2} dtheta / sqrt(1 + (mu/N) sum_j A**(2N-2-2j) x**(2j))

    whose integrand is smooth on the closed interval.  Tanh-sinh quadrature
    is run at ``precision`` bits.

    Parameters
    ----------
    N : int
        Exponent of the potential, ``N >= 2``.
    mu, A : Fraction, int, float or BigFloat
    precision : int
    n_fourier : int, default=0
        If positive, also integrate one period with the Runge-Kutta solver and
        return the first ``n_fourier`` odd-harmonic cosine coefficients.

    Raises
    ------
    NonOscillatory
        ``1 + mu A**(2N-2) <= 0``: the orbit reaches or passes a maximum of V.
    QuadratureFailure
        The estimated relative error exceeds ``1e-20`` (``2**(-precision/2)``
        at lower precision).
    """
    if N < 2:
        raise InvalidFamily(f"N must be at least 2, got {N}")
    mu_b, A_b = _big(mu, precision), _big(A, precision)
    if A_b <= 0:
        raise NonOscillatory("amplitude must be positive")
    if 1 + mu_b * A_b ** (2 * N - 2) <= 0:
        raise NonOscillatory(f"amplitude {A_b} is not inside the well for mu = {mu_b}")
    target = max(1e-20, 2.0 ** (-precision / 2))
    with mpmath.workprec(precision + 20):
        m, a = mu_b.to_mpmath(), A_b.to_mpmath()
        powers = [a ** (2 * N - 2 - 2 * j) for j in range(N)]

        def integrand(theta):
            x2 = (a * mpmath.sin(theta)) ** 2
            s = mpmath.fsum(p * x2**j for j, p in enumerate(powers))
            return 1 / mpmath.sqrt(1 + m * s / N)

        nodes = [0, mpmath.pi / 4, mpmath.pi / 2]
        value, err = mpmath.quad(integrand, nodes, error=True, maxdegree=10)
        period = 4 * value
        err = 4 * err
    if not err <= target * period:
        raise QuadratureFailure(f"period quadrature error {float(err):.3e} above target")
    T = _from_mpf(period, precision)
    result = OracleResult(
        period=T,
        omega_sq_exact=_omega_sq(T),
        estimated_error=_from_mpf(err, precision),
        amplitude=A_b,
    )
    if n_fourier > 0:
        Tf = float(T)
        rhs = ConservativeRHS(N, float(mu_b))
        traj = integrate_ivp(rhs, [float(A_b), 0.0], Tf, rtol=rtol, atol=rtol)
        cos, sin = fourier_from_trajectory(traj, Tf, 2 * n_fourier)
        result.fourier_cos = _float_list(cos[1::2], precision)
        result.fourier_sin = _float_list(sin[1::2], precision)
        result.trajectory = _samples(traj, 0.0, Tf)
    return result


def _samples(traj: Trajectory, t0: float, period: float, n: int = FOURIER_SAMPLES) -> np.ndarray:
    times = t0 + period * np.arange(n + 1) / n
    states = traj(times)
    return np.column_stack([times - t0, states[0], states[1]])


class _SectionSolver:
    """Steps a solver and reports polished crossings of ``v = 0`` with ``x > 0``."""

    def __init__(self, rhs, y0, rtol):
        self.solver = DormandPrince(rhs, 0.0, y0, rtol=rtol, atol=rtol)
        self.traj = Trajectory(0.0, y0)

    def next_crossing(self, max_steps=10_000_000):
        s = self.solver
        for _ in range(max_steps):
            v_old = s.y[1]
            s.step()
            self.traj.append(s)
            if v_old > 0 >= s.y[1] and s.y[0] > 0:
                if s.y[1] == 0:
                    tc = s.t
                else:
                    tc = brentq(lambda t: s.dense(t)[1], s.t_old, s.t, xtol=1e-15)
                return tc, float(s.dense(tc)[0])
        raise NoCrossing("no return to the section")

    def restart_trajectory(self):
        """Keep only the last step, where the latest crossing lies."""
        s = self.solver
        traj = Trajectory(s.t_old, s.y_old)
        traj.append(s)
        self.traj = traj


def rk_period_conservative(N: int, mu, A, rtol: float = RK_TOL) -> float:
    """Period from the first return of a Runge-Kutta trajectory to ``x = A``.

    An independent check on :func:`exact_period_conservative`.
    """
    mu_f, A_f = float(mu), float(A)
    if A_f <= 0 or 1 + mu_f * A_f ** (2 * N - 2) <= 0:
        raise NonOscillatory(f"amplitude {A_f} is not inside the well for mu = {mu_f}")
    section = _SectionSolver(ConservativeRHS(N, mu_f), [A_f, 0.0], rtol)
    tc, _ = section.next_crossing()
    return tc


def vdp_limit_cycle(
    mu,
    tol: float = 1e-12,
    *,
    n_fourier: int = 0,
    rtol: float = RK_TOL,
    max_returns: int = 200,
    precision: int = DEFAULT_PRECISION,
    phase: str = "section",
) -> OracleResult:
    """Limit cycle of ``x'' + x = mu (1 - x**2) x'``.

    Integrates from ``(2, 0)`` and records returns to ``v = 0, x > 0``.  Once
    two successive returns agree in ``x`` within ``tol`` the period is the
    time between them.

    Parameters
    ----------
    mu : positive number
    tol : float
        Settling tolerance on the section coordinate.
    n_fourier : int
        Number of odd-harmonic coefficient pairs to extract.
    phase : {"section", "fundamental"}
        Time origin of the Fourier coefficients.  ``"section"`` puts it on the
        return (maximum of ``x``); ``"fundamental"`` shifts it so that the
        first harmonic is a pure positive cosine, which is the phase of the
        series solution.

    Raises
    ------
    NoConvergence
        ``max_returns`` returns without settling.
    """
    mu_f = float(mu)
    if not mu_f > 0:
        raise InvalidFamily("the Van der Pol limit cycle needs mu > 0")
    if phase not in ("section", "fundamental"):
        raise ValueError(f"unknown phase {phase!r}")
    section = _SectionSolver(VanDerPolRHS(mu_f), [2.0, 0.0], rtol)
    prev = None
    periods = []
    for _ in range(max_returns):
        tc, xc = section.next_crossing()
        if prev is not None:
            periods.append(tc - prev[0])
            if abs(xc - prev[1]) < tol:
                break
            section.restart_trajectory()
        else:
            section.restart_trajectory()
        prev = (tc, xc)
    else:
        raise NoConvergence(f"no settling to {tol} within {max_returns} returns")
    t_start, T = prev[0], periods[-1]
    traj = section.traj
    err = abs(periods[-1] - periods[-2]) if len(periods) > 1 else abs(T) * rtol
    err = max(err, 10 * rtol * T)
    result = OracleResult(
        period=_big(T, precision),
        omega_sq_exact=_omega_sq(_big(T, precision)),
        estimated_error=_big(err, precision),
        amplitude=_big(xc, precision),
    )
    origin = t_start
    if n_fourier > 0:
        harmonics = 2 * n_fourier
        cos, sin = fourier_from_trajectory(traj, T, harmonics, t0=t_start)
        if phase == "fundamental":
            shift = math.atan2(sin[1], cos[1]) / (2 * math.pi) * T
            cos, sin = fourier_from_trajectory(traj, T, harmonics, t0=t_start, shift=shift)
            origin = t_start + shift
        result.fourier_cos = _float_list(cos[1::2], precision)
        result.fourier_sin = _float_list(sin[1::2], precision)
    times = (np.arange(FOURIER_SAMPLES + 1) / FOURIER_SAMPLES) * T
    states = traj(t_start + np.mod(times + (origin - t_start), T))
    result.trajectory = np.column_stack([times, states[0], states[1]])
    return result


def fourier_from_trajectory(
    traj: Trajectory,
    period: float,
    n_max: int,
    t0: float | None = None,
    samples: int = FOURIER_SAMPLES,
    shift: float = 0.0,
):
    """Fourier coefficients of the first component over one period.

    ``x(t0 + shift + s) = sum_k c_k cos(k w s) + s_k sin(k w s)`` with
    ``w = 2 pi / period``.  The samples are taken inside ``[t0, t0 + period]``
    and wrapped periodically, so ``shift`` may be any real number.

    Returns
    -------
    cos, sin : ndarray
        ``c_0..c_{n_max}`` and ``s_0..s_{n_max}`` (``s_0 = 0``).

    Raises
    ------
    InsufficientSpan
        The trajectory does not cover ``[t0, t0 + period]``.
    """
    lo, hi = traj.span
    t0 = lo if t0 is None else float(t0)
    period = float(period)
    if period <= 0 or t0 < lo - 1e-12 or t0 + period > hi + 1e-9 * max(1.0, abs(hi)):
        raise InsufficientSpan(f"trajectory [{lo}, {hi}] does not cover one period from {t0}")
    if samples < 2 * n_max + 2:
        samples = 2 * n_max + 2
    s = period * np.arange(samples) / samples
    times = t0 + np.mod(s + shift, period)
    times = np.minimum(times, hi)
    x = traj(times)[0]
    spectrum = np.fft.rfft(x) / samples
    cos = 2 * spectrum.real[: n_max + 1]
    sin = -2 * spectrum.imag[: n_max + 1]
    cos[0] /= 2
    sin[0] = 0.0
    return cos, sin


def error_metric(omega_sq, omega_sq_exact) -> BigFloat:
    """Relative error in percent, ``|w2 - w2_exact| / w2_exact * 100``."""
    return _percent(omega_sq, omega_sq_exact)


def period_error(T_approx, T_exact) -> BigFloat:
    """Period analog of :func:`error_metric`."""
    return _percent(T_approx, T_exact)


def _percent(value, reference) -> BigFloat:
    p = next((v.precision for v in (reference, value) if isinstance(v, BigFloat)), DEFAULT_PRECISION)
    a, b = _big(value, p), _big(reference, p)
    if not b:
        raise DivisionByZero("reference value is zero")
    return abs((a - b) / b) * 100


def energy_defect(result: ExpansionResult, order: int | None = None) -> BigFloat:
    """Energy violation of a conservative series solution.

    At the first zero of ``x(tau)`` in ``(0, pi)`` the kinetic energy
    ``(1/2) Omega**2 (dx/dtau)**2`` should equal ``V(A)``; the absolute
    difference is returned.

    Raises
    ------
    NoCrossing
        ``x`` has no sign change in ``(0, pi)``.
    """
    spec = result.spec
    if not isinstance(spec.family, Conservative):
        raise InvalidFamily("energy_defect needs a conservative family")
    order = result.max_order if order is None else order
    x = result.solution(order)
    dx = x.differentiate()
    w2 = result.omega_sq_total(order)
    p = w2.precision if isinstance(w2, BigFloat) else DEFAULT_PRECISION
    w2 = _big(w2, p)
    # bracket the first zero on a float grid, then Newton in big floats
    grid = np.linspace(0.0, math.pi, 257)
    values = [float(x.evaluate(BigFloat(t, p), p)) for t in grid]
    root = None
    for i in range(len(grid) - 1):
        if values[i] == 0.0 and i > 0:
            root = grid[i]
            break
        if values[i] > 0 > values[i + 1] or values[i] < 0 < values[i + 1]:
            root = brentq(lambda t: float(x.evaluate(BigFloat(t, p), p)), grid[i], grid[i + 1], xtol=1e-15)
            break
    if root is None:
        raise NoCrossing("approximate solution has no zero in (0, pi)")
    tau = BigFloat(root, p)
    for _ in range(64):
        fx, fdx = x.evaluate(tau, p), dx.evaluate(tau, p)
        if not fdx:
            break
        step = fx / fdx
        tau = tau - step
        if abs(step) <= tau.ulp() * 4:
            break
    v = dx.evaluate(tau, p)
    N = spec.family.N
    mu, A = _big(spec.mu, p), _big(spec.amplitude, p)
    kinetic = w2 * v * v / 2
    return abs(kinetic - potential(N, mu, A))
