"""Adaptive Dormand-Prince 5(4) integrator with dense output.

Double precision only.  Step size selection uses the PI controller of
Hairer and Wanner (``beta = 0.04``); the continuous extension is the
fourth-order interpolant with the optimal free parameter, evaluated from the
stored stage derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSpan, StepSizeUnderflow

__all__ = [
    "ConservativeRHS",
    "VanDerPolRHS",
    "DormandPrince",
    "Trajectory",
    "integrate_ivp",
]

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# fifth minus embedded fourth order weights (seven stages, FSAL)
_E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# dense output: y(t_old + x h) = y_old + h K^T P [x, x^2, x^3, x^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class ConservativeRHS:
    """``x'' + x + mu x**(2N-1) = 0`` as a first order system in ``(x, v)``."""

    N: int
    mu: float

    def __call__(self, t, y):
        x, v = y
        return np.array([v, -x - self.mu * x ** (2 * self.N - 1)])

    def energy(self, x, v):
        return 0.5 * v * v + 0.5 * x * x + self.mu * x ** (2 * self.N) / (2 * self.N)


@dataclass(frozen=True)
class VanDerPolRHS:
    """``x'' + x = mu (1 - x**2) x'``."""

    mu: float

    def __call__(self, t, y):
        x, v = y
        return np.array([v, -x + self.mu * (1 - x * x) * v])


class DormandPrince:
    """Single-step driver.

    Parameters
    ----------
    fun : callable
        ``fun(t, y) -> ndarray``.
    t0 : float
    y0 : array_like
    rtol, atol : float
        Local error tolerances, mixed as ``atol + rtol * |y|``.
    h0 : float, optional
        First trial step.  Estimated from the derivative if omitted.
    """

    def __init__(self, fun, t0, y0, rtol=1e-12, atol=1e-12, h0=None, max_step=math.inf):
        self.fun = fun
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        self.f = np.asarray(fun(self.t, self.y), dtype=float)
        self.K = np.empty((7, self.y.size))
        self.t_old = None
        self.y_old = None
        self.h_last = None
        self._err_old = 1e-4
        if h0 is None:
            scale = atol + rtol * np.abs(self.y)
            d0 = np.linalg.norm(self.y / scale) / math.sqrt(self.y.size)
            d1 = np.linalg.norm(self.f / scale) / math.sqrt(self.y.size)
            h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
            h0 = min(h0, 1e-2)
        self.h = min(h0, max_step)
        self.n_steps = 0
        self.n_rejected = 0

    def _attempt(self, h):
        t, y, K = self.t, self.y, self.K
        K[0] = self.f
        for i in range(1, 6):
            K[i] = self.fun(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
        y_new = y + h * (_B @ K[:6])
        f_new = np.asarray(self.fun(t + h, y_new), dtype=float)
        K[6] = f_new
        scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.linalg.norm(h * (_E @ K) / scale) / math.sqrt(y.size)
        return y_new, f_new, err

    def step(self):
        """Advance by one accepted step; returns the new time."""
        h = self.h
        while True:
            if h < 1e-14 * max(1.0, abs(self.t)):
                raise StepSizeUnderflow(f"step size {h:.3e} underflow at t = {self.t}")
            y_new, f_new, err = self._attempt(h)
            if err <= 1.0:
                break
            self.n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = _SAFETY * err ** (-_ALPHA) * self._err_old**_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        self._err_old = max(err, 1e-4)
        self.t_old, self.y_old, self.h_last = self.t, self.y, h
        self.Q = self.K.T @ _P
        self.t = self.t + h
        self.y, self.f = y_new, f_new
        self.h = min(h * factor, self.max_step)
        self.n_steps += 1
        return self.t

    def dense(self, t):
        """State at ``t`` inside the last accepted step."""
        x = (np.asarray(t, dtype=float) - self.t_old) / self.h_last
        return _interpolate(self.y_old, self.h_last, self.Q, x)


def _interpolate(y_old, h, Q, x):
    x = np.asarray(x, dtype=float)
    powers = np.stack([x, x**2, x**3, x**4])
    if x.ndim:
        return y_old[:, None] + h * (Q @ powers)
    return y_old + h * (Q @ powers)


class Trajectory:
    """Piecewise dense solution collected from accepted steps.

    Attributes
    ----------
    t : ndarray
        Step boundaries.
    y : ndarray
        State at the step boundaries, shape ``(len(t), dim)``.
    """

    def __init__(self, t0, y0):
        self._t = [float(t0)]
        self._y = [np.array(y0, dtype=float)]
        self._Q = []
        self._h = []

    def append(self, solver: DormandPrince):
        self._t.append(solver.t)
        self._y.append(solver.y)
        self._Q.append(solver.Q)
        self._h.append(solver.h_last)

    @property
    def t(self) -> np.ndarray:
        return np.array(self._t)

    @property
    def y(self) -> np.ndarray:
        return np.array(self._y)

    @property
    def span(self) -> tuple:
        return self._t[0], self._t[-1]

    def __call__(self, times) -> np.ndarray:
        """Dense state at ``times``; returns shape ``(dim, len(times))``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        t0, t1 = self.span
        slack = 1e-12 * max(1.0, abs(t1))
        if times.size and (times.min() < t0 - slack or times.max() > t1 + slack):
            raise InsufficientSpan(
                f"requested [{times.min()}, {times.max()}] outside trajectory span [{t0}, {t1}]"
            )
        grid = np.array(self._t)
        idx = np.clip(np.searchsorted(grid, times, side="right") - 1, 0, len(self._Q) - 1)
        out = np.empty((self._y[0].size, times.size))
        for k in np.unique(idx):
            sel = idx == k
            x = (times[sel] - grid[k]) / self._h[k]
            out[:, sel] = _interpolate(self._y[k], self._h[k], self._Q[k], x)
        return out

    def to_csv(self, path, times=None):
        """Write ``t,x,v`` rows, at the step points unless ``times`` is given."""
        if times is None:
            times, states = self.t, self.y.T
        else:
            times = np.asarray(times, dtype=float)
            states = self(times)
        with open(path, "w") as fh:
            fh.write("t,x,v\n")
            for t, x, v in zip(times, states[0], states[1]):
                fh.write(f"{float(t)!r},{float(x)!r},{float(v)!r}\n")


def integrate_ivp(fun, y0, t_end, t0=0.0, rtol=1e-12, atol=1e-12, max_step=math.inf) -> Trajectory:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end`` (``t_end > t0``).

    Returns
    -------
    Trajectory
        Dense solution on ``[t0, t_end]``.
    """
    if not t_end > t0:
        raise InsufficientSpan("t_end must exceed t0")
    solver = DormandPrince(fun, t0, y0, rtol=rtol, atol=atol, max_step=max_step)
    traj = Trajectory(t0, y0)
    while solver.t < t_end:
        solver.h = min(solver.h, t_end - solver.t)
        if t_end - solver.t - solver.h < 1e-14 * abs(t_end):
            solver.h = t_end - solver.t
        solver.step()
        traj.append(solver)
    return traj
