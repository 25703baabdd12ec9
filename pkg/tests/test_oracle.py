import json
import math
from fractions import Fraction

import gmpy2
import numpy as np
import pytest

from lplde.core import DUFFING, ProblemSpec, expand
from lplde.errors import DivisionByZero, InsufficientSpan, InvalidFamily, NonOscillatory
from lplde.ode import integrate_ivp
from lplde.oracle import (
    energy_defect,
    error_metric,
    exact_period_conservative,
    fourier_from_trajectory,
    period_error,
    rk_period_conservative,
    vdp_limit_cycle,
)
from lplde.ring import BigFloat, precision_context

F = Fraction


def two_pi(precision=256):
    with precision_context(precision):
        return BigFloat._from_raw(2 * gmpy2.const_pi(), precision)


def test_harmonic_period_to_full_precision():
    r = exact_period_conservative(2, 0, 1)
    assert abs(r.period - two_pi()) <= r.period.ulp() * 8
    assert abs(float(r.omega_sq_exact) - 1) < 1e-70


def test_quadrature_error_estimate_meets_target():
    r = exact_period_conservative(2, F(10**4), F(10))
    assert float(r.estimated_error) <= 1e-20 * float(r.period)


@pytest.mark.parametrize(
    "N,mu,A",
    [(2, 10**4, 10), (2, -1, "0.5"), (2, -1, "0.99"), (2, 1, 1), (3, 100, 1), (3, -1, "0.8"), (4, 10, 2), (4, -1, "0.9")],
)
def test_quadrature_agrees_with_rk(N, mu, A):
    A = F(A)
    T = float(exact_period_conservative(N, F(mu), A).period)
    assert rk_period_conservative(N, mu, float(A)) == pytest.approx(T, rel=1e-12)


def test_period_diverges_towards_separatrix():
    periods = [exact_period_conservative(2, -1, F(a)).period for a in ("0.5", "0.9", "0.99")]
    assert periods[0] < periods[1] < periods[2]


def test_non_oscillatory():
    with pytest.raises(NonOscillatory):
        exact_period_conservative(2, -1, 1)
    with pytest.raises(NonOscillatory):
        exact_period_conservative(3, -4, 1)
    with pytest.raises(NonOscillatory):
        rk_period_conservative(2, -1, 1.2)


def test_conservative_fourier_symmetry():
    r = exact_period_conservative(2, F(100), F(1), n_fourier=20)
    assert len(r.fourier_cos) == 20
    assert all(abs(float(s)) < 1e-12 for s in r.fourier_sin)
    assert sum(float(c) for c in r.fourier_cos) == pytest.approx(1, abs=1e-10)


def test_fourier_of_pure_cosine():
    w = 1.3
    traj = integrate_ivp(lambda t, y: np.array([y[1], -w * w * y[0]]), [1.0, 0.0], 2 * math.pi / w,
                         rtol=1e-14, atol=1e-14)
    cos, sin = fourier_from_trajectory(traj, 2 * math.pi / w, 6)
    assert cos[1] == pytest.approx(1, abs=1e-12)
    assert np.max(np.abs(np.delete(cos, 1))) < 1e-12
    assert np.max(np.abs(sin)) < 1e-12


def test_even_harmonics_vanish_for_duffing():
    T = float(exact_period_conservative(2, 3, F(2)).period)
    traj = integrate_ivp(lambda t, y: np.array([y[1], -y[0] - 3 * y[0] ** 3]), [2.0, 0.0], T,
                         rtol=1e-15, atol=1e-15)
    cos, _ = fourier_from_trajectory(traj, T, 10)
    assert np.max(np.abs(cos[0::2])) < 1e-12


def test_fourier_reconstructs_trajectory():
    T = float(exact_period_conservative(2, 10, F(1)).period)
    traj = integrate_ivp(lambda t, y: np.array([y[1], -y[0] - 10 * y[0] ** 3]), [1.0, 0.0], T,
                         rtol=1e-15, atol=1e-15)
    cos, sin = fourier_from_trajectory(traj, T, 60)
    ts = np.linspace(0, T, 301)
    k = np.arange(61)[:, None]
    recon = (cos[:, None] * np.cos(2 * math.pi * k * ts / T) + sin[:, None] * np.sin(2 * math.pi * k * ts / T)).sum(0)
    assert np.max(np.abs(recon - traj(ts)[0])) < 1e-11


def test_fourier_needs_full_period():
    traj = integrate_ivp(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], 3.0)
    with pytest.raises(InsufficientSpan):
        fourier_from_trajectory(traj, 2 * math.pi, 3)


def test_vdp_weak_nonlinearity():
    r = vdp_limit_cycle(1e-4)
    assert float(r.period) == pytest.approx(2 * math.pi, rel=1e-7)
    assert float(r.amplitude) == pytest.approx(2, abs=1e-6)


@pytest.mark.parametrize("mu,T", [(1, 6.66328686), (10, 19.07836957)])
def test_vdp_periods(mu, T):
    r = vdp_limit_cycle(mu)
    assert float(r.period) == pytest.approx(T, abs=6e-9)
    assert float(r.omega_sq_exact) == pytest.approx((2 * math.pi / float(r.period)) ** 2)


def test_vdp_fourier_phase_conventions():
    section = vdp_limit_cycle(2, n_fourier=4)
    fund = vdp_limit_cycle(2, n_fourier=4, phase="fundamental")
    assert abs(float(fund.fourier_sin[0])) < 1e-12 and float(fund.fourier_cos[0]) > 0
    amp_s = math.hypot(float(section.fourier_cos[0]), float(section.fourier_sin[0]))
    assert float(fund.fourier_cos[0]) == pytest.approx(amp_s, rel=1e-12)
    # the section phase puts the maximum at t = 0
    assert section.trajectory[0, 1] == pytest.approx(float(section.amplitude))


def test_vdp_requires_positive_mu():
    with pytest.raises(InvalidFamily):
        vdp_limit_cycle(0)


def test_error_metric_examples():
    assert error_metric(F(1), F(1)) == 0
    assert float(error_metric(BigFloat("1.01"), BigFloat(1))) == pytest.approx(1.0)
    assert float(period_error(16.8128186, 19.07836957)) == pytest.approx(11.87, abs=0.01)
    with pytest.raises(DivisionByZero):
        error_metric(F(1), F(0))


def test_energy_defect_harmonic_is_zero():
    r = expand(ProblemSpec(DUFFING, BigFloat(0), BigFloat(1), BigFloat(0), 6))
    assert float(energy_defect(r)) < 1e-70


def test_energy_defect_small_at_optimum():
    tmpl = ProblemSpec(DUFFING, BigFloat(100), BigFloat(1), BigFloat(0), 3)
    at_zero = energy_defect(expand(tmpl))
    at_opt = energy_defect(expand(tmpl.replace(lambda_sq=BigFloat(75))))
    assert float(at_opt) < 0.1
    assert float(at_zero) > 1e6 * float(at_opt)


def test_energy_defect_is_exact_zero_crossing():
    # the odd-harmonic solution crosses zero at tau = pi/2
    r = expand(ProblemSpec(DUFFING, BigFloat(10), BigFloat(1), BigFloat("7.5"), 5))
    half_pi = two_pi() / 4
    assert abs(float(r.solution().evaluate(half_pi))) < 1e-70


def test_serialization(tmp_path):
    r = exact_period_conservative(2, 1, 1, n_fourier=3)
    path = tmp_path / "fourier.json"
    r.write_fourier_json(path)
    doc = json.loads(path.read_text())
    assert len(doc["fourier_cos"]) == 3 and doc["fourier_cos"][0].startswith("bf256:")
    csv_path = tmp_path / "traj.csv"
    r.write_trajectory_csv(csv_path)
    assert csv_path.read_text().startswith("t,x,v\n0.0,1.0,")
