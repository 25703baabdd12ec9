"""Acceptance checks, one recorded PASS/FAIL line per criterion.

Run alone with ``python3 tests/test_acceptance.py`` or ``pytest -s
tests/test_acceptance.py``.  The slow checks (order 44 Van der Pol, order 50
expansions) take several minutes in total.  Known failures are marked
``xfail(strict=True)`` with the measured numbers in the reason, so they stay
visible and turn the run red if they ever start passing unnoticed.
"""

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lplde.core import DUFFING, OCTIC, SEXTIC, VAN_DER_POL, ProblemSpec, expand, extract_kappa, fit_kappa_decay
from lplde.core import fourier_coefficients, residual_check
from lplde.oracle import energy_defect, error_metric, exact_period_conservative, period_error, vdp_limit_cycle
from lplde.pms import pms_search, third_order_lambda_sq
from lplde.ring import EXACT, BigFloat
from lplde.trig import TrigSeries

TABLE_KAPPA = {
    2: F(3, 128),
    4: F(51, 131072),
    6: F(213, 16777216),
    8: F(70515, 137438953472),
    10: F(406179, 17592186044416),
    12: F(19974549, 18014398509481984),
    14: F(128255751, 2305843009213693952),
    16: F(435036452211, 151115727451828646838272),
    18: F(2950668677535, 19342813113834066795298816),
    20: F(163068192461619, 19807040628566084398385987584),
}

VDP_T_EXACT = [6.66328686, 7.62987448, 8.85909550, 10.20352369, 11.61223067,
               13.06187474, 14.53974774, 16.03817623, 17.55218414, 19.07836957]
VDP_T_APPROX = {1: 6.66328685, 2: 7.62995604, 3: 8.86085271}


def half_unit(value, digits):
    """Half a unit in the last place of ``value`` kept to ``digits`` significant digits."""
    return 0.5 * 10.0 ** (math.floor(math.log10(abs(value))) - digits + 1)


def fit_line(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1 - (resid**2).sum() / ((y - y.mean()) ** 2).sum()
    return slope, intercept, r2


def duffing_errors(mu, A, top=30):
    """Relative frequency error of orders ``0..top`` at the third-order ``lam2``."""
    mu, A = F(mu), F(A)
    result = expand(ProblemSpec(DUFFING, mu, A, third_order_lambda_sq(DUFFING, mu, A), top))
    exact = exact_period_conservative(2, mu, A).omega_sq_exact
    return [float(error_metric(result.omega_sq_total(n), exact)) for n in range(top + 1)]


def vdp_pms(mu, order):
    spec = ProblemSpec(VAN_DER_POL, BigFloat(mu), lambda_sq=BigFloat(0), max_order=order)
    res = pms_search(spec, order)
    T = float(expand(spec.replace(lambda_sq=res.lambda_sq_opt)).period())
    return float(res.lambda_opt), T


@pytest.fixture(scope="module")
def vdp_order44():
    """Order 44 PMS for mu = 1..10 as ``{mu: (lam, T_approx)}``."""
    return {mu: vdp_pms(mu, 44) for mu in range(1, 11)}


# 1 ------------------------------------------------------------------------


def test_criterion_1_table_kappa(criterion):
    rows = []
    for mu, A, l2 in ((F(4, 3), F(1), F(1)), (F(100), F(1), F(75))):
        result = expand(ProblemSpec(DUFFING, mu, A, l2, 20))
        rows.append({n: extract_kappa(result, n) for n in TABLE_KAPPA})
    ok = rows[0] == TABLE_KAPPA and rows[1] == TABLE_KAPPA
    mismatched = [n for n in TABLE_KAPPA if rows[0][n] != TABLE_KAPPA[n] or rows[1][n] != TABLE_KAPPA[n]]
    criterion(1, ok, f"kappa_2..kappa_20 exact at two (mu, A) pairs; mismatched n: {mismatched or 'none'}")


# 2 ------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_2_kappa_decay(criterion):
    result = expand(ProblemSpec(DUFFING, F(4, 3), F(1), F(1), 50))
    prefactor, rate = fit_kappa_decay([(n, extract_kappa(result, n)) for n in range(2, 51, 2)])
    ok = abs(rate / 1.46225 - 1) <= 0.05 and abs(prefactor / 0.0663 - 1) <= 0.15
    criterion(2, ok, f"rate {rate:.5f} (1.46225 +-5%), prefactor {prefactor:.5f} (0.0663 +-15%)")


# 3 ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "family,mu,A,closed",
    [
        (DUFFING, 100, 1, lambda mu, A: 75.0),
        (SEXTIC, 10, 1.2, lambda mu, A: 211 * A**4 * mu / 312),
        (OCTIC, 7, 0.9, lambda mu, A: 10885 * A**6 * mu / 16896),
    ],
    ids=["duffing", "sextic", "octic"],
)
def test_criterion_3_third_order_stationary_point(criterion, family, mu, A, closed):
    spec = ProblemSpec(family, BigFloat(mu), BigFloat(A), BigFloat(0), 3)
    found = float(pms_search(spec, 3).lambda_sq_opt)
    expected = closed(mu, A)
    ok = abs(found / expected - 1) < 5e-7
    criterion(3, ok, f"{family.name}: lam2 {found:.9g} vs closed form {expected:.9g}")


# 4 ------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_4_error_decay_positive_mu(criterion):
    orders = np.arange(4, 31)
    at_20, details, ok = [], [], True
    for mu in (10, 100, 10**4):
        errors = duffing_errors(mu, 10)
        monotone = all(errors[n + 1] <= errors[n] for n in range(4, 30))
        slope, _, r2 = fit_line(orders, np.log10([errors[n] for n in orders]))
        at_20.append(errors[20])
        ok &= monotone and r2 > 0.99
        details.append(f"mu={mu}: monotone={monotone} R2={r2:.4f} slope={slope:.3f}")
    spread = max(at_20) / min(at_20)
    ok &= spread <= 3
    criterion(4, ok, "; ".join(details) + f"; order-20 spread x{spread:.3f}")


# 5 ------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_5_error_decay_negative_mu(criterion):
    orders = np.arange(4, 31)
    slopes = []
    for A in ("0.5", "0.9", "0.99"):
        errors = duffing_errors(-1, A)
        slopes.append(fit_line(orders, np.log10([errors[n] for n in orders]))[0])
    ok = abs(slopes[0]) > abs(slopes[1]) > abs(slopes[2])
    criterion(5, ok, "slopes A=0.5, 0.9, 0.99: " + ", ".join(f"{s:.4f}" for s in slopes))


# 6 ------------------------------------------------------------------------

FOURIER_NEAR_SEPARATRIX = (
    "order 50 at A=0.99, mu=-1 with the third-order lam2 gives c_4 ratio 0.98884 (c_0..c_3 within 1%); "
    "the ratio still drifts towards 1 with order and no order-50 stationary point exists"
)


@pytest.mark.slow
@pytest.mark.parametrize(
    "mu,A",
    [
        (10**4, 10),
        pytest.param(-1, "0.99", marks=pytest.mark.xfail(strict=True, reason=FOURIER_NEAR_SEPARATRIX)),
    ],
    ids=["A10-mu1e4", "A0.99-mu-1"],
)
def test_criterion_6_fourier_fidelity(criterion, mu, A):
    mu, A = F(mu), F(A)
    result = expand(ProblemSpec(DUFFING, mu, A, third_order_lambda_sq(DUFFING, mu, A), 50))
    approx = fourier_coefficients(result)
    exact = exact_period_conservative(2, mu, A, n_fourier=5).fourier_cos
    ratios = [float(approx[n]) / float(exact[n]) for n in range(5)]
    ok = all(0.99 <= r <= 1.01 for r in ratios)
    criterion(6, ok, f"A={float(A)}, mu={float(mu):g}: ratios " + ", ".join(f"{r:.5f}" for r in ratios))


# 7 ------------------------------------------------------------------------


def test_criterion_7_limit_cycle_periods(criterion):
    worst = 0.0
    ok = True
    for mu, expected in enumerate(VDP_T_EXACT, start=1):
        T = float(vdp_limit_cycle(mu).period)
        ok &= abs(T - expected) <= half_unit(expected, 8)
        worst = max(worst, abs(T / expected - 1))
    criterion(7, ok, f"ten limit-cycle periods to 8 digits, worst relative deviation {worst:.2e}")


@pytest.mark.slow
def test_criterion_7_order44_periods(criterion, vdp_order44):
    ok = True
    parts = []
    for mu, expected in VDP_T_APPROX.items():
        T = vdp_order44[mu][1]
        ok &= abs(T - expected) <= half_unit(expected, 6)
        parts.append(f"mu={mu} T={T:.9f}")
    err10 = float(period_error(vdp_order44[10][1], VDP_T_EXACT[9]))
    ok &= abs(err10 - 12) <= 1
    criterion(7, ok, ", ".join(parts) + f", mu=10 error {err10:.3f}%")


FAST_VARIANT = (
    "order 20 is worse than order 10 at mu=2 (0.049% vs 0.014%) and mu=3 (1.49% vs 0.82%) "
    "for every stationary point; convergence in order is not monotone, order 44 does match"
)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=FAST_VARIANT)
def test_criterion_7_fast_variant(criterion):
    ok = True
    parts = []
    for mu in (1, 2, 3):
        e10 = float(period_error(vdp_pms(mu, 10)[1], VDP_T_EXACT[mu - 1]))
        e20 = float(period_error(vdp_pms(mu, 20)[1], VDP_T_EXACT[mu - 1]))
        ok &= e20 < e10
        parts.append(f"mu={mu} {e10:.4g}% -> {e20:.4g}%")
    criterion(7, ok, "order 10 -> 20 error: " + ", ".join(parts))


# 8 ------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_8_lambda_linearity(criterion, vdp_order44):
    mus = np.arange(1, 11)
    slope, intercept, r2 = fit_line(mus, np.array([vdp_order44[m][0] for m in mus]))
    ok = abs(slope / 1.17166 - 1) <= 0.10 and abs(intercept - 0.212599) <= 0.1
    criterion(8, ok, f"slope {slope:.5f} (1.17166 +-10%), intercept {intercept:.5f} (0.212599 +-0.1), R2 {r2:.6f}")


# 9 ------------------------------------------------------------------------

coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=50)


@st.composite
def series(draw):
    cos = draw(st.dictionaries(st.integers(0, 6), coeffs, max_size=4))
    sin = draw(st.dictionaries(st.integers(1, 6), coeffs, max_size=4))
    return TrigSeries(EXACT, cos=cos, sin=sin)


@given(series(), series(), st.fractions(min_value=-7, max_value=7, max_denominator=100))
def _homomorphism_and_product_rule(a, b, tau):
    product = a.mul(b)
    assert float(abs(product.evaluate(tau) - a.evaluate(tau) * b.evaluate(tau))) < 1e-50
    assert float(abs((a + b).evaluate(tau) - a.evaluate(tau) - b.evaluate(tau))) < 1e-50
    assert product.differentiate() == a.differentiate().mul(b) + a.mul(b.differentiate())


def test_criterion_9_structural_invariants(criterion):
    failures = []
    cases = [(DUFFING, F(4, 3), F(1)), (DUFFING, F(-1), F(9, 10)), (SEXTIC, F(10), F(6, 5)), (OCTIC, F(7), F(9, 10))]
    for family, mu, A in cases:
        l2 = third_order_lambda_sq(family, mu, A)
        r = expand(ProblemSpec(family, mu, A, l2, 12))
        name = f"{family.name}(mu={mu}, A={A})"
        if any(residual_check(r, n) != 0 for n in range(13)):
            failures.append(f"{name}: residual")
        # the vanishing odd alpha follow from the Duffing factorization only
        if family is DUFFING and any(r.freq_coeffs[n] != 0 for n in range(1, 13, 2)):
            failures.append(f"{name}: odd alpha")
        if any(k % 2 == 0 for xn in r.solutions for k in xn.harmonics()) or any(xn.sin_coeffs for xn in r.solutions):
            failures.append(f"{name}: harmonics")
        x = r.solution()
        if x.value_at_zero() != A or x.differentiate().value_at_zero() != 0:
            failures.append(f"{name}: initial data")
    try:
        _homomorphism_and_product_rule()
    except AssertionError as exc:
        failures.append(f"series algebra: {exc}")
    ok = not failures
    criterion(9, ok, "residuals, odd alpha (Duffing), odd harmonics, x(0)=A, x'(0)=0, series algebra: "
              + ("; ".join(failures) or "all hold"))


# 10 -----------------------------------------------------------------------

ENERGY_GRID = (
    "the order-3 signed defect changes sign near lam = 8.56, 1.2% below lam_PMS = 8.660; "
    "the 200-point grid lands at 8.617 (defect 0.0145) against 0.0248 at lam_PMS"
)


@pytest.mark.xfail(strict=True, reason=ENERGY_GRID)
def test_criterion_10_energy_near_minimal(criterion):
    template = ProblemSpec(DUFFING, BigFloat(100), BigFloat(1), BigFloat(0), 3)
    lam_pms = float(pms_search(template, 3).lambda_opt)

    def defect(lam):
        return float(energy_defect(expand(template.replace(lambda_sq=BigFloat(lam * lam)))))

    at_pms = defect(lam_pms)
    grid = np.linspace(0, 3 * lam_pms, 200)
    values = [defect(lam) for lam in grid]
    best = min(values)
    ok = at_pms <= 1.10 * best
    criterion(10, ok, f"defect at lam_PMS={lam_pms:.5f} is {at_pms:.5g}; grid minimum {best:.5g} "
              f"at lam={grid[int(np.argmin(values))]:.4f} (ratio {at_pms / best:.3f})")


if __name__ == "__main__":
    raise SystemExit(pytest.main(["-s", "-v", __file__]))
