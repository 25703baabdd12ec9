from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lplde.errors import ResonantRHS, RingMismatch
from lplde.ring import EXACT, BigFloat, BigFloatRing
from lplde.trig import TrigSeries

coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=50)


@st.composite
def series(draw, max_harmonic=6):
    cos = draw(st.dictionaries(st.integers(0, max_harmonic), coeffs, max_size=4))
    sin = draw(st.dictionaries(st.integers(1, max_harmonic), coeffs, max_size=4))
    return TrigSeries(EXACT, cos=cos, sin=sin)


taus = st.fractions(min_value=-7, max_value=7, max_denominator=100)


def close(a: BigFloat, b: BigFloat, scale=1.0):
    return float(abs(a - b)) <= 2.0**-200 * (1 + scale)


def _size(s: TrigSeries):
    return sum(abs(float(v)) for v in list(s.cos_coeffs.values()) + list(s.sin_coeffs.values()))


@given(series(), series(), taus)
def test_evaluation_is_additive(a, b, tau):
    assert close((a + b).evaluate(tau), a.evaluate(tau) + b.evaluate(tau), _size(a) + _size(b))


@given(series(), series(), taus)
def test_evaluation_is_multiplicative(a, b, tau):
    assert close(a.mul(b).evaluate(tau), a.evaluate(tau) * b.evaluate(tau), (1 + _size(a)) * (1 + _size(b)))


@given(series(), series())
def test_product_rule(a, b):
    assert a.mul(b).differentiate() == a.differentiate().mul(b) + a.mul(b.differentiate())


@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert a.mul(b) == b.mul(a)
    assert a.mul(b + c) == a.mul(b) + a.mul(c)
    assert (a + b) - b == a
    assert a.mul(b).mul(c) == a.mul(b.mul(c))


@given(series(), st.integers(0, 4))
def test_power_matches_repeated_product(a, e):
    expected = TrigSeries.constant(1)
    for _ in range(e):
        expected = expected.mul(a)
    assert a**e == expected


@given(series())
def test_second_derivative_is_derivative_twice(a):
    assert a.second_derivative() == a.differentiate().differentiate()


@given(series(), st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=20))
def test_linear_oscillator_inverse(rhs, w2):
    rhs = rhs.without_fundamental() - TrigSeries.constant(rhs.cos_coeff(0))
    y = rhs.solve_linear_oscillator(w2)
    assert (y.second_derivative() + y).scale(w2) == rhs
    assert y.cos_coeff(1) == 0 and y.sin_coeff(1) == 0


def test_linear_oscillator_constant_term():
    y = TrigSeries.constant(3).solve_linear_oscillator(Fraction(2))
    assert y == TrigSeries.constant(Fraction(3, 2))


def test_resonant_rhs_raises():
    with pytest.raises(ResonantRHS):
        TrigSeries.cosine(1).solve_linear_oscillator(1)
    with pytest.raises(ResonantRHS):
        TrigSeries.sine(1).solve_linear_oscillator(1)


def test_cube_of_cosine():
    # cos^3 = (3 cos + cos 3) / 4
    c3 = TrigSeries.cosine(1) ** 3
    assert c3 == TrigSeries(EXACT, cos={1: Fraction(3, 4), 3: Fraction(1, 4)})


def test_sine_products():
    s = TrigSeries.sine(1)
    assert s.mul(s) == TrigSeries(EXACT, cos={0: Fraction(1, 2), 2: Fraction(-1, 2)})
    assert TrigSeries.sine(2).mul(TrigSeries.cosine(1)) == TrigSeries(
        EXACT, sin={1: Fraction(1, 2), 3: Fraction(1, 2)}
    )


def test_zero_pruning_and_equality():
    a = TrigSeries(EXACT, cos={1: 1, 3: 0})
    assert a.harmonics() == {1}
    assert (a - a).is_zero()
    assert a == TrigSeries.cosine(1)


def test_mixed_rings_rejected():
    a = TrigSeries.cosine(1)
    b = TrigSeries.cosine(1, BigFloat(1), BigFloatRing(256))
    with pytest.raises(RingMismatch):
        a + b
    with pytest.raises(RingMismatch):
        TrigSeries(EXACT, cos={1: 0.5})


def test_value_at_zero():
    a = TrigSeries(EXACT, cos={0: 1, 1: Fraction(1, 2), 3: Fraction(1, 3)}, sin={2: 5})
    assert a.value_at_zero() == Fraction(11, 6)


@given(series())
def test_json_round_trip_exact(a):
    assert TrigSeries.from_json(a.to_json()) == a


def test_json_round_trip_float():
    ring = BigFloatRing(256)
    a = TrigSeries(ring, cos={1: BigFloat(1) / 3}, sin={2: BigFloat(2).sqrt()})
    assert TrigSeries.from_json(a.to_json()) == a


def test_float_ring_product_matches_exact():
    ring = BigFloatRing(256)
    a = TrigSeries(EXACT, cos={1: Fraction(1, 3), 2: 2}, sin={1: Fraction(-1, 7)})
    af = TrigSeries(ring, cos={k: BigFloat(v) for k, v in a.cos_coeffs.items()},
                    sin={k: BigFloat(v) for k, v in a.sin_coeffs.items()})
    p, pf = a.mul(a), af.mul(af)
    for k in p.harmonics():
        assert abs(float(pf.cos_coeff(k)) - float(p.cos_coeff(k))) < 1e-15
        assert abs(float(pf.sin_coeff(k)) - float(p.sin_coeff(k))) < 1e-15
