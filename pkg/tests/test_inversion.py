import random
from fractions import Fraction

import pytest

from dt4series.exactarith import ParamPoly
from dt4series.inversion import (fixed_point_residual, gessel_lagrange_sum,
                                 lagrange_invert)
from dt4series.series import PowerSeries


def series(coeffs, order=None):
    return PowerSeries([ParamPoly.const(c) for c in coeffs], order)


def test_trivial_inversion():
    H = lagrange_invert(PowerSeries.one(6), 6)
    assert H == PowerSeries.gen(6)


def test_catalan_inversion():
    Q = series([1, 2, 1], 8)  # (1+t)^2
    H = lagrange_invert(Q, 8)
    got = [c.as_scalar() for c in H.coefficients]
    assert got[:6] == [0, 1, 2, 5, 14, 42]


def test_alternating_catalan():
    # q = H(1+H): Q = 1/(1+t)
    order = 6
    Q = series([1, 1], order).inverse()
    H = lagrange_invert(Q, order)
    got = [c.as_scalar() for c in H.coefficients[:5]]
    assert got == [0, 1, -1, 2, -5]


def test_requires_invertible_constant():
    with pytest.raises(ValueError):
        lagrange_invert(PowerSeries.gen(4), 4)


def test_residual_is_zero_randomized():
    rng = random.Random(31)
    for _ in range(8):
        order = rng.randint(4, 10)
        Q = series([1] + [rng.randint(-3, 3) for _ in range(order)], order)
        H = lagrange_invert(Q, order)
        assert fixed_point_residual(H, Q).is_zero()


def test_gessel_matches_lagrange_at_n_one():
    Q = series([1, 2, 1], 8)
    phi = PowerSeries.gen(8)
    got = gessel_lagrange_sum(phi, Q, 1, 8)
    assert got == lagrange_invert(Q, 8)


def test_gessel_two_roots_of_square():
    # phi = t^2, Q = 1: roots +-sqrt(x); the branch sum is 2x
    phi = series([0, 0, 1], 4)
    got = gessel_lagrange_sum(phi, PowerSeries.one(8), 2, 4)
    assert got.render_coefficients() == ["0", "2", "0", "0", "0"]


def test_gessel_log_composition():
    # phi = log(1+t), Q = 1/(1+t): branch value log(1+H(q))
    order = 8
    Q = series([1, 1], order).inverse()
    H = lagrange_invert(Q, order)
    one_plus = PowerSeries([ParamPoly.const(c) for c in [1, 1]], order)
    phi = one_plus.log()
    got = gessel_lagrange_sum(phi, Q, 1, order)
    expect = (PowerSeries.one(order) + H).log()
    assert got == expect


def test_gessel_equals_composition_randomized():
    rng = random.Random(41)
    for _ in range(6):
        order = rng.randint(4, 8)
        Q = series([1] + [rng.randint(-2, 2) for _ in range(order)], order)
        phi = series([0] + [rng.randint(-3, 3) for _ in range(order)], order)
        H = lagrange_invert(Q, order)
        assert gessel_lagrange_sum(phi, Q, 1, order) == phi.compose(H)


def test_gessel_preconditions():
    with pytest.raises(ValueError):
        gessel_lagrange_sum(series([1, 1], 3), PowerSeries.one(3), 1, 3)
    with pytest.raises(ValueError):
        gessel_lagrange_sum(PowerSeries.gen(3), PowerSeries.gen(3), 1, 3)
    with pytest.raises(ValueError):
        gessel_lagrange_sum(PowerSeries.gen(3), PowerSeries.one(3), 0, 3)


def test_classical_lagrange_coefficient_formula():
    # [x^n] phi(H) = (1/n) [t^(n-1)] (phi' Q^n), checked via the N=1 sum
    rng = random.Random(53)
    order = 10
    Q = series([1, 1, -1, 2] + [0] * (order - 3), order)
    phi = series([0, 3, 0, -1] + [0] * (order - 3), order)
    H = lagrange_invert(Q, order)
    lhs = phi.compose(H)
    Qpow = PowerSeries.one(order * 1)
    phid = phi.derivative()
    for n in range(1, order + 1):
        Qpow = Qpow * Q if n > 1 else Q
        val = (phid * Qpow).coefficients[n - 1] * Fraction(1, n)
        assert lhs.coefficients[n] == val
