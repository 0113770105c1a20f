from fractions import Fraction

import pytest

from dt4series.exactarith import ParamPoly
from dt4series.genera import (catalan_closed_form, chern, det_genus, det_power,
                              fuss_catalan, genus_by_name, lambda_genus,
                              lambert, log_macmahon_coefficient, macmahon,
                              nekrasov, segre, sqrt_todd, sqrt_todd_bracket,
                              todd)
from dt4series.inversion import lagrange_invert
from dt4series.series import PowerSeries
from dt4series.transforms import bracket_sym, divisor_table


def test_macmahon_small():
    m = macmahon(5)
    assert [c.as_scalar() for c in m.coefficients] == [1, 1, 3, 6, 13, 24]
    assert m.coefficient(0) == 1


def test_macmahon_log_is_divisor_weighted():
    order = 10
    lg = macmahon(order).log()
    for n in range(1, order + 1):
        assert lg.coefficients[n].as_scalar() == log_macmahon_coefficient(n)
        assert log_macmahon_coefficient(n) == \
            Fraction(divisor_table().sigma2(n), n)


def test_macmahon_negated():
    m = macmahon(4, negate_q=True)
    assert [c.as_scalar() for c in m.coefficients] == [1, -1, 3, -6, 13]


def test_fuss_catalan_families():
    assert [c.as_scalar() for c in fuss_catalan(1, 4).coefficients] == \
        [1, 1, 1, 1, 1]
    assert [c.as_scalar() for c in fuss_catalan(2, 4).coefficients] == \
        [1, 1, 2, 5, 14]
    assert [c.as_scalar() for c in fuss_catalan(3, 4).coefficients] == \
        [1, 1, 3, 12, 55]


def test_fuss_catalan_algebraic_equation():
    # with y solving y(1+y)^a = q: 1/(1+y) = B_(a+1)(-q)
    order = 12
    for a in (0, 1, 2, 3):
        Q = PowerSeries([1, 1] + [0] * (order - 1), order).pow(-a)
        y = lagrange_invert(Q, order)
        lhs = (PowerSeries.one(order) + y).inverse()
        rhs = fuss_catalan(a + 1, order).map_coefficients(
            lambda n, c: c * ((-1) ** n))
        assert lhs == rhs


def test_catalan_closed_form_identity():
    order = 12
    b2neg = fuss_catalan(2, order).map_coefficients(
        lambda n, c: c * ((-1) ** n))
    assert b2neg.inverse() == catalan_closed_form(order)


def test_lambert_series():
    lam = lambert(12)
    assert [c.as_scalar() for c in lam.coefficients[:5]] == [0, 1, 2, 2, 3]
    assert lam.coefficient(12).as_scalar() == 6
    for n in range(1, 13):
        assert lam.coefficients[n].as_scalar() == divisor_table().sigma0(n)


def test_chern_and_segre_are_inverse():
    order = 6
    c = chern("t").series(order)
    s = segre("t").series(order)
    assert c * s == PowerSeries.one(order, variable="x")


def test_todd_series_starts_correctly():
    t = todd().series(4)
    assert t.coefficients[0] == 1
    assert t.coefficients[1] == Fraction(1, 2)
    assert t.coefficients[2] == Fraction(1, 12)
    assert t.coefficients[3].is_zero()
    assert t.coefficients[4] == Fraction(-1, 720)


def test_sqrt_todd_squares_to_todd():
    order = 8
    st = sqrt_todd().series(order)
    assert st * st == todd().series(order)


def test_sqrt_todd_bracket_closed_form():
    order = 8
    assert bracket_sym(sqrt_todd().series(order)) == \
        sqrt_todd_bracket().series(order)
    sb = sqrt_todd_bracket().series(6)
    assert sb.coefficients[2] == Fraction(-1, 24)


def test_det_genus():
    d = det_genus().series(3)
    assert [c.as_scalar() for c in d.coefficients] == \
        [1, 1, Fraction(1, 2), Fraction(1, 6)]
    h = det_power(Fraction(1, 2)).series(2)
    assert h.coefficients[1] == Fraction(1, 2)


def test_nekrasov_constant_and_specialization():
    order = 6
    nk = nekrasov("s")
    f = nk.series(order)
    s = ParamPoly.var("s", laurent=True)
    assert f.constant() == s - s.inverse_unit()
    # at s = 1 the symmetrization degenerates to minus the squared
    # half-exponential difference, vanishing at x = 0
    sym = bracket_sym(f).map_params(lambda p: p.substitute({"s": 1}))
    assert sym.constant().is_zero()
    # -(e^(x/2)-e^(-x/2))^2 has x^2-coefficient -1
    assert sym.coefficients[2] == -1


def test_lambda_genus_truncates_marker():
    f = lambda_genus("yy").series(3)
    y = ParamPoly.var("yy", maxdeg=1)
    assert f.constant() == ParamPoly.one() + y
    assert (f.constant() * f.constant()) == ParamPoly.one() + y * 2


def test_genus_by_name():
    assert genus_by_name("segre:t").name == "segre(t)"
    assert genus_by_name("nekrasov:s").name == "nekrasov(s)"
    assert genus_by_name("todd").name == "todd"
    with pytest.raises(ValueError):
        genus_by_name("unknown")
