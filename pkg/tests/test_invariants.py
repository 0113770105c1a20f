from fractions import Fraction

import pytest

from dt4series.exactarith import ParamPoly, binomial_poly
from dt4series.genera import chern, det_genus, macmahon, segre
from dt4series.series import PowerSeries
from dt4series.invariants import (cao_kool_series, check_segre_verlinde,
                                  classical_limit_check, correspondence_4d2d,
                                  d_k_coefficients, nekrasov_prediction,
                                  nekrasov_series, nekrasov_u_closed_form,
                                  quot_surface_series, resolve_conventions,
                                  segre_closed_form, segre_series,
                                  series_report, verlinde_series, z_series,
                                  z_series_closed_form, z_series_paper_form)


def test_convention_tags_resolved_values():
    tags = resolve_conventions()
    assert tags.segre_exponent == 1
    assert tags.quot_sign == 1
    assert tags.nekrasov_exp_internal == 1
    assert tags.nekrasov_u_exponent == -1
    assert tags.verlinde_mu_sign == -1


def test_cao_kool_values():
    s = cao_kool_series(1, 3)
    assert [c.as_scalar() for c in s.coefficients] == [1, -1, 3, -6]
    assert cao_kool_series(0, 5) == PowerSeries.one(5)
    g = ParamPoly.var("g")
    sym = cao_kool_series("g", 2)
    assert sym.coefficients[2] == g * Fraction(5, 2) + g * g * Fraction(1, 2)


def test_d_k_oracle_matches_gamma_polynomials():
    target = cao_kool_series("g", 6)
    for n in range(1, 7):
        dk = d_k_coefficients(n)
        c = target.coefficients[n]
        for k in range(1, n + 1):
            assert c.coefficient_of("g", k).as_scalar() == \
                dk.get(k, Fraction(0))


def test_segre_rank0_is_macmahon():
    g = ParamPoly.var("g")
    assert segre_series([0], ["g"], order=8) == macmahon(8).pow(g)


def test_segre_rank1_first_coefficient():
    s = segre_series([1], ["g"], order=2)
    assert s.coefficients[1] == ParamPoly.var("g")


def test_segre_closed_form_all_ranks():
    for a in (-2, -1, 0, 1, 2, 3):
        assert segre_series([a], ["g"], order=8) == \
            segre_closed_form(a, "g", 8)


def test_segre_multi_insertion_markers():
    # two markers stay separated in the coefficients
    s = segre_series([1, 1], ["g1", "g2"], order=2, ts_one=False)
    c1 = s.coefficients[1]
    names = {sym.name for sym in c1.symbols}
    assert {"t1", "t2"} <= names


def test_nekrasov_first_coefficient_and_parity():
    K = nekrasov_series([1], ["g"], 4)
    s = ParamPoly.var("s", laurent=True)
    g = ParamPoly.var("g")
    assert K.coefficients[1] == (s + s.inverse_unit()) * g * Fraction(1, 2)
    with pytest.raises(ValueError):
        nekrasov_series([2], ["g"], 3)
    with pytest.raises(ValueError):
        nekrasov_series([1, 1], ["g1", "g2"], 3)


def test_nekrasov_closed_forms():
    K = nekrasov_series([1], ["g"], 6)
    assert K == nekrasov_prediction("g", 6)
    assert K == nekrasov_u_closed_form("g", 6)


def test_nekrasov_integrality_even_gamma():
    K = nekrasov_series([1], [2], 8)
    for c in K.coefficients:
        assert c.is_integral()


def test_nekrasov_odd_gamma_halves():
    K = nekrasov_series([1], [1], 2)
    assert K.coefficients[1] == (ParamPoly.var("s", laurent=True)
                                 + ParamPoly.var("s", laurent=True).inverse_unit()
                                 ) * Fraction(1, 2)


def test_classical_limit():
    assert classical_limit_check(4)["ok"]


def test_verlinde_first_coefficient():
    for a in (-1, 0, 2):
        v = verlinde_series(a, "g", 2)
        assert v.coefficients[1] == -ParamPoly.var("g")


def test_verlinde_square_relation():
    for a in (-1, 0, 1, 2):
        v = verlinde_series(a, "g", 8)
        h = verlinde_series(a, "g", 8, sqrt=True)
        assert v == h * h


def test_verlinde_mu_shape_is_macmahon_minus_q():
    g = ParamPoly.var("g")
    v = verlinde_series(0, "g", 8, sqrt=True)
    assert v == macmahon(8, negate_q=True).pow(g * Fraction(1, 2))


def test_segre_verlinde_correspondence():
    for a in (-2, -1, 0, 1, 2, 3):
        assert check_segre_verlinde(a, "g", 8)["ok"]


def test_z_series_matches_closed_form():
    assert z_series("g", 8) == z_series_closed_form("g", 8)


def test_z_series_paper_form_diverges_at_two():
    normative = z_series("g", 4)
    paper = z_series_paper_form("g", 4)
    div = normative.first_divergence(paper)
    assert div is not None and div[0] == 2
    # they agree at n = 1: -gamma
    assert normative.coefficients[1] == -ParamPoly.var("g")


def test_quot_surface_diagonal():
    g = ParamPoly.var("g")
    got = quot_surface_series(1, 1, "g", 6)
    want = PowerSeries([ParamPoly.one()] * 7, 6).pow(g)
    assert got == want
    # binomial structure: [q^n] = binom(g+n-1, n)
    for n in range(0, 7):
        assert got.coefficients[n] == binomial_poly(g + n - 1, n)


def test_correspondence_reports():
    rep = correspondence_4d2d([(chern("t"), 1)], order=6)
    assert rep["ok"]
    assert rep["surface_universal_series"][0][1] == "t"
    rep2 = correspondence_4d2d([(det_genus(), 0)], order=6, chi_vir=True)
    assert rep2["ok"]
    rep3 = correspondence_4d2d([(chern(None), 1)], order=5,
                               tangent=chern(None))
    assert rep3["ok"]


def test_correspondence_trivial_genus_list():
    rep = correspondence_4d2d([], order=5)
    assert rep["ok"]
    assert rep["surface_universal_series"] == []


def test_mod_q2_hand_values():
    # every named series has its n = 1 coefficient fixed by the one-point
    # class: chern -> -gamma, segre -> +gamma, verlinde -> -gamma,
    # nekrasov -> (gamma/2)(s + 1/s), quot (surface) -> +gamma
    g = ParamPoly.var("g")
    s = ParamPoly.var("s", laurent=True)
    assert cao_kool_series("g", 1).coefficients[1] == -g
    assert segre_series([1], ["g"], order=1).coefficients[1] == g
    assert verlinde_series(1, "g", 1).coefficients[1] == -g
    assert nekrasov_series([1], ["g"], 1).coefficients[1] == \
        (s + s.inverse_unit()) * g * Fraction(1, 2)
    assert quot_surface_series(1, 1, "g", 1).coefficients[1] == g


def test_series_report_shape():
    rep = series_report("cao_kool", cao_kool_series("g", 2),
                        {"gamma": "g", "order": 2})
    assert '"name": "cao_kool"' in rep
    assert '"convention_tags"' in rep
    assert '"coefficients": ["1", "-g", "1/2*g^2 + 5/2*g"]' in rep
