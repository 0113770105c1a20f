"""Golden-file regression: named series coefficients, convention tags, and
the recorded prose-form discrepancies (never silently patched).

Regenerate with:  python3 tests/test_golden.py --regold
"""

import json
import os
import sys
from fractions import Fraction

from dt4series.exactarith import ParamPoly
from dt4series.genera import macmahon
from dt4series.series import PowerSeries
from dt4series.transforms import universal_u_inverse
from dt4series.invariants import (cao_kool_series, nekrasov_prediction,
                                  nekrasov_series, quot_surface_series,
                                  resolve_conventions, segre_closed_form,
                                  segre_series, verlinde_series, z_series,
                                  z_series_paper_form)

GOLDEN_PATH = os.path.join(os.path.dirname(__file__), "golden",
                           "invariants.json")


def _coeffs(series: PowerSeries) -> list[str]:
    return series.render_coefficients()


def build_golden() -> dict:
    tags = resolve_conventions()
    g = ParamPoly.var("g")
    doc = {
        "convention_tags": tags.as_dict(),
        "series": {
            "cao_kool": _coeffs(cao_kool_series("g", 10)),
            "nekrasov_rank1": _coeffs(nekrasov_series([1], ["g"], 6)),
            "verlinde_rank1": _coeffs(verlinde_series(1, "g", 6)),
            "verlinde_sqrt_rank1": _coeffs(verlinde_series(1, "g", 6,
                                                           sqrt=True)),
            "z_series": _coeffs(z_series("g", 8)),
            "quot_surface_N2": _coeffs(quot_surface_series(2, 1, "g", 6)),
        },
        "prose_discrepancies": {},
    }
    for a in (-2, -1, 0, 1, 2, 3):
        doc["series"][f"segre_rank{a}"] = _coeffs(
            segre_series([a], ["g"], order=8))

    # -- recorded mismatches between prose closed forms and the pipeline --
    order = 6
    geo = PowerSeries([ParamPoly.one()] * (order + 1), order)
    alt = PowerSeries([ParamPoly.const((-1) ** n) for n in range(order + 1)],
                      order)
    doc["prose_discrepancies"]["u_inverse_of_macmahon"] = {
        "normative": _coeffs(universal_u_inverse(macmahon(order,
                                                          negate_q=True))),
        "prose_print": _coeffs(alt),
        "note": "prose example prints 1/(1+q); the convention forced by the "
                "pipeline oracles gives 1/(1-q)",
        "matches_prose": universal_u_inverse(
            macmahon(order, negate_q=True)) == alt,
    }
    pipe1 = segre_series([1], ["g"], order=4)
    closed_plus = segre_closed_form(1, "g", 4)
    doc["prose_discrepancies"]["segre_exponent"] = {
        "pipeline": _coeffs(pipe1),
        "closed_form_with_resolved_sign": _coeffs(closed_plus),
        "resolved_exponent_sign": tags.segre_exponent,
        "note": "prose prints exponent -gamma for ranks >= 0; the oracle "
                "forces +gamma",
    }
    K = nekrasov_series([1], ["g"], 4)
    from dt4series.invariants import _nekrasov_plethystic, _nekrasov_u_form
    doc["prose_discrepancies"]["nekrasov_signs"] = {
        "pipeline": _coeffs(K),
        "exp_form_internal_plus": _coeffs(_nekrasov_plethystic(g, 1, 4)),
        "exp_form_internal_minus": _coeffs(_nekrasov_plethystic(g, -1, 4)),
        "u_form_exponent_minus_half": _coeffs(_nekrasov_u_form(4, g, -1)),
        "u_form_exponent_plus_half": _coeffs(_nekrasov_u_form(4, g, 1)),
        "resolved": {"internal": tags.nekrasov_exp_internal,
                     "u_exponent": tags.nekrasov_u_exponent},
        "note": "prose proof display carries a minus between the two Exp "
                "terms and a +gamma/2 exponent; the oracles force + and "
                "-gamma/2",
    }
    v = verlinde_series(0, "g", 6, sqrt=True)
    doc["prose_discrepancies"]["verlinde_mu_shape"] = {
        "pipeline": _coeffs(v),
        "macmahon_minus_q_half_gamma": _coeffs(
            macmahon(6, negate_q=True).pow(g * Fraction(1, 2))),
        "resolved_sign": tags.verlinde_mu_sign,
        "note": "prose prints M(q)^(gamma/2); the pipeline gives "
                "M(-q)^(gamma/2)",
    }
    doc["prose_discrepancies"]["z_series_weights"] = {
        "normative": _coeffs(z_series("g", 6)),
        "prose_lambert_form": _coeffs(z_series_paper_form("g", 6)),
        "first_divergence_n": z_series("g", 6).first_divergence(
            z_series_paper_form("g", 6))[0],
        "note": "prose evaluates to plain divisor counts; the pipeline and "
                "the class computation give square-weighted divisor sums",
    }
    return doc


def test_golden_file_matches_recomputation():
    with open(GOLDEN_PATH, "r", encoding="utf-8") as fh:
        stored = json.load(fh)
    fresh = build_golden()
    assert fresh == stored


if __name__ == "__main__":
    if "--regold" in sys.argv:
        os.makedirs(os.path.dirname(GOLDEN_PATH), exist_ok=True)
        with open(GOLDEN_PATH, "w", encoding="utf-8") as fh:
            json.dump(build_golden(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"regenerated {GOLDEN_PATH}")
    else:
        test_golden_file_matches_recomputation()
        print("golden file matches")
