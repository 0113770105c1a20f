"""The acceptance suite as a registry of named checks.

Each check returns a report dict with ``ok``, parameters, and on failure the
first divergence (smallest n with the two disagreeing coefficients).  The
command-line ``verify`` subcommand and the test suite both run these, so CI
is a loop over the registry ids.  All comparisons are exact (tolerance
zero); orders are the ones the criteria state, overridable downward for
quick runs.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .exactarith import ParamPoly
from .genera import (catalan_closed_form, chern, det_genus, fuss_catalan,
                     macmahon, nekrasov, segre, sqrt_todd)
from .inversion import lagrange_invert
from .series import PowerSeries
from .transforms import universal_u, universal_u_inverse
from .wallcross import (ClassCache, InsertionSpec, TANGENT, build_hilb_class,
                        build_hilb_class_bracket, integrate_insertions,
                        invariant_series_closed, invariant_series_pipeline,
                        render_class)
from .invariants import (_cy4_model, _surface_model, cao_kool_series,
                         check_segre_verlinde, classical_limit_check,
                         correspondence_4d2d, d_k_coefficients,
                         nekrasov_prediction, nekrasov_series,
                         resolve_conventions, verlinde_series)

CHECKS: dict[str, Callable[..., dict]] = {}


def register(check_id: str):
    def deco(fn):
        CHECKS[check_id] = fn
        return fn
    return deco


def _ok(check_id: str, params: dict) -> dict:
    return {"id": check_id, "status": "pass", "params": params}


def _fail(check_id: str, params: dict, detail) -> dict:
    return {"id": check_id, "status": "fail", "params": params,
            "detail": detail}


def _divergence_detail(context: str, div) -> dict:
    n, a, b = div
    return {"context": context, "n": n,
            "left": a.render() if isinstance(a, ParamPoly) else str(a),
            "right": b.render() if isinstance(b, ParamPoly) else str(b)}


def _series_equal(check_id, params, a: PowerSeries, b: PowerSeries,
                  context: str):
    div = a.first_divergence(b)
    if div is None:
        return None
    return _fail(check_id, params, _divergence_detail(context, div))


# -- criterion 1: four-path agreement ------------------------------------------


def _four_path(check_id: str, insertion_builder, ranks, order: int,
               bracket_order: int) -> dict:
    bracket_order = min(bracket_order, order)
    params = {"ranks": list(ranks), "order": order,
              "bracket_order": bracket_order}
    # the classes depend on the weight table only, not on the insertion
    # ranks, so they are shared across the rank sweep
    base_model = _cy4_model([1], ["g"])
    closed_classes = [build_hilb_class(base_model, n)
                      for n in range(order + 1)]
    bracket_classes = [build_hilb_class_bracket(base_model, n,
                                                bound=bracket_order)
                       for n in range(bracket_order + 1)]
    for rank in ranks:
        model = _cy4_model([rank], ["g"])
        ins = insertion_builder(model)
        pipeline = invariant_series_pipeline(model, ins, order)
        closed = invariant_series_closed(model, ins, order)
        fail = _series_equal(check_id, params, pipeline, closed,
                             f"rank {rank}: pipeline vs Lagrange+U")
        if fail:
            return fail
        for n in range(0, order + 1):
            val = integrate_insertions(closed_classes[n], model, ins)
            if not val == pipeline.coefficients[n]:
                return _fail(check_id, params, _divergence_detail(
                    f"rank {rank}: class-substitution vs pipeline",
                    (n, val, pipeline.coefficients[n])))
        for n in range(0, bracket_order + 1):
            val = integrate_insertions(bracket_classes[n], model, ins)
            if not val == pipeline.coefficients[n]:
                return _fail(check_id, params, _divergence_detail(
                    f"rank {rank}: bracket-oracle vs pipeline",
                    (n, val, pipeline.coefficients[n])))
    return _ok(check_id, params)


@register("fourpath_chern")
def fourpath_chern(order: int = 12, bracket_order: int = 6) -> dict:
    return _four_path("fourpath_chern",
                      lambda m: [InsertionSpec(chern("t"), 0)],
                      [1], order, bracket_order)


@register("fourpath_segre")
def fourpath_segre(order: int = 12, bracket_order: int = 6) -> dict:
    return _four_path("fourpath_segre",
                      lambda m: [InsertionSpec(segre(None), 0)],
                      [-2, -1, 0, 1, 2, 3], order, bracket_order)


@register("fourpath_det")
def fourpath_det(order: int = 12, bracket_order: int = 6) -> dict:
    return _four_path("fourpath_det",
                      lambda m: [InsertionSpec(det_genus(), 0)],
                      [-2, -1, 0, 1, 2, 3], order, bracket_order)


@register("fourpath_nekrasov")
def fourpath_nekrasov(order: int = 12, bracket_order: int = 6) -> dict:
    return _four_path("fourpath_nekrasov",
                      lambda m: [InsertionSpec(sqrt_todd(), TANGENT),
                                 InsertionSpec(nekrasov("s"), 0)],
                      [1], order, bracket_order)


# -- criterion 2: Cao-Kool ----------------------------------------------------------


@register("cao_kool")
def cao_kool(order: int = 12, dk_order: int = 10) -> dict:
    dk_order = min(dk_order, order)
    params = {"order": order, "dk_order": dk_order}
    model = _cy4_model([1], ["g"])
    pipeline = invariant_series_pipeline(
        model, [InsertionSpec(chern(None), 0)], order)
    target = cao_kool_series("g", order)
    fail = _series_equal("cao_kool", params, pipeline, target,
                         "pipeline vs M(-q)^gamma")
    if fail:
        return fail
    for n in range(1, dk_order + 1):
        dk = d_k_coefficients(n)
        coeff = target.coefficients[n]
        for k in range(1, n + 1):
            got = coeff.coefficient_of("g", k).as_scalar()
            want = dk.get(k, Fraction(0))
            if got != want:
                return _fail("cao_kool", params, {
                    "context": "d_k(n) composition-sum oracle",
                    "n": n, "k": k, "left": str(got), "right": str(want)})
    return _ok("cao_kool", params)


# -- criterion 3: Segre-Verlinde -----------------------------------------------------


@register("segre_verlinde")
def segre_verlinde(order: int = 10) -> dict:
    params = {"order": order, "ranks": [-2, -1, 0, 1, 2, 3]}
    for rank in params["ranks"]:
        rep = check_segre_verlinde(rank, "g", order)
        if not rep["ok"]:
            return _fail("segre_verlinde", params,
                         {"rank": rank, **rep.get("first_divergence", {})})
    return _ok("segre_verlinde", params)


# -- criterion 4: Nekrasov ------------------------------------------------------------


@register("nekrasov")
def nekrasov_check(order: int = 8) -> dict:
    params = {"order": order}
    tags = resolve_conventions()
    K = nekrasov_series([1], ["g"], order)
    pred = nekrasov_prediction("g", order)
    fail = _series_equal("nekrasov", params, K, pred,
                         f"pipeline vs Exp-form (internal sign "
                         f"{tags.nekrasov_exp_internal:+d})")
    if fail:
        return fail
    # integrality over Z[s^(+-1)] at even gamma
    K2 = nekrasov_series([1], [2], order)
    for n, c in enumerate(K2.coefficients):
        if not c.is_integral():
            return _fail("nekrasov", params, {
                "context": "integrality at gamma = 2", "n": n,
                "coefficient": c.render()})
    # decoupling: no s^0 part in log K, and K = K_+ * K_- with one-sided
    # s-support
    logK = K.log()
    plus_coeffs, minus_coeffs = [ParamPoly.zero()], [ParamPoly.zero()]
    for n in range(1, order + 1):
        c = logK.coefficients[n]
        if not c.coefficient_of("s", 0).is_zero():
            return _fail("nekrasov", params, {
                "context": "decoupling: s^0 term present in log K", "n": n,
                "coefficient": c.render()})
        plus = ParamPoly.zero()
        minus = ParamPoly.zero()
        for expo, coeff in c.terms.items():
            named = dict(zip((s.name for s in c.symbols), expo))
            part = ParamPoly({expo: coeff}, c.symbols)
            if named.get("s", 0) > 0:
                plus = plus + part
            else:
                minus = minus + part
        plus_coeffs.append(plus)
        minus_coeffs.append(minus)
    Kplus = PowerSeries(plus_coeffs, order).exp()
    Kminus = PowerSeries(minus_coeffs, order).exp()
    fail = _series_equal("nekrasov", params, Kplus * Kminus, K,
                         "decoupling product")
    if fail:
        return fail
    return _ok("nekrasov", {**params,
                            "tags": resolve_conventions().as_dict()})


# -- criterion 5: classical limit --------------------------------------------------


@register("classical_limit")
def classical_limit(order: int = 4) -> dict:
    rep = classical_limit_check(order)
    if rep["ok"]:
        return _ok("classical_limit", {"order": order})
    return _fail("classical_limit", {"order": order}, rep["diffs"])


# -- criterion 6: vanishing ----------------------------------------------------------


@register("vanishing")
def vanishing(order: int = 12, class_order: int = 6) -> dict:
    params = {"order": order, "class_order": class_order}
    model = _cy4_model([1], ["g"])
    for name, genus in (("sqrt_todd", sqrt_todd()), ("chern", chern("t"))):
        ins = [InsertionSpec(genus, TANGENT)]
        got = invariant_series_pipeline(model, ins, order)
        fail = _series_equal("vanishing", params, got,
                             PowerSeries.one(order),
                             f"tangent-only pipeline ({name})")
        if fail:
            return fail
        for n in range(1, class_order + 1):
            vc = build_hilb_class(model, n)
            val = integrate_insertions(vc, model, ins)
            if not val.is_zero():
                return _fail("vanishing", params, {
                    "context": f"class-path tangent-only ({name})", "n": n,
                    "value": val.render()})
    return _ok("vanishing", params)


# -- criterion 7: Fuss-Catalan / Lagrange ---------------------------------------------


@register("fuss_catalan")
def fuss_catalan_check(order: int = 12) -> dict:
    params = {"order": order, "a_range": [0, 1, 2, 3]}
    for a in params["a_range"]:
        Q = PowerSeries([1, 1] + [0] * (order - 1), order).pow(-a)
        y = lagrange_invert(Q, order)
        lhs = (PowerSeries.one(order) + y).inverse()
        rhs = fuss_catalan(a + 1, order).map_coefficients(
            lambda n, c: c * ((-1) ** n))
        fail = _series_equal("fuss_catalan", params, lhs, rhs,
                             f"1/(1+y) vs B_(a+1)(-q) at a={a}")
        if fail:
            return fail
    b2neg = fuss_catalan(2, order).map_coefficients(
        lambda n, c: c * ((-1) ** n))
    fail = _series_equal("fuss_catalan", params, b2neg.inverse(),
                         catalan_closed_form(order),
                         "B_2(-q)^(-1) vs (1+sqrt(1+4q))/2")
    if fail:
        return fail
    return _ok("fuss_catalan", params)


# -- criterion 8: universal transformation -------------------------------------------


@register("u_transform")
def u_transform(order: int = 15, samples: int = 50, seed: int = 2024) -> dict:
    params = {"order": order, "samples": samples, "seed": seed}
    rng = random.Random(seed)
    for i in range(samples):
        coeffs = [ParamPoly.one()] + [
            ParamPoly.const(rng.randint(-9, 9)) for _ in range(order)]
        f = PowerSeries(coeffs, order)
        uf = universal_u(f)
        if not all(c.is_integral() for c in uf.coefficients):
            return _fail("u_transform", params, {
                "context": "integrality", "sample": i,
                "coefficients": uf.render_coefficients()})
        if not universal_u_inverse(uf) == f:
            return _fail("u_transform", params,
                         {"context": "bijectivity", "sample": i})
    # log-linearity
    g = ParamPoly.var("g")
    f1 = PowerSeries([1, 2, -1, 3] + [0] * (order - 3), order)
    f2 = PowerSeries([1, -1, 4, 0, 2] + [0] * (order - 4), order)
    if not universal_u(f1 * f2) == universal_u(f1) * universal_u(f2):
        return _fail("u_transform", params, {"context": "multiplicativity"})
    if not universal_u(f1.pow(g)) == universal_u(f1).pow(g):
        return _fail("u_transform", params, {"context": "log-linearity in exponents"})
    m_order = min(order, 12)
    geo = PowerSeries([1] * (m_order + 1), m_order)
    fail = _series_equal("u_transform", params, universal_u(geo),
                         macmahon(m_order, negate_q=True),
                         "U(1/(1-q)) vs M(-q)")
    if fail:
        return fail
    return _ok("u_transform", params)


# -- criterion 9: surface side ---------------------------------------------------------


@register("surface_quot")
def surface_quot(order: int = 10, closed_order: int = 8,
                 transfer_order: int = 8) -> dict:
    params = {"order": order, "closed_order": closed_order,
              "transfer_order": transfer_order}
    tags = resolve_conventions()
    g = ParamPoly.var("g")
    # (a) N=1 chern diagonal
    model = _surface_model([1], ["g"], N=1)
    pipe = invariant_series_pipeline(model, [InsertionSpec(chern("t"), 0)],
                                     order, quot_sign=tags.quot_sign)
    base = PowerSeries([ParamPoly.one()] * (order + 1), order).pow(g)
    t = ParamPoly.var("t")
    diagonal = PowerSeries([c * t ** n for n, c in
                            enumerate(base.coefficients)], order)
    fail = _series_equal("surface_quot", params, pipe, diagonal,
                         "N=1 chern vs (1/(1-qt))^gamma")
    if fail:
        return fail
    # (b) closed (branch-sum) vs pipeline for N in {1,2,3}, ranks 0..2
    for N in (1, 2, 3):
        for rank in (0, 1, 2):
            m = _surface_model([rank], ["g"], N=N)
            ins = [InsertionSpec(chern(None), 0)]
            p = invariant_series_pipeline(m, ins, closed_order,
                                          quot_sign=tags.quot_sign)
            c = invariant_series_closed(m, ins, closed_order,
                                        quot_sign=tags.quot_sign)
            fail = _series_equal("surface_quot", params, p, c,
                                 f"N={N} rank={rank} closed vs pipeline")
            if fail:
                return fail
    # (c) dimensional transfer
    for label, kwargs in (
            ("chern rank 1", {"genus_specs": [(chern("t"), 1)]}),
            ("chern+tangent", {"genus_specs": [(chern("t"), 1)],
                               "tangent": chern(None)}),
            ("det chi_vir", {"genus_specs": [(det_genus(), 0)],
                             "chi_vir": True})):
        rep = correspondence_4d2d(order=transfer_order, **kwargs)
        if not rep["ok"]:
            return _fail("surface_quot", params,
                         {"context": f"4d-2d transfer ({label})",
                          **rep.get("first_divergence", {})})
    return _ok("surface_quot", params)


# -- criterion 10: determinism and cache -------------------------------------------------


@register("determinism")
def determinism(order: int = 6) -> dict:
    params = {"order": order}
    model = _cy4_model([1], ["g"])
    ins = [InsertionSpec(chern("t"), 0)]
    serial = invariant_series_pipeline(model, ins, order, parallel=False)
    threaded = invariant_series_pipeline(model, ins, order, parallel=True)
    if serial.to_json() != threaded.to_json():
        return _fail("determinism", params,
                     {"context": "pipeline parallel vs serial bytes"})
    a = render_class(build_hilb_class(model, order, parallel=False))
    b = render_class(build_hilb_class(model, order, parallel=True))
    if a != b:
        return _fail("determinism", params,
                     {"context": "class build parallel vs serial bytes"})
    return _ok("determinism", params)


@register("cache_roundtrip")
def cache_roundtrip(order: int = 8, directory: str | None = None) -> dict:
    import tempfile
    params = {"order": order}
    model = _cy4_model([1], ["g"])
    with tempfile.TemporaryDirectory() as tmp:
        cache = ClassCache(directory or tmp, verify=False)
        for n in range(0, order + 1):
            fresh = build_hilb_class(model, n)
            _, blob1 = cache.get_or_build(model, "hilb", n, "v1",
                                          lambda n=n: build_hilb_class(model, n))
            cached, blob2 = cache.get_or_build(
                model, "hilb", n, "v1", lambda n=n: build_hilb_class(model, n))
            if blob1 != blob2:
                return _fail("cache_roundtrip", params,
                             {"context": "byte stability", "n": n})
            if not cached.state == fresh.state:
                return _fail("cache_roundtrip", params,
                             {"context": "state equality after reload", "n": n})
        verifying = ClassCache(directory or tmp, verify=True)
        _, _ = verifying.get_or_build(model, "hilb", order, "v1",
                                      lambda: build_hilb_class(model, order))
    return _ok("cache_roundtrip", params)


def run_check(check_id: str, **kwargs) -> dict:
    if check_id not in CHECKS:
        raise KeyError(f"unknown check {check_id!r}; have {sorted(CHECKS)}")
    return CHECKS[check_id](**kwargs)


def all_check_ids() -> list[str]:
    return list(CHECKS)
