"""Invariant classes and the independent evaluation pipelines.

Four routes to the same numbers live here:

  1. ``build_hilb_class_bracket`` -- iterated Lie brackets over ordered
     compositions with 1/k! weights (the wall-crossing sum, evaluated
     mechanically through the vertex-algebra fields).  The master oracle.
  2. ``build_hilb_class`` -- the closed-form class: the q^n coefficient of

        exp[ sum_{m>0} (-1)^m (sigma2(m)/m) sum_v w_v
             [z^m]{ U_v(z) exp(sum_j m y_j z^j / j) } q^m ],

     with U_v(z) = sum_k u_{v,k} z^k, paired with insertions afterwards.
  3. ``invariant_series_pipeline`` -- the scalar extraction formula

        prod_a exp{ sum_n (-1)^n (sigma2(n)/n)
                            [z^n][ z A_a'(z) exp(sum rk*A)(z)^n ] q^n }^gamma_a,

     never materializing a state.
  4. ``invariant_series_closed`` -- Lagrange inversion plus the universal
     transformation (fourfold), or the branch-summed coefficient formula
     (surface).

Insertion constants f(0) that are nontrivial units (the K-theoretic weight
genus) are cleared by the exact change of scale z -> c*z with
c = prod f_i(0)^(rank_i), keeping every coefficient a Laurent polynomial;
no rational-function arithmetic is ever introduced.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactarith import ParamPoly
from .genera import GenusSpec
from .inversion import gessel_lagrange_sum, lagrange_invert
from .series import PowerSeries
from .transforms import bracket_sym, divisor_table, universal_u
from .va import (GeometryModel, InsertionClass, Label, PairingTables,
                 P_LABEL, UPoly, VAState, lie_bracket, pair_integrate)

TANGENT = "TANGENT"


@dataclass(frozen=True)
class InsertionSpec:
    """A multiplicative genus attached to a target class.

    ``target`` is an index into the model's insertion classes, or the string
    ``TANGENT`` for a virtual-tangent insertion, in which case the log-series
    used is log(f(z)f(-z)) on fourfolds and log(f(z)) on surfaces.
    """

    genus: GenusSpec
    target: int | str = 0

    def is_tangent(self) -> bool:
        return self.target == TANGENT


@dataclass(frozen=True)
class VirtualClass:
    """A per-n invariant class together with its provenance."""

    state: VAState
    n: int
    provenance: str  # "closed-form" | "bracket-oracle"


# -- class builders ------------------------------------------------------------


def build_nnp(model: GeometryModel, n: int, quot_sign: int = 1) -> VirtualClass:
    """The degree-2 point class: divisor-weighted on fourfolds,
    (1/n)-weighted (sign fixed by the rank-one oracle) on surfaces."""
    if n < 1:
        raise ValueError("n must be >= 1")
    table = divisor_table()
    up = UPoly.zero()
    if model.kind == "CY4":
        w = table.weighted(n)
        for lbl, c in model.weights:
            up = up + UPoly.gen(lbl, 1, c * w)
    else:
        for lbl, c in model.weights:
            up = up + UPoly.gen(lbl, 1, c * Fraction(quot_sign, n))
    return VirtualClass(VAState.pure((n, 0), up), n, "closed-form")


def _creation_extraction(model: GeometryModel, m: int, z_index: int,
                         shift: int) -> UPoly:
    """[z^z_index] of sum_v w_v U_v(z) exp(sum_j m y_j z^j / j), where the
    creation series uses z^k (shift=0, fourfold) or z^(k-1) (shift=1,
    surface)."""
    # exp part to z-order z_index
    expo = [UPoly.zero()] * (z_index + 1)
    expo[0] = UPoly.const(1)
    lin = {j: UPoly.gen(P_LABEL, j, Fraction(m, j)) for j in range(1, z_index + 1)}
    frontier = {0: UPoly.const(1)}
    j = 0
    while frontier:
        j += 1
        nxt: dict[int, UPoly] = {}
        for zp, up in frontier.items():
            for k, t in lin.items():
                if zp + k > z_index:
                    continue
                add = up * t
                nxt[zp + k] = nxt.get(zp + k, UPoly.zero()) + add
        frontier = {zp: up * Fraction(1, j) for zp, up in nxt.items()
                    if not up.is_zero()}
        for zp, up in frontier.items():
            expo[zp] = expo[zp] + up
    total = UPoly.zero()
    for lbl, w in model.weights:
        for k in range(1, z_index + shift + 1):
            zpow = k - shift
            if 0 <= zpow <= z_index:
                total = total + UPoly.gen(lbl, k, w) * expo[z_index - zpow]
    return total


def _hilb_log_term(model: GeometryModel, m: int) -> UPoly:
    table = divisor_table()
    sign = Fraction((-1) ** m)
    return _creation_extraction(model, m, m, shift=0) * (sign * table.weighted(m))


def _quot_log_term(model: GeometryModel, m: int, quot_sign: int) -> UPoly:
    N = model.pair_multiplicity
    return _creation_extraction(model, m, m * N - 1, shift=1) * \
        Fraction(quot_sign, m)


def _exp_state_series(log_terms: Sequence[UPoly], order: int) -> list[UPoly]:
    """Coefficients of exp(sum_m T_m q^m) in the state algebra."""
    f = PowerSeries([UPoly.zero()] + list(log_terms), order)
    return f.exp().coefficients


def build_hilb_class(model: GeometryModel, n: int,
                     parallel: bool = False) -> VirtualClass:
    """The Hilbert-scheme class at q^n from the closed exponential form."""
    if model.kind != "CY4":
        raise ValueError("Hilbert-scheme classes live on the fourfold model")
    if n < 0:
        raise ValueError("n must be >= 0")
    terms = _map_maybe_parallel(
        lambda m: _hilb_log_term(model, m), range(1, n + 1), parallel)
    coeffs = _exp_state_series(terms, n)
    return VirtualClass(VAState.pure((n, 1), coeffs[n]), n, "closed-form")


def build_quot_class_surface(model: GeometryModel, N: int, n: int,
                             quot_sign: int = 1,
                             parallel: bool = False) -> VirtualClass:
    """The surface Quot-scheme class at q^n (elliptic surfaces only)."""
    if model.kind != "Surface":
        raise ValueError("Quot classes live on the surface model")
    if N < 1 or n < 0:
        raise ValueError("need N >= 1 and n >= 0")
    if N != model.pair_multiplicity:
        model = GeometryModel.surface(
            dict(model.weights), model.classes, pair_multiplicity=N,
            intersect={(a, b): c for a, b, c in model.intersect})
    if not model.is_elliptic():
        raise ValueError("surface Quot classes require c1^2 = 0 (elliptic)")
    terms = _map_maybe_parallel(
        lambda m: _quot_log_term(model, m, quot_sign), range(1, n + 1), parallel)
    coeffs = _exp_state_series(terms, n)
    return VirtualClass(VAState.pure((n, 1), coeffs[n]), n, "closed-form")


DEFAULT_BRACKET_BOUND = 6


def _compositions(n: int):
    """All ordered compositions of n into positive parts."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def build_hilb_class_bracket(model: GeometryModel, n: int,
                             bound: int = DEFAULT_BRACKET_BOUND,
                             quot_sign: int = 1) -> VirtualClass:
    """The same class through the wall-crossing bracket sum (the oracle).

    Sums 1/k! [N_{n_1}, [N_{n_2}, [... [N_{n_k}, e^{(0,1)}] ...]]] over all
    ordered compositions, each bracket evaluated from the raw fields.
    Also serves the surface model, where the pair multiplicity enters the
    tables.
    """
    if n > bound:
        raise ValueError(f"bracket oracle bound exceeded: n={n} > {bound}")
    tables = PairingTables.untwisted(model)
    total = VAState.zero()
    if n == 0:
        return VirtualClass(VAState.pure((0, 1), 1), 0, "bracket-oracle")
    for comp in _compositions(n):
        k = len(comp)
        cur = VAState.pure((0, 1), 1)
        for ni in reversed(comp):
            cur = lie_bracket(build_nnp(model, ni, quot_sign).state, cur, tables)
        total = total + cur.scale(Fraction(1, _fact(k)))
    return VirtualClass(total, n, "bracket-oracle")


def _fact(k: int) -> int:
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out


def _map_maybe_parallel(fn, items, parallel: bool):
    items = list(items)
    if not parallel or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(8, len(items))) as pool:
        return list(pool.map(fn, items))


# -- insertion couplings ---------------------------------------------------------


def _scaled_unit_series(genus: GenusSpec, order: int, scale: ParamPoly,
                        over_f0: ParamPoly | None) -> PowerSeries:
    """f(scale*w)/f(0) as a unit series with polynomial coefficients.

    ``over_f0`` is scale/f(0) as an exact ParamPoly (the caller guarantees
    divisibility: scale always contains f(0) to a positive power when
    f(0) != 1).  When None, f(0) must be 1 and plain scaling is used.
    """
    f = genus.series(order)
    f0 = f.constant()
    coeffs = [ParamPoly.one()]
    if over_f0 is None:
        if not f0 == 1:
            raise ValueError(
                f"genus {genus.name!r} has non-unit constant {f0.render()}; "
                "it needs a positive-rank target")
        power = ParamPoly.one()
        for k in range(1, order + 1):
            power = power * scale
            coeffs.append(f.coefficients[k] * power)
    else:
        f0pow = ParamPoly.one()
        over = ParamPoly.one()
        for k in range(1, order + 1):
            over = over * over_f0
            if k >= 2:
                f0pow = f0pow * f0
            coeffs.append(f.coefficients[k] * f0pow * over)
    return PowerSeries(coeffs, order, "w")


@dataclass
class _PreparedInsertions:
    """Per-insertion unit series and the global scale, ready for coupling."""

    model: GeometryModel
    scale: ParamPoly
    taut: list[tuple[InsertionClass, ParamPoly, PowerSeries]]
    # (class, gamma, scaled unit series g~)
    tangent: PowerSeries | None  # scaled tangent series (constant 1)


def prepare_insertions(model: GeometryModel, insertions: Sequence[InsertionSpec],
                       order: int) -> _PreparedInsertions:
    surface = model.kind == "Surface"
    # global scale c = prod f_i(0)^(rank_i)
    scale = ParamPoly.one()
    infos = []
    for spec in insertions:
        if spec.is_tangent():
            continue
        cls = model.classes[spec.target]
        f0 = spec.genus.f0()
        if surface and not f0 == 1:
            raise ValueError("surface insertions need genus constant 1")
        infos.append((spec, cls, f0))
        scale = scale * (f0 ** cls.rank if cls.rank >= 0
                         else f0.inverse_unit() ** (-cls.rank))
    taut = []
    for spec, cls, f0 in infos:
        if f0 == 1:
            g = _scaled_unit_series(spec.genus, order, scale, None)
        else:
            if cls.rank < 1:
                raise ValueError(
                    f"genus {spec.genus.name!r} with non-unit constant needs "
                    f"rank >= 1, got {cls.rank}")
            over = f0 ** (cls.rank - 1)
            for other, ocls, of0 in infos:
                if other is not spec:
                    o = of0 ** ocls.rank if ocls.rank >= 0 \
                        else of0.inverse_unit() ** (-ocls.rank)
                    over = over * o
            g = _scaled_unit_series(spec.genus, order, scale, over)
        taut.append((cls, model.gamma_of(cls), g))
    tangent = None
    for spec in insertions:
        if not spec.is_tangent():
            continue
        if tangent is not None:
            raise ValueError("at most one tangent insertion")
        if model.kind == "CY4":
            raw = bracket_sym(spec.genus.series(order))
        else:
            raw = spec.genus.series(order)
        if not raw.constant() == 1:
            raise ValueError("tangent series must have constant term 1")
        power = ParamPoly.one()
        coeffs = [ParamPoly.one()]
        for k in range(1, order + 1):
            power = power * scale
            coeffs.append(raw.coefficients[k] * power)
        tangent = PowerSeries(coeffs, order, "w")
    return _PreparedInsertions(model, scale, taut, tangent)


def insertion_couplings(prep: _PreparedInsertions, order: int
                        ) -> dict[tuple[Label, int], ParamPoly]:
    """The exponential-linear coupling coefficients a_{sigma,k}, k=1..order.

    Tautological genera couple to the middle-degree directions through their
    pairing rows and to the point direction through their ranks; tangent
    insertions couple to the point direction (fourfold) and additionally to
    the middle-degree directions weighted by N*chi(v) (surface).
    """
    model = prep.model
    surface = model.kind == "Surface"
    N = model.pair_multiplicity
    out: dict[tuple[Label, int], ParamPoly] = {}

    def add(key, val):
        if val.is_zero():
            return
        out[key] = out.get(key, ParamPoly.zero()) + val

    for cls, _gamma, g in prep.taut:
        A = g.log()
        row = cls.pairing_dict()
        for k in range(1, order + 1):
            a_k = A.coefficients[k] * _fact(k)
            if a_k.is_zero():
                continue
            for lbl in model.labels:
                lam = row.get(lbl, ParamPoly.zero())
                if surface:
                    lam = lam + ParamPoly.const(model.chi_v(lbl)) * cls.rank
                if not lam.is_zero():
                    add((lbl, k), lam * a_k)
            add((P_LABEL, k), a_k * cls.rank)
    if prep.tangent is not None:
        A = prep.tangent.log()
        for k in range(1, order + 1):
            a_k = A.coefficients[k] * _fact(k)
            if a_k.is_zero():
                continue
            if surface:
                for lbl in model.labels:
                    cv = model.chi_v(lbl)
                    if cv:
                        add((lbl, k), a_k * (Fraction(N) * cv))
                add((P_LABEL, k), a_k * N)
            else:
                add((P_LABEL, k), a_k)
    return out


def integrate_insertions(vc: VirtualClass, model: GeometryModel,
                         insertions: Sequence[InsertionSpec]) -> ParamPoly:
    """Pair a class with insertions; returns the q^n invariant.

    The global change of scale makes the substitution values polynomial and
    simultaneously absorbs the constant factors f(0)^(n*rank), so the plain
    substitution already is the invariant.
    """
    max_level = vc.n * (model.pair_multiplicity if model.kind == "Surface"
                        else 1)
    max_level = max(max_level, 1)
    prep = prepare_insertions(model, insertions, max_level)
    couplings = insertion_couplings(prep, max_level)
    return pair_integrate(vc.state, couplings, expect_point=(vc.n, 1))


# -- scalar pipelines -------------------------------------------------------------


def pipeline_exponents(model: GeometryModel,
                       insertions: Sequence[InsertionSpec], order: int,
                       quot_sign: int = 1, parallel: bool = False
                       ) -> list[tuple[ParamPoly, PowerSeries]]:
    """Per-insertion exponent series: the invariant is
    exp( sum_alpha gamma_alpha * S_alpha(q) ); returns the (gamma, S) list.

    S_alpha is the universal series of the insertion (independent of the
    exponents), which is exactly what the dimensional transfer compares.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    surface = model.kind == "Surface"
    N = model.pair_multiplicity
    w_order = order * N if surface else order
    prep = prepare_insertions(model, insertions, w_order)
    # P~ = prod g~_j^(a_j) * tangent~
    P = PowerSeries.one(w_order, "w")
    for cls, _g, g in prep.taut:
        P = P * g.pow(cls.rank)
    if prep.tangent is not None:
        P = P * (prep.tangent.pow(N) if surface else prep.tangent)
    table = divisor_table()

    def alpha_exponent(item):
        cls, gamma, g = item
        dA = g.log().derivative()
        coeffs = [ParamPoly.zero()] * (order + 1)
        Ppow = P.pow(0)
        for n in range(1, order + 1):
            Ppow = Ppow * P
            body = dA * Ppow
            if surface:
                coeffs[n] = body.coefficients[n * N - 1] * Fraction(quot_sign, n)
            else:
                coeffs[n] = body.coefficients[n - 1] * \
                    (Fraction((-1) ** n) * table.weighted(n))
        return PowerSeries(coeffs, order)

    pieces = _map_maybe_parallel(alpha_exponent, prep.taut, parallel)
    return [(gamma, S) for (cls, gamma, g), S in zip(prep.taut, pieces)]


def invariant_series_pipeline(model: GeometryModel,
                              insertions: Sequence[InsertionSpec], order: int,
                              quot_sign: int = 1,
                              parallel: bool = False) -> PowerSeries:
    """The coefficient-extraction pipeline (route 3 in the module docs)."""
    log_total = PowerSeries.zero(order)
    for gamma, S in pipeline_exponents(model, insertions, order,
                                       quot_sign=quot_sign, parallel=parallel):
        log_total = log_total + S * gamma
    return log_total.exp()


def invariant_series_closed(model: GeometryModel,
                            insertions: Sequence[InsertionSpec], order: int,
                            quot_sign: int = 1) -> PowerSeries:
    """Closed form: Lagrange inversion + universal transformation (fourfold)
    or the branch-summed coefficient formula (surface)."""
    if order < 0:
        raise ValueError("order must be >= 0")
    surface = model.kind == "Surface"
    N = model.pair_multiplicity
    w_order = order * N if surface else order
    prep = prepare_insertions(model, insertions, w_order)
    Q = PowerSeries.one(w_order, "w")
    for cls, _g, g in prep.taut:
        Q = Q * g.pow(cls.rank)
    if prep.tangent is not None:
        Q = Q * (prep.tangent.pow(N) if surface else prep.tangent)
    log_total = PowerSeries.zero(order)
    if surface:
        for cls, gamma, g in prep.taut:
            phi = g.log()
            S = gessel_lagrange_sum(phi, Q, N, order)
            if quot_sign != 1:
                S = S * quot_sign
            log_total = log_total + S * gamma
    else:
        H = lagrange_invert(PowerSeries(Q.coefficients, order, "q"), order)
        for cls, gamma, g in prep.taut:
            gH = PowerSeries(g.coefficients, order, "q").compose(H)
            logU = universal_u(gH).log()
            log_total = log_total + logU * gamma
    return log_total.exp()


# -- persisted class cache ---------------------------------------------------------


def _state_to_jsonable(state: VAState) -> list:
    out = []
    for pt in sorted(state.parts):
        up = state.parts[pt]
        monos = []
        for mono in sorted(up.terms, key=lambda m: (sum(i for _, i in m), m)):
            monos.append([list(map(list, mono)), up.terms[mono].to_jsonable()])
        out.append([list(pt), monos])
    return out


def render_class(vc: VirtualClass) -> str:
    return json.dumps({
        "n": vc.n,
        "provenance": vc.provenance,
        "state": _state_to_jsonable(vc.state),
    }, separators=(", ", ": "), sort_keys=True)


class ClassCache:
    """Versioned on-disk cache of computed classes.

    Keys combine the model hash, kind, n and the convention tag; entries are
    the canonical JSON rendering, so cache hits are byte-comparable with
    recomputation (``verify=True`` enforces it).
    """

    VERSION = "1"

    def __init__(self, directory: str, verify: bool = False):
        self.directory = directory
        self.verify = verify
        os.makedirs(directory, exist_ok=True)

    def _path(self, model: GeometryModel, kind: str, n: int, tag: str) -> str:
        key = f"{self.VERSION}-{model.model_hash()}-{kind}-{n}-{tag}"
        name = hashlib.sha256(key.encode()).hexdigest()[:24]
        return os.path.join(self.directory, f"class-{name}.json")

    def get_or_build(self, model: GeometryModel, kind: str, n: int, tag: str,
                     builder) -> tuple[VirtualClass, str]:
        path = self._path(model, kind, n, tag)
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                cached = fh.read()
            if self.verify:
                fresh = render_class(builder())
                if fresh != cached:
                    raise RuntimeError(
                        f"cache divergence for {path}: stored bytes differ "
                        "from recomputation")
            return self._parse(cached), cached
        vc = builder()
        blob = render_class(vc)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(blob)
        return vc, blob

    @staticmethod
    def _parse(blob: str) -> VirtualClass:
        data = json.loads(blob)
        state = VAState.zero()
        for pt, monos in data["state"]:
            up = UPoly.zero()
            for mono, payload in monos:
                up = up + UPoly({tuple((l, i) for l, i in mono):
                                 ParamPoly.from_jsonable(payload)})
            state = state + VAState.pure(tuple(pt), up)
        return VirtualClass(state, data["n"], data["provenance"])
