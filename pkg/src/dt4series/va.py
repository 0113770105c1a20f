"""Explicit super-lattice vertex algebra on the point lattice.

States are finite linear combinations  e^((n,d)) (x) prod u_{sigma,i}  with
``ParamPoly`` coefficients, where the lattice point (n, d) records n copies
of the point class and d pair-units, and the symbol labels sigma are

    "O"   -- the structure-sheaf direction (u_{O,i}),
    "p"   -- the point direction (u_{p,i}, written y_i),
    "*"   -- the pair-unit direction (u_{*,i}, written b_i),
    v     -- middle-degree labels from the geometry model.

The generating fields act through creation series, zero modes and
annihilation derivations whose structure constants come from a
``PairingTables`` object (fourfold or surface, optionally twisted by a line
bundle row).  Annihilation exponentials terminate nilpotently on the finite
target monomial; creation exponentials are expanded exactly to the z-power
needed by the residue extraction, so every bracket is a finite exact
computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .exactarith import ParamPoly, ScalarLike

Label = str
Mono = tuple[tuple[Label, int], ...]  # sorted ((label, level), ...) with repeats
Point = tuple[int, int]               # (n, d) on the point lattice

O_LABEL = "O"
P_LABEL = "p"
STAR_LABEL = "*"


def _sort_mono(factors: Iterable[tuple[Label, int]]) -> Mono:
    return tuple(sorted(factors))


class UPoly:
    """Polynomial in the u_{sigma,i} over ``ParamPoly``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, ParamPoly | ScalarLike] | None = None):
        clean: dict[Mono, ParamPoly] = {}
        if terms:
            for mono, c in terms.items():
                if not isinstance(c, ParamPoly):
                    c = ParamPoly.const(c)
                if c.is_zero():
                    continue
                mono = _sort_mono(mono)
                prev = clean.get(mono)
                tot = c if prev is None else prev + c
                if tot.is_zero():
                    clean.pop(mono, None)
                else:
                    clean[mono] = tot
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> UPoly:
        return UPoly()

    @staticmethod
    def const(c: ParamPoly | ScalarLike) -> UPoly:
        return UPoly({(): c})

    @staticmethod
    def gen(label: Label, level: int, coeff: ParamPoly | ScalarLike = 1) -> UPoly:
        if level < 1:
            raise ValueError("level must be >= 1")
        return UPoly({((label, level),): coeff})

    # -- ring ops -----------------------------------------------------------

    def __add__(self, other) -> UPoly:
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = UPoly.const(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        out = dict(self.terms)
        for mono, c in other.terms.items():
            prev = out.get(mono)
            tot = c if prev is None else prev + c
            if tot.is_zero():
                out.pop(mono, None)
            else:
                out[mono] = tot
        res = UPoly()
        res.terms = out
        return res

    __radd__ = __add__

    def __neg__(self) -> UPoly:
        res = UPoly()
        res.terms = {m: -c for m, c in self.terms.items()}
        return res

    def __sub__(self, other) -> UPoly:
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = UPoly.const(other)
        return self + (-other)

    def __mul__(self, other) -> UPoly:
        if isinstance(other, (int, Fraction, ParamPoly)):
            res = UPoly()
            res.terms = {m: cc for m, c in self.terms.items()
                         if not (cc := c * other).is_zero()}
            return res
        if not isinstance(other, UPoly):
            return NotImplemented
        out: dict[Mono, ParamPoly] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _sort_mono(m1 + m2)
                c = c1 * c2
                prev = out.get(m)
                tot = c if prev is None else prev + c
                if tot.is_zero():
                    out.pop(m, None)
                else:
                    out[m] = tot
        res = UPoly()
        res.terms = out
        return res

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = UPoly.const(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("UPoly is not hashable")

    # -- calculus -----------------------------------------------------------

    def diff(self, label: Label, level: int) -> UPoly:
        """d/du_{label,level}."""
        out: dict[Mono, ParamPoly] = {}
        key = (label, level)
        for mono, c in self.terms.items():
            mult = mono.count(key)
            if mult == 0:
                continue
            reduced = list(mono)
            reduced.remove(key)
            m = tuple(reduced)
            add = c * mult
            prev = out.get(m)
            tot = add if prev is None else prev + add
            if not tot.is_zero():
                out[m] = tot
            elif m in out:
                del out[m]
        res = UPoly()
        res.terms = out
        return res

    def levels_present(self) -> set[tuple[Label, int]]:
        out: set[tuple[Label, int]] = set()
        for mono in self.terms:
            out.update(mono)
        return out

    def substitute(self, values: Mapping[tuple[Label, int], ParamPoly]) -> ParamPoly:
        """Evaluate with u_{sigma,k} |-> values[(sigma,k)] (missing keys: 0)."""
        total = ParamPoly.zero()
        for mono, c in self.terms.items():
            factor = c
            dead = False
            for key in mono:
                v = values.get(key)
                if v is None or (isinstance(v, ParamPoly) and v.is_zero()):
                    dead = True
                    break
                factor = factor * v
            if not dead:
                total = total + factor
        return total

    def total_level(self, mono: Mono) -> int:
        return sum(i for _, i in mono)

    def is_level_homogeneous(self, n: int) -> bool:
        return all(self.total_level(m) == n for m in self.terms)

    def render(self) -> str:
        if not self.terms:
            return "0"

        def mono_key(mono: Mono):
            return (self.total_level(mono), mono)

        parts = []
        for mono in sorted(self.terms, key=mono_key):
            c = self.terms[mono]
            factors = []
            seen: dict[tuple[Label, int], int] = {}
            for key in mono:
                seen[key] = seen.get(key, 0) + 1
            for (lbl, lvl), mult in sorted(seen.items()):
                base = f"u[{lbl},{lvl}]"
                factors.append(base if mult == 1 else f"{base}^{mult}")
            body = "*".join(factors) if factors else "1"
            parts.append(f"({c.render()})*{body}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"UPoly({self.render()})"


class VAState:
    """Finite linear combination of lattice-graded monomials."""

    __slots__ = ("parts",)

    def __init__(self, parts: Mapping[Point, UPoly] | None = None):
        clean: dict[Point, UPoly] = {}
        if parts:
            for pt, up in parts.items():
                if not up.is_zero():
                    clean[(int(pt[0]), int(pt[1]))] = up
        self.parts = clean

    @staticmethod
    def zero() -> VAState:
        return VAState()

    @staticmethod
    def pure(pt: Point, up: UPoly | ParamPoly | ScalarLike) -> VAState:
        if not isinstance(up, UPoly):
            up = UPoly.const(up)
        return VAState({pt: up})

    @staticmethod
    def vacuum() -> VAState:
        return VAState.pure((0, 0), 1)

    def __add__(self, other: VAState) -> VAState:
        out = dict(self.parts)
        for pt, up in other.parts.items():
            tot = out.get(pt, UPoly.zero()) + up
            if tot.is_zero():
                out.pop(pt, None)
            else:
                out[pt] = tot
        return VAState(out)

    def __neg__(self) -> VAState:
        return VAState({pt: -up for pt, up in self.parts.items()})

    def __sub__(self, other: VAState) -> VAState:
        return self + (-other)

    def scale(self, c: ParamPoly | ScalarLike) -> VAState:
        return VAState({pt: up * c for pt, up in self.parts.items()})

    def is_zero(self) -> bool:
        return not self.parts

    def __eq__(self, other) -> bool:
        if not isinstance(other, VAState):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("VAState is not hashable")

    def single_point(self) -> tuple[Point, UPoly]:
        if len(self.parts) != 1:
            raise ValueError(f"state supported on {len(self.parts)} lattice points")
        return next(iter(self.parts.items()))

    def render(self) -> str:
        if not self.parts:
            return "0"
        chunks = []
        for pt in sorted(self.parts):
            chunks.append(f"e^({pt[0]},{pt[1]}) (x) {self.parts[pt].render()}")
        return "  +  ".join(chunks)

    def __repr__(self) -> str:
        return f"VAState({self.render()})"


# -- geometry models -----------------------------------------------------------


@dataclass(frozen=True)
class InsertionClass:
    """A K-theory class the model can integrate against: a rank and the
    pairing row chi(alpha^dual, v_j) over the model's labels."""

    rank: int
    pairing: tuple[tuple[Label, ParamPoly], ...]

    @staticmethod
    def make(rank: int, pairing: Mapping[Label, ParamPoly | ScalarLike]) -> InsertionClass:
        row = tuple(sorted(
            (lbl, v if isinstance(v, ParamPoly) else ParamPoly.const(v))
            for lbl, v in pairing.items()))
        return InsertionClass(rank, row)

    def pairing_dict(self) -> dict[Label, ParamPoly]:
        return dict(self.pairing)


@dataclass(frozen=True)
class GeometryModel:
    """Finite symbolic descriptor of the geometry.

    kind "CY4": ``weights`` are the c3-coordinates over the middle-degree
    labels, ``eulerO`` is chi(O); insertion classes pair through rows
    chi(alpha^dual, v).  kind "Surface": ``weights`` are c1-coordinates,
    ``pair_multiplicity`` is the number N of framing copies, ``intersect``
    the intersection numbers of the labels (fiber-type labels of an elliptic
    surface give zero rows).
    """

    kind: str
    labels: tuple[Label, ...]
    weights: tuple[tuple[Label, ParamPoly], ...]
    classes: tuple[InsertionClass, ...] = ()
    euler_o: int = 2
    pair_multiplicity: int = 1
    intersect: tuple[tuple[Label, Label, Fraction], ...] = ()

    def __post_init__(self):
        if self.kind not in ("CY4", "Surface"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be distinct")
        reserved = {O_LABEL, P_LABEL, STAR_LABEL}
        if reserved & set(self.labels):
            raise ValueError(f"labels may not use the reserved names {reserved}")
        wl = {lbl for lbl, _ in self.weights}
        if not wl <= set(self.labels):
            raise ValueError("weight table keys must be labels")
        for cls in self.classes:
            if not {lbl for lbl, _ in cls.pairing} <= set(self.labels):
                raise ValueError("insertion-class pairing keys must be labels")

    @staticmethod
    def cy4(labels: Mapping[Label, ParamPoly | ScalarLike],
            classes: Iterable[InsertionClass] = (),
            euler_o: int = 2) -> GeometryModel:
        w = tuple(sorted((lbl, v if isinstance(v, ParamPoly) else ParamPoly.const(v))
                         for lbl, v in labels.items()))
        return GeometryModel("CY4", tuple(sorted(labels)), w, tuple(classes),
                             euler_o=euler_o)

    @staticmethod
    def surface(labels: Mapping[Label, ParamPoly | ScalarLike],
                classes: Iterable[InsertionClass] = (),
                pair_multiplicity: int = 1,
                intersect: Mapping[tuple[Label, Label], ScalarLike] | None = None,
                ) -> GeometryModel:
        w = tuple(sorted((lbl, v if isinstance(v, ParamPoly) else ParamPoly.const(v))
                         for lbl, v in labels.items()))
        inter = tuple(sorted(
            (a, b, Fraction(c)) for (a, b), c in (intersect or {}).items()))
        return GeometryModel("Surface", tuple(sorted(labels)), w, tuple(classes),
                             pair_multiplicity=pair_multiplicity, intersect=inter)

    def weight_dict(self) -> dict[Label, ParamPoly]:
        return dict(self.weights)

    def intersection(self, a: Label, b: Label) -> Fraction:
        for x, y, c in self.intersect:
            if (x, y) == (a, b) or (x, y) == (b, a):
                return c
        return Fraction(0)

    def chi_v(self, v: Label) -> Fraction:
        """chi(v) = (1/2) sum_w c1_w <v,w> (surface only; zero when the
        labels span fiber-type directions)."""
        total = Fraction(0)
        for w, c1w in self.weights:
            c1 = c1w.as_scalar() if c1w.is_constant() else None
            if c1 is None:
                raise ValueError("surface chi_v needs numeric c1 weights")
            total += Fraction(1, 2) * c1 * self.intersection(v, w)
        return total

    def is_elliptic(self) -> bool:
        """c1(S)^2 == 0 in the label span."""
        total = Fraction(0)
        wd = self.weight_dict()
        for v, cv in wd.items():
            for w, cw in wd.items():
                if not (cv.is_constant() and cw.is_constant()):
                    return True  # symbolic weights: treated as elliptic by intent
                total += cv.as_scalar() * cw.as_scalar() * self.intersection(v, w)
        return total == 0

    def gamma_of(self, cls: InsertionClass) -> ParamPoly:
        """Derived exponent gamma = sum_v chi(alpha^dual, v) * weight_v."""
        w = self.weight_dict()
        total = ParamPoly.zero()
        for lbl, lam in cls.pairing:
            total = total + lam * w.get(lbl, ParamPoly.zero())
        return total

    def model_hash(self) -> str:
        import hashlib
        blob = repr((self.kind, self.labels,
                     tuple((l, v.render()) for l, v in self.weights),
                     tuple((c.rank, tuple((l, v.render()) for l, v in c.pairing))
                           for c in self.classes),
                     self.euler_o, self.pair_multiplicity,
                     tuple((a, b, str(c)) for a, b, c in self.intersect)))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def generic_cy4_model(gamma_symbol: str = "g", rank: int = 1,
                      extra_ranks: Iterable[int] = ()) -> GeometryModel:
    """One middle-degree label with weight 1 and a symbolic pairing row, so
    the derived exponent is the free symbol ``gamma_symbol``."""
    g = ParamPoly.var(gamma_symbol)
    classes = [InsertionClass.make(rank, {"v1": g})]
    for r in extra_ranks:
        classes.append(InsertionClass.make(r, {"v1": g}))
    return GeometryModel.cy4({"v1": 1}, classes)


def generic_surface_model(gamma_symbol: str = "g", rank: int = 1,
                          pair_multiplicity: int = 1) -> GeometryModel:
    """Elliptic-surface analogue: one fiber-type label (self-intersection 0)
    carrying c1, with a symbolic pairing row."""
    g = ParamPoly.var(gamma_symbol)
    return GeometryModel.surface(
        {"f": 1}, [InsertionClass.make(rank, {"f": g})],
        pair_multiplicity=pair_multiplicity, intersect={("f", "f"): 0})


# -- pairing tables --------------------------------------------------------------


@dataclass(frozen=True)
class PairingTables:
    """Structure constants chi-tilde and signs epsilon for one algebra.

    ``twist`` is None for the plain vertex algebra or a mapping
    label -> chi(L . v) row for the line-bundle twisted algebra (the point
    and structure-sheaf entries are fixed by geometry: chi(L.p) = 1).
    """

    model: GeometryModel
    twist: tuple[tuple[Label, ParamPoly], ...] | None = None

    @staticmethod
    def untwisted(model: GeometryModel) -> PairingTables:
        return PairingTables(model, None)

    @staticmethod
    def l_twisted(model: GeometryModel,
                  row: Mapping[Label, ParamPoly | ScalarLike]) -> PairingTables:
        r = tuple(sorted((lbl, v if isinstance(v, ParamPoly) else ParamPoly.const(v))
                         for lbl, v in row.items()))
        return PairingTables(model, r)

    # underlying geometry pairings on generator labels ----------------------

    def _chiK(self, a: Label, b: Label) -> ParamPoly:
        m = self.model
        if m.kind == "CY4":
            if a == O_LABEL and b == O_LABEL:
                return ParamPoly.const(m.euler_o)
            if {a, b} == {O_LABEL, P_LABEL}:
                return ParamPoly.one()
            return ParamPoly.zero()
        # Surface, non-symmetrized Euler form
        if a == O_LABEL and b == O_LABEL:
            return ParamPoly.const(m.euler_o)
        if {a, b} == {O_LABEL, P_LABEL}:
            return ParamPoly.one()
        if a == O_LABEL and b in m.labels:
            return ParamPoly.const(m.chi_v(b))
        if b == O_LABEL and a in m.labels:
            return ParamPoly.const(-m.chi_v(a))
        if a in m.labels and b in m.labels:
            return ParamPoly.const(-m.intersection(a, b))
        return ParamPoly.zero()

    def _chiK_sym(self, a: Label, b: Label) -> ParamPoly:
        return self._chiK(a, b) + self._chiK(b, a)

    def _chilin(self, a: Label) -> ParamPoly:
        m = self.model
        if a == O_LABEL:
            return ParamPoly.const(m.euler_o)
        if a == P_LABEL:
            return ParamPoly.one()
        if m.kind == "Surface" and a in m.labels:
            return ParamPoly.const(m.chi_v(a))
        return ParamPoly.zero()

    def _chiL(self, a: Label) -> ParamPoly:
        assert self.twist is not None
        row = dict(self.twist)
        if a == P_LABEL:
            return ParamPoly.one()
        if a == O_LABEL:
            return ParamPoly.zero()  # chi(L) never reaches supported states
        base = row.get(a, ParamPoly.zero())
        if self.model.kind == "Surface":
            return base + self._chilin(a)
        return base

    def _dtw(self, a: Label) -> ParamPoly:
        """(chi - chi_L)(a) in the twisted algebra, chi(a) otherwise."""
        if self.twist is None:
            return self._chilin(a)
        return self._chilin(a) - self._chiL(a)

    # -- generator/point views -------------------------------------------------

    @staticmethod
    def _as_vec(x) -> tuple[dict[Label, int], int]:
        """A lattice point (n, d) as coefficients on (p, *)."""
        n, d = x
        return ({P_LABEL: n} if n else {}), d

    def chi_points(self, a: Point, b: Point) -> int:
        """chi-tilde on two lattice points (always an integer)."""
        (na, da), (nb, db) = a, b
        m = self.model
        if m.kind == "CY4":
            if self.twist is not None:
                # chi(np) - chi(L.np) = 0 kills the mixed terms
                return m.euler_o * da * db
            return m.euler_o * da * db - da * nb - db * na
        if self.twist is not None:
            return 0
        N = m.pair_multiplicity
        return -da * N * nb - db * N * na

    def chi_point_sigma(self, a: Point, tau: Label) -> ParamPoly:
        """chi-tilde((n,d), tau-generator): the E^- annihilation coefficient."""
        na, da = a
        m = self.model
        if tau == STAR_LABEL:
            # chi-tilde((n,d),(0,1))
            if m.kind == "CY4":
                if self.twist is None:
                    return ParamPoly.const(m.euler_o * da - na)
                return ParamPoly.const(m.euler_o * da) - self._dtw(P_LABEL) * na
            N = m.pair_multiplicity
            if self.twist is None:
                return ParamPoly.const(-N * na)
            return ParamPoly.const(-N) * self._dtw(P_LABEL) * na
        if m.kind == "CY4":
            base = self._chiK(P_LABEL, tau) * na
            return base - self._dtw(tau) * da
        N = m.pair_multiplicity
        base = (self._chiK_sym(P_LABEL, tau) if self.twist is None
                else self._chiK(P_LABEL, tau)) * na
        return base - self._dtw(tau) * (N * da)

    def chi_sigma_point(self, sigma: Label, b: Point) -> ParamPoly:
        """chi-tilde(sigma-generator, (m,e)): the zero-mode coefficient."""
        nb, db = b
        m = self.model
        if sigma == STAR_LABEL:
            if m.kind == "CY4":
                if self.twist is None:
                    return ParamPoly.const(m.euler_o * db - nb)
                return ParamPoly.const(m.euler_o * db) - self._dtw(P_LABEL) * nb
            N = m.pair_multiplicity
            if self.twist is None:
                return ParamPoly.const(-N * nb)
            return ParamPoly.const(-N) * self._dtw(P_LABEL) * nb
        if m.kind == "CY4":
            base = self._chiK(sigma, P_LABEL) * nb
            return base - self._dtw(sigma) * db
        N = m.pair_multiplicity
        base = (self._chiK_sym(sigma, P_LABEL) if self.twist is None
                else self._chiK(sigma, P_LABEL)) * nb
        return base - self._dtw(sigma) * (N * db)

    def chi_sigma_sigma(self, sigma: Label, tau: Label) -> ParamPoly:
        """chi-tilde on two generators: the phi-annihilation coupling."""
        if STAR_LABEL in (sigma, tau):
            one = sigma if tau == STAR_LABEL else tau
            other_star = (sigma == STAR_LABEL) and (tau == STAR_LABEL)
            m = self.model
            if other_star:
                if m.kind == "CY4":
                    return ParamPoly.const(m.euler_o)
                return ParamPoly.zero()
            # generator x pair-unit
            if m.kind == "CY4":
                return -self._dtw(one)
            return -self._dtw(one) * m.pair_multiplicity
        if self.model.kind == "CY4":
            return self._chiK(sigma, tau)
        if self.twist is None:
            return self._chiK_sym(sigma, tau)
        return self._chiK(sigma, tau)

    def epsilon(self, a: Point, b: Point) -> int:
        """Sign table on the point lattice (point-canonical orientations)."""
        (na, da), (nb, db) = a, b
        if self.model.kind == "CY4":
            e = db * na
            if self.twist is not None:
                e += da * nb
            return -1 if e % 2 else 1
        N = self.model.pair_multiplicity
        if self.twist is not None:
            return 1
        return -1 if (N * da * nb) % 2 else 1

    def degree(self, pt: Point, mono: Mono) -> int:
        """Homological degree: 2*sum(levels) - chi-tilde(pt, pt)."""
        return 2 * sum(i for _, i in mono) - self.chi_points(pt, pt)


# -- the operators -----------------------------------------------------------------


def translate_t(state: VAState) -> VAState:
    """The translation operator T (a derivation raising degree by 2)."""
    out = VAState.zero()
    for pt, up in state.parts.items():
        n, d = pt
        for mono, c in up.terms.items():
            # pairing part: (alpha,d)(sigma^dual) u_{sigma,1} * mono
            if n:
                out = out + VAState.pure(
                    pt, UPoly({_sort_mono(mono + ((P_LABEL, 1),)): c * n}))
            if d:
                out = out + VAState.pure(
                    pt, UPoly({_sort_mono(mono + ((STAR_LABEL, 1),)): c * d}))
            # level-raising part: sum_l i_l * (raise one factor)
            for idx, (lbl, i) in enumerate(mono):
                raised = list(mono)
                raised[idx] = (lbl, i + 1)
                out = out + VAState.pure(
                    pt, UPoly({_sort_mono(raised): c * i}))
    return out


class _ZGraded:
    """A finite Laurent polynomial in z with UPoly coefficients."""

    __slots__ = ("parts",)

    def __init__(self, parts: Mapping[int, UPoly] | None = None):
        self.parts: dict[int, UPoly] = {}
        if parts:
            for zp, up in parts.items():
                if not up.is_zero():
                    self.parts[zp] = up

    def add_into(self, zp: int, up: UPoly) -> None:
        tot = self.parts.get(zp, UPoly.zero()) + up
        if tot.is_zero():
            self.parts.pop(zp, None)
        else:
            self.parts[zp] = tot


def _apply_annihilation_exponential(target: _ZGraded, a_pt: Point,
                                    tables: PairingTables,
                                    drop: frozenset[Label]) -> _ZGraded:
    """exp( - sum_{tau,k>0} chi(a_pt, tau) d/du_{tau,k} z^(-k) ) on target."""
    result = _ZGraded(dict(target.parts))
    frontier = target
    j = 0
    while frontier.parts:
        j += 1
        nxt = _ZGraded()
        for zp, up in frontier.parts.items():
            for (tau, k) in sorted(up.levels_present()):
                if tau in drop:
                    continue
                coeff = tables.chi_point_sigma(a_pt, tau)
                if coeff.is_zero():
                    continue
                d = up.diff(tau, k)
                if d.is_zero():
                    continue
                nxt.add_into(zp - k, d * (-coeff))
        # exp series: X^j/j! accumulated incrementally
        frontier = _ZGraded({zp: up * Fraction(1, j) for zp, up in nxt.parts.items()})
        for zp, up in frontier.parts.items():
            result.add_into(zp, up)
    return result


def _apply_phi_annihilation(target: _ZGraded, sigma: Label, level: int,
                            tables: PairingTables,
                            drop: frozenset[Label]) -> _ZGraded:
    """One phi_{sigma,level} annihilation insertion:
    sum_{tau,k>0} (-1)^(level-1) binom(k+level-1, level-1) k chi(sigma,tau)
    d/du_{tau,k} z^(-k-level)."""
    out = _ZGraded()
    sgn = (-1) ** (level - 1)
    for zp, up in target.parts.items():
        for (tau, k) in sorted(up.levels_present()):
            if tau in drop:
                continue
            coeff = tables.chi_sigma_sigma(sigma, tau)
            if coeff.is_zero():
                continue
            d = up.diff(tau, k)
            if d.is_zero():
                continue
            w = coeff * (sgn * comb(k + level - 1, level - 1) * k)
            out.add_into(zp - k - level, d * w)
    return out


def _creation_product(cr_factors: list[tuple[Label, int]], a_pt: Point,
                      max_z: int, drop: frozenset[Label]) -> dict[int, UPoly]:
    """[z^0..z^max_z] of prod_j C_{sigma_j,i_j}(z) * E^+(z).

    C_{sigma,i}(z) = sum_{k>=i} binom(k-1, i-1) u_{sigma,k} z^(k-i);
    E^+(z) = exp( sum_{k>0} (n u_{p,k} + d u_{*,k}) z^k / k ).
    """
    n, d = a_pt
    # E^+ via exponential of the linear part, truncated at max_z
    lin: dict[int, UPoly] = {}
    for k in range(1, max_z + 1):
        term = UPoly.zero()
        if n:
            term = term + UPoly.gen(P_LABEL, k, Fraction(n, k))
        if d and STAR_LABEL not in drop:
            term = term + UPoly.gen(STAR_LABEL, k, Fraction(d, k))
        if not term.is_zero():
            lin[k] = term
    expo: dict[int, UPoly] = {0: UPoly.const(1)}
    frontier: dict[int, UPoly] = {0: UPoly.const(1)}
    j = 0
    while frontier:
        j += 1
        nxt: dict[int, UPoly] = {}
        for zp, up in frontier.items():
            for k, t in lin.items():
                if zp + k > max_z:
                    continue
                add = up * t
                prev = nxt.get(zp + k)
                nxt[zp + k] = add if prev is None else prev + add
        frontier = {zp: up * Fraction(1, j) for zp, up in nxt.items()
                    if not up.is_zero()}
        for zp, up in frontier.items():
            prev = expo.get(zp)
            expo[zp] = up if prev is None else prev + up
    prod = expo
    for (sigma, i) in cr_factors:
        nxt2: dict[int, UPoly] = {}
        for zp, up in prod.items():
            for k in range(i, max_z - zp + i + 1):
                zshift = k - i
                if zp + zshift > max_z:
                    continue
                u = UPoly.gen(sigma, k, comb(k - 1, i - 1))
                add = up * u
                prev = nxt2.get(zp + zshift)
                nxt2[zp + zshift] = add if prev is None else prev + add
        prod = nxt2
    return prod


def lie_bracket(a: VAState, b: VAState, tables: PairingTables,
                drop_pair_directions: bool = False) -> VAState:
    """[a, b] = [z^-1] Y(a, z) b in the chosen algebra.

    ``drop_pair_directions`` replaces the structure-sheaf and pair-unit
    creation/annihilation exponentials by 1 (the reduction valid along the
    Hilbert-scheme pipeline); with the flag off the full fields are used.
    """
    drop = frozenset({O_LABEL, STAR_LABEL}) if drop_pair_directions else frozenset()
    out = VAState.zero()
    for a_pt, a_up in a.parts.items():
        for a_mono, ca in a_up.terms.items():
            for b_pt, b_up in b.parts.items():
                for b_mono, cb in b_up.terms.items():
                    contrib = _bracket_monomials(
                        a_pt, a_mono, b_pt, b_mono, tables, drop)
                    if not contrib.is_zero():
                        out = out + contrib.scale(ca * cb)
    return out


def _bracket_monomials(a_pt: Point, a_mono: Mono, b_pt: Point, b_mono: Mono,
                       tables: PairingTables, drop: frozenset[Label]) -> VAState:
    sign = tables.epsilon(a_pt, b_pt)
    w0 = tables.chi_points(a_pt, b_pt)
    target_pt = (a_pt[0] + b_pt[0], a_pt[1] + b_pt[1])

    # Right side: E^- against the target monomial, as a z-graded UPoly.
    base = _ZGraded({0: UPoly({b_mono: ParamPoly.one()})})
    base = _apply_annihilation_exponential(base, a_pt, tables, drop)

    # Each phi factor chooses creation / zero-mode / annihilation.
    phi_factors = list(a_mono)
    out = VAState.zero()

    def recurse(idx: int, right: _ZGraded, cr: list[tuple[Label, int]]):
        nonlocal out
        if idx == len(phi_factors):
            if not right.parts:
                return
            max_need = max(-1 - w0 - zp for zp in right.parts)
            if max_need < 0:
                return
            cr_prod = _creation_product(cr, a_pt, max_need, drop)
            for zp, up in right.parts.items():
                want = -1 - w0 - zp
                left = cr_prod.get(want)
                if left is None:
                    continue
                piece = left * up
                if not piece.is_zero():
                    out = out + VAState.pure(target_pt, piece * sign)
            return
        sigma, lvl = phi_factors[idx]
        # creation
        recurse(idx + 1, right, cr + [(sigma, lvl)])
        # zero mode
        zm = tables.chi_sigma_point(sigma, b_pt)
        if not zm.is_zero():
            shifted = _ZGraded()
            w = zm * ((-1) ** (lvl - 1))
            for zp, up in right.parts.items():
                shifted.add_into(zp - lvl, up * w)
            if shifted.parts:
                recurse(idx + 1, shifted, cr)
        # annihilation
        ann = _apply_phi_annihilation(right, sigma, lvl, tables, drop)
        if ann.parts:
            recurse(idx + 1, ann, cr)

    recurse(0, base, [])
    return out


def weight0_pairing(state: VAState, single: Mapping[tuple[Label, int], ParamPoly],
                    cross: Mapping[tuple[Label, int, int], ParamPoly],
                    pure_pair: Mapping[int, ParamPoly]) -> ParamPoly:
    """Pair a state against a genuinely weight-zero insertion.

    The insertion exponent is
        sum single[(sigma,j)] mu_{sigma,j}
      + sum cross[(sigma,j,l)] beta_l mu_{sigma,j}
      + sum pure_pair[l] beta_l,
    where beta_l matches the pair-unit factors u_{*,l}.  Unlike the plain
    substitution, the quadratic beta*mu couplings are what make translation
    images integrate to zero; see the tests.
    """
    total = ParamPoly.zero()
    for pt, up in state.parts.items():
        for mono, coeff in up.terms.items():
            total = total + coeff * _w0_match(list(mono), single, cross,
                                              pure_pair)
    return total


def _w0_match(factors, single, cross, pure_pair) -> ParamPoly:
    if not factors:
        return ParamPoly.one()
    head = factors[0]
    rest = factors[1:]
    label, lvl = head
    norm = Fraction(1, _fact(lvl - 1))
    total = ParamPoly.zero()
    if label == STAR_LABEL:
        c = pure_pair.get(lvl)
        if c is not None:
            total = total + c * norm * _w0_match(rest, single, cross, pure_pair)
        for i, (lab2, lvl2) in enumerate(rest):
            if lab2 == STAR_LABEL:
                continue
            c = cross.get((lab2, lvl2, lvl))
            if c is None:
                continue
            total = total + c * (norm * Fraction(1, _fact(lvl2 - 1))) * \
                _w0_match(rest[:i] + rest[i + 1:], single, cross, pure_pair)
    else:
        c = single.get((label, lvl))
        if c is not None:
            total = total + c * norm * _w0_match(rest, single, cross, pure_pair)
        for i, (lab2, lvl2) in enumerate(rest):
            if lab2 != STAR_LABEL:
                continue
            c = cross.get((label, lvl, lvl2))
            if c is None:
                continue
            total = total + c * (norm * Fraction(1, _fact(lvl2 - 1))) * \
                _w0_match(rest[:i] + rest[i + 1:], single, cross, pure_pair)
    return total


def tautological_weight0_couplings(rank, chi_row: Mapping[Label, ParamPoly],
                                   log_coeffs: Mapping[int, ParamPoly],
                                   n: int, max_level: int):
    """Couplings of exp( sum_k g_k ch_k ) of a tautological class on the
    (n, 1) component, including the pair-unit (beta) sector.

    ``log_coeffs[k] = g_k`` are the factorial-normalized log-genus
    coefficients; ``chi_row`` the middle-degree pairing row; ``rank`` the
    class rank (the point-direction row entry).
    """
    single: dict[tuple[Label, int], ParamPoly] = {}
    cross: dict[tuple[Label, int, int], ParamPoly] = {}
    pure: dict[int, ParamPoly] = {}
    rows = dict(chi_row)
    rows[P_LABEL] = ParamPoly.const(rank) if not isinstance(rank, ParamPoly) \
        else rank
    for (sigma, row) in rows.items():
        for j in range(1, max_level + 1):
            g = log_coeffs.get(j)
            if g is not None:
                single[(sigma, j)] = row * g
            for l in range(1, max_level + 1 - j):
                g2 = log_coeffs.get(j + l)
                if g2 is not None:
                    cross[(sigma, j, l)] = row * g2 * ((-1) ** l)
    for k in range(1, max_level + 1):
        g = log_coeffs.get(k)
        if g is not None:
            # mu_{p,0} = n on the (n,1) component
            pure[k] = rows[P_LABEL] * g * (((-1) ** k) * n)
    return single, cross, pure


def pair_integrate(state: VAState,
                   couplings: Mapping[tuple[Label, int], ParamPoly],
                   expect_point: Point | None = None) -> ParamPoly:
    """Pair a one-point state against an exponential-linear insertion.

    ``couplings`` maps (sigma, k) to the coefficient a_{sigma,k}; the state
    monomials are evaluated with u_{sigma,k} |-> a_{sigma,k}/(k-1)!.
    """
    if state.is_zero():
        return ParamPoly.zero()
    pt, up = state.single_point()
    if expect_point is not None and pt != expect_point:
        raise ValueError(f"state at lattice point {pt}, expected {expect_point}")
    values: dict[tuple[Label, int], ParamPoly] = {}
    for (sigma, k), a in couplings.items():
        values[(sigma, k)] = a * Fraction(1, _fact(k - 1))
    return up.substitute(values)


def _fact(n: int) -> int:
    out = 1
    for j in range(2, n + 1):
        out *= j
    return out
