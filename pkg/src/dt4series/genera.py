"""Catalog of multiplicative genus series and classic combinatorial series.

Each genus is a one-variable series f in a Chern-root variable ``x``.  It is
stored through its log-series A(x) = log(f(x)/f(0)) together with the
constant ``f(0)`` (a ``ParamPoly``, usually 1 but e.g. ``s - 1/s`` for the
K-theoretic weight genus), because every downstream consumer wants the
log-coefficients rather than f itself.  Tangent-type insertions use the
symmetrization {f}(x) = f(x)f(-x).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .exactarith import ParamPoly
from .series import PowerSeries
from .transforms import bracket_sym, divisor_table

X = "x"  # Chern-root variable name used by all genus series


class GenusSpec:
    """A named multiplicative genus, materializable to any order.

    ``builder(order)`` must return the raw series f(x) with an invertible
    constant term (possibly a nontrivial ``ParamPoly`` unit like ``s-1/s``,
    which downstream code clears by an exact change of scale rather than by
    division).
    """

    def __init__(self, name: str, builder, params: tuple[str, ...] = ()):
        self.name = name
        self._builder = builder
        self.params = params

    def series(self, order: int) -> PowerSeries:
        f = self._builder(order)
        if f.constant().is_zero():
            raise ValueError(f"genus {self.name!r}: constant term must be a unit")
        return f

    def f0(self, order: int = 0) -> ParamPoly:
        return self.series(0).constant()

    def __repr__(self) -> str:
        return f"GenusSpec({self.name})"


def _exp_series(order: int, scale: Fraction | ParamPoly = Fraction(1)) -> PowerSeries:
    """e^(scale*x) as a series in x."""
    coeffs = []
    fact = Fraction(1)
    power: ParamPoly | Fraction = Fraction(1)
    for n in range(order + 1):
        if n > 0:
            fact = fact * Fraction(1, n)
            power = power * scale
        coeffs.append(ParamPoly.const(1) * power * fact)
    return PowerSeries(coeffs, order, X)


def chern(t: str | None = "t") -> GenusSpec:
    """Total Chern class genus 1 + t*x (marker t optional)."""
    def build(order: int) -> PowerSeries:
        tt = ParamPoly.var(t) if t else ParamPoly.one()
        c = [ParamPoly.one()] + [ParamPoly.zero()] * order
        if order >= 1:
            c[1] = tt
        return PowerSeries(c, order, X)
    return GenusSpec(f"chern({t})" if t else "chern", build, (t,) if t else ())


def segre(t: str | None = "t") -> GenusSpec:
    """Total Segre class genus 1/(1 + t*x) = sum (-t*x)^k."""
    def build(order: int) -> PowerSeries:
        tt = ParamPoly.var(t) if t else ParamPoly.one()
        coeffs = [(-1) ** k * tt ** k for k in range(order + 1)]
        return PowerSeries(coeffs, order, X)
    return GenusSpec(f"segre({t})" if t else "segre", build, (t,) if t else ())


def todd() -> GenusSpec:
    """Todd genus x/(1 - e^(-x))."""
    def build(order: int) -> PowerSeries:
        em = _exp_series(order + 1, Fraction(-1))
        denom = PowerSeries([(-c if n > 0 else ParamPoly.zero())
                             for n, c in enumerate(em.coefficients)][1:],
                            order, X)  # (1-e^(-x))/x
        return denom.inverse()
    return GenusSpec("todd", build)


def sqrt_todd() -> GenusSpec:
    """Td^(1/2), the square-root Todd genus (unsymmetrized)."""
    def build(order: int) -> PowerSeries:
        return todd().series(order).pow(Fraction(1, 2))
    return GenusSpec("sqrt_todd", build)


def sqrt_todd_bracket() -> GenusSpec:
    """{sqrt(Td)}(x) = x/(e^(x/2) - e^(-x/2)): the symmetrization of
    ``sqrt_todd`` in closed form."""
    def build(order: int) -> PowerSeries:
        plus = _exp_series(order + 1, Fraction(1, 2))
        minus = _exp_series(order + 1, Fraction(-1, 2))
        diff = plus - minus
        over_x = PowerSeries(diff.coefficients[1:], order, X)
        return over_x.inverse()
    return GenusSpec("sqrt_todd_bracket", build)


def det_genus() -> GenusSpec:
    """Determinant-line genus e^x (Verlinde-type insertions)."""
    return GenusSpec("det", lambda order: _exp_series(order))


def det_power(exponent: Fraction) -> GenusSpec:
    """e^(c*x) for a fixed rational c (e.g. 1/2 for square-root determinants)."""
    return GenusSpec(f"det^{exponent}", lambda order: _exp_series(order, exponent))


def nekrasov(s: str = "s") -> GenusSpec:
    """K-theoretic weight genus s*e^(-x/2) - (1/s)*e^(x/2), with s = y^(1/2).

    The constant term is the non-trivial unit s - 1/s; its powers multiply
    whole invariants, which is what makes the Laurent-polynomial integrality
    of the resulting series directly observable.
    """
    def build(order: int) -> PowerSeries:
        sv = ParamPoly.var(s, laurent=True)
        svi = sv.inverse_unit()
        plus = _exp_series(order, Fraction(1, 2))
        minus = _exp_series(order, Fraction(-1, 2))
        return minus * sv - plus * svi
    return GenusSpec(f"nekrasov({s})", build, (s,))


def lambda_genus(y: str = "yy") -> GenusSpec:
    """Exterior-power genus 1 + y*e^x with a bounded-degree marker y.

    The marker is nilpotent (y^2 = 0) because it is only ever consumed
    through d/dy at y = 0.
    """
    def build(order: int) -> PowerSeries:
        yv = ParamPoly.var(y, maxdeg=1)
        return _exp_series(order) * yv + 1
    return GenusSpec(f"lambda({y})", build, (y,))


CATALOG = {
    "chern": chern,
    "segre": segre,
    "todd": todd,
    "sqrt_todd": sqrt_todd,
    "sqrt_todd_bracket": sqrt_todd_bracket,
    "det": det_genus,
    "nekrasov": nekrasov,
    "lambda": lambda_genus,
}


def genus_by_name(spec: str) -> GenusSpec:
    """Resolve catalog entries like ``"segre:t"`` or ``"nekrasov:s"``.

    The part after the colon names the parameter symbol, when the genus has
    one.
    """
    name, _, param = spec.partition(":")
    if name not in CATALOG:
        raise ValueError(f"unknown genus {name!r}; have {sorted(CATALOG)}")
    ctor = CATALOG[name]
    if param:
        return ctor(param)
    return ctor()


# -- classic combinatorial series -------------------------------------------


def macmahon(order: int, negate_q: bool = False) -> PowerSeries:
    """MacMahon's plane-partition series prod_{i>=1} (1-q^i)^(-i).

    The product is expanded exactly; with ``negate_q`` the series M(-q) is
    returned.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    out = PowerSeries.one(order)
    for i in range(1, order + 1):
        c = [ParamPoly.zero()] * (order + 1)
        c[0] = ParamPoly.one()
        c[i] = ParamPoly.const(-1)
        out = out * PowerSeries(c, order).pow(-i)
    if negate_q:
        out = PowerSeries([c * ((-1) ** n) for n, c in enumerate(out.coefficients)],
                          order)
    return out


def fuss_catalan(a: int, order: int) -> PowerSeries:
    """Generating series of the Fuss-Catalan numbers
    C(n, a) = binom(a*n+1, n)/(a*n+1)."""
    if a < 1:
        raise ValueError("a must be >= 1")
    coeffs = [ParamPoly.const(Fraction(comb(a * n + 1, n), a * n + 1))
              for n in range(order + 1)]
    return PowerSeries(coeffs, order)


def lambert(order: int) -> PowerSeries:
    """Lambert's divisor series sum_{n>0} q^n/(1-q^n)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    total = PowerSeries.zero(order)
    for n in range(1, order + 1):
        geo = [ParamPoly.zero()] * (order + 1)
        k = n
        while k <= order:
            geo[k] = ParamPoly.one()
            k += n
        total = total + PowerSeries(geo, order)
    return total


def sqrt_todd_series(order: int) -> PowerSeries:
    """Convenience: the series x/(e^(x/2)-e^(-x/2)) itself."""
    return sqrt_todd_bracket().series(order)


def catalan_closed_form(order: int) -> PowerSeries:
    """(1 + sqrt(1+4q))/2, the inverse series of the Catalan generating
    function at -q."""
    c = [ParamPoly.zero()] * (order + 1)
    c[0] = ParamPoly.one()
    if order >= 1:
        c[1] = ParamPoly.const(4)
    root = PowerSeries(c, order).pow(Fraction(1, 2))
    return (root + 1) * Fraction(1, 2)


def log_macmahon_coefficient(n: int) -> Fraction:
    """[q^n] log M(q) = sigma2(n)/n (divisor-sum identity)."""
    return divisor_table().weighted(n)
