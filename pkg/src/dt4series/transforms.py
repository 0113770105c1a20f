"""Global series transformations: divisor sums, the universal transformation
U and its inverse, the plethystic exponential, and genus symmetrization.

The universal transformation acts on unit series through their logarithm:

    [q^n] log U(g)  =  (-1)^n * sigma2(n) * [q^n] log g,

where ``sigma2(n) = sum of d^2 over divisors d of n``.  This log-coefficient
form is exact arithmetic; no roots of unity are ever evaluated.  The inverse
divides by ``sigma2(n)`` instead.
"""

from __future__ import annotations

from fractions import Fraction

from .series import PowerSeries


class DivisorTable:
    """Cached divisor power sums sigma_k(n) = sum_{d|n} d^k for k in {0, 2}.

    Built once per session up to the largest order requested and read-only
    afterwards, so concurrent reads are safe.
    """

    def __init__(self, up_to: int = 0):
        self._sigma0: list[int] = [0]
        self._sigma2: list[int] = [0]
        self.extend(up_to)

    def extend(self, up_to: int) -> None:
        have = len(self._sigma0) - 1
        for n in range(have + 1, up_to + 1):
            divs = [d for d in range(1, n + 1) if n % d == 0]
            self._sigma0.append(len(divs))
            self._sigma2.append(sum(d * d for d in divs))

    def sigma0(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        self.extend(n)
        return self._sigma0[n]

    def sigma2(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        self.extend(n)
        return self._sigma2[n]

    def weighted(self, n: int) -> Fraction:
        """sum_{l|n} n/l^2 = sigma2(n)/n, the wall-crossing divisor weight."""
        return Fraction(self.sigma2(n), n)


_SHARED = DivisorTable(64)


def divisor_table() -> DivisorTable:
    return _SHARED


def _rescale_log(g: PowerSeries, factor) -> PowerSeries:
    if not g.constant() == 1:
        raise ValueError("universal transformation needs constant term 1")
    lg = g.log()
    scaled = [lg.coefficients[0]]
    for n in range(1, g.order + 1):
        scaled.append(lg.coefficients[n] * factor(n))
    return PowerSeries(scaled, g.order, g.variable).exp()


def universal_u(g: PowerSeries) -> PowerSeries:
    """The universal transformation U on unit series."""
    table = divisor_table()
    return _rescale_log(g, lambda n: Fraction((-1) ** n) * table.sigma2(n))


def universal_u_inverse(g: PowerSeries) -> PowerSeries:
    """Inverse of :func:`universal_u`."""
    table = divisor_table()
    return _rescale_log(g, lambda n: Fraction((-1) ** n, table.sigma2(n)))


def plethystic_exp(f: PowerSeries, weight_symbol: str | None = "s") -> PowerSeries:
    """Plethystic exponential Exp[f] = exp( sum_{n>0} f(s^n, q^n)/n ).

    ``f`` must have zero constant term.  The auxiliary weight dependence is
    carried by the Laurent symbol named ``weight_symbol`` (s = y^(1/2)); the
    substitution y -> y^n is realized exactly as exponent scaling s -> s^n.
    Pass ``weight_symbol=None`` for a plain one-variable plethysm.
    """
    if not f.constant().is_zero():
        raise ValueError("plethystic exponential requires zero constant term")
    total = PowerSeries.zero(f.order, f.variable)
    for n in range(1, f.order + 1):
        fn = f
        if weight_symbol is not None:
            fn = fn.map_params(lambda p: p.scale_exponent(weight_symbol, n))
        fn = fn.substitute_q_power(n)
        total = total + fn * Fraction(1, n)
    return total.exp()


def bracket_sym(f: PowerSeries) -> PowerSeries:
    """The symmetrization {f}(x) = f(x) * f(-x)."""
    flipped = PowerSeries(
        [c * ((-1) ** n) for n, c in enumerate(f.coefficients)],
        f.order, f.variable)
    return f * flipped
