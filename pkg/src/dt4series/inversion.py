"""Functional inversion of series.

Two independent algorithms live here on purpose.  ``lagrange_invert`` solves
the fixed-point equation H = q*Q(H) order by order; ``gessel_lagrange_sum``
evaluates the generalized Lagrange coefficient formula

    sum over the N branch solutions g of g^N = x*Q(g) of phi(g(x))
        = sum_{n>0} (1/n) [t^(nN-1)] ( phi'(t) * Q(t)^n ) x^n,

so each can serve as an oracle for the other (at N = 1 the right-hand side
is phi(H(x))).  Branch solutions with fractional exponents are never
materialized; only the integer-power extraction above is used.
"""

from __future__ import annotations

from fractions import Fraction

from .series import PowerSeries


def lagrange_invert(Q: PowerSeries, order: int | None = None) -> PowerSeries:
    """The unique series H with H = q*Q(H), for Q with invertible constant.

    Coefficient n of H depends only on coefficients below n, so the
    fixed-point recursion is exact: H is rebuilt through q*Q(H) one order at
    a time.  No division by Q(0) occurs.
    """
    if order is None:
        order = Q.order
    c0 = Q.constant()
    if c0.is_zero():
        raise ValueError("Q must have an invertible (nonzero) constant term")
    H = PowerSeries.zero(order, Q.variable)
    for m in range(1, order + 1):
        rhs = Q.compose(H.truncate(m - 1))
        # q*Q(H) shifts by one power of q: [q^m](q*Q(H)) = [q^(m-1)]Q(H)
        coeffs = list(H.coefficients)
        coeffs[m] = rhs.coefficients[m - 1]
        H = PowerSeries(coeffs, order, Q.variable)
    return H


def fixed_point_residual(H: PowerSeries, Q: PowerSeries) -> PowerSeries:
    """H - q*Q(H); identically zero when H solves the fixed-point equation."""
    n = min(H.order, Q.order)
    QH = Q.truncate(n).compose(H.truncate(n))
    shifted = [QH._zero_coeff()] + QH.coefficients[:n]
    return H.truncate(n) - PowerSeries(shifted, n, H.variable)


def gessel_lagrange_sum(phi: PowerSeries, Q: PowerSeries, N: int,
                        order: int) -> PowerSeries:
    """The branch-summed coefficient-extraction series (see module docs).

    ``phi`` must vanish at 0; ``Q`` needs an invertible constant term;
    ``N >= 1`` is the root multiplicity.  The output variable is ``q``.
    Inputs shorter than order*N are read as exact polynomials (zero-padded);
    genuinely truncated inputs must be supplied to order >= order*N - 1.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not phi.constant().is_zero():
        raise ValueError("phi(0) must vanish")
    if Q.constant().is_zero():
        raise ValueError("Q must have an invertible (nonzero) constant term")
    t_order = order * N  # highest extraction index is order*N - 1
    phid = PowerSeries(phi.coefficients, t_order, phi.variable).derivative()
    Qt = PowerSeries(Q.coefficients, t_order, Q.variable)
    out = [Qt._zero_coeff()] * (order + 1)
    Qpow = Qt.pow(0)
    for n in range(1, order + 1):
        Qpow = Qpow * Qt
        body = phid * Qpow
        idx = n * N - 1
        if idx <= body.order:
            out[n] = body.coefficients[idx] * Fraction(1, n)
    return PowerSeries(out, order, "q")
