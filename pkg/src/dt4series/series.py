"""Truncated formal power series over an exact coefficient ring.

A ``PowerSeries`` stores coefficients 0..order in one distinguished counting
variable (default ``q``).  The truncation order travels with the value;
operations on mixed orders silently truncate to the minimum, so a result
never claims more precision than its inputs had.

Coefficients are ``ParamPoly`` by default, but any commutative-ring value
supporting ``+``, unary ``-``, ``*`` (by ring elements and by ``Fraction``)
and ``is_zero()`` works; the vertex-algebra layer reuses this module with
state-polynomial coefficients.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Sequence, Union

from .exactarith import ParamPoly, ScalarLike

Coeff = ParamPoly  # default coefficient ring


def _coerce_coeff(x, like) -> object:
    """Coerce ints/Fractions into the coefficient ring of ``like``."""
    if isinstance(x, (int, Fraction)):
        return like * 0 + x
    return x


class PowerSeries:
    """A series known modulo ``q^(order+1)``, with exact coefficients."""

    __slots__ = ("coefficients", "order", "variable")

    def __init__(self, coefficients: Sequence, order: int | None = None,
                 variable: str = "q"):
        coeffs = [c if isinstance(c, ParamPoly) or not isinstance(c, (int, Fraction))
                  else ParamPoly.const(c)
                  for c in coefficients]
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("order must be >= 0")
        if len(coeffs) < order + 1:
            pad = coeffs[0] * 0 if coeffs else ParamPoly.zero()
            coeffs = coeffs + [pad] * (order + 1 - len(coeffs))
        self.coefficients = coeffs[: order + 1]
        self.order = order
        self.variable = variable

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(order: int, variable: str = "q") -> PowerSeries:
        return PowerSeries([ParamPoly.zero()] * (order + 1), order, variable)

    @staticmethod
    def one(order: int, variable: str = "q") -> PowerSeries:
        c = [ParamPoly.zero()] * (order + 1)
        c[0] = ParamPoly.one()
        return PowerSeries(c, order, variable)

    @staticmethod
    def gen(order: int, variable: str = "q") -> PowerSeries:
        """The series ``q`` itself."""
        c = [ParamPoly.zero()] * (order + 1)
        if order >= 1:
            c[1] = ParamPoly.one()
        return PowerSeries(c, order, variable)

    @staticmethod
    def from_function(f: Callable[[int], object], order: int,
                      variable: str = "q") -> PowerSeries:
        return PowerSeries([f(n) for n in range(order + 1)], order, variable)

    # -- helpers ------------------------------------------------------------

    def _zero_coeff(self):
        return self.coefficients[0] * 0

    def _check_var(self, other: PowerSeries) -> None:
        if self.variable != other.variable:
            raise ValueError(
                f"variable mismatch: {self.variable!r} vs {other.variable!r}"
            )

    def coefficient(self, n: int):
        if n > self.order:
            raise ValueError(f"coefficient {n} beyond truncation order {self.order}")
        return self.coefficients[n]

    def truncate(self, order: int) -> PowerSeries:
        if order >= self.order:
            return self
        return PowerSeries(self.coefficients[: order + 1], order, self.variable)

    def constant(self):
        return self.coefficients[0]

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coefficients)

    def map_coefficients(self, f: Callable[[int, object], object]) -> PowerSeries:
        return PowerSeries([f(n, c) for n, c in enumerate(self.coefficients)],
                           self.order, self.variable)

    # -- ring structure -------------------------------------------------------

    def __add__(self, other: PowerSeries | ScalarLike) -> PowerSeries:
        if isinstance(other, (int, Fraction)):
            c = list(self.coefficients)
            c[0] = c[0] + _coerce_coeff(other, c[0])
            return PowerSeries(c, self.order, self.variable)
        self._check_var(other)
        n = min(self.order, other.order)
        return PowerSeries(
            [self.coefficients[i] + other.coefficients[i] for i in range(n + 1)],
            n, self.variable)

    __radd__ = __add__

    def __neg__(self) -> PowerSeries:
        return PowerSeries([-c for c in self.coefficients], self.order, self.variable)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PowerSeries) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> PowerSeries:
        if isinstance(other, (int, Fraction, ParamPoly)):
            return PowerSeries([c * other for c in self.coefficients],
                               self.order, self.variable)
        if not isinstance(other, PowerSeries):
            return NotImplemented
        self._check_var(other)
        n = min(self.order, other.order)
        zero = self._zero_coeff()
        out = [zero] * (n + 1)
        for i, a in enumerate(self.coefficients[: n + 1]):
            if _is_zero(a):
                continue
            for j in range(0, n - i + 1):
                b = other.coefficients[j]
                if _is_zero(b):
                    continue
                out[i + j] = out[i + j] + a * b
        return PowerSeries(out, n, self.variable)

    __rmul__ = __mul__

    def inverse(self) -> PowerSeries:
        """Multiplicative inverse; the constant term must be invertible."""
        c0 = self.coefficients[0]
        inv0 = _invert_coeff(c0)
        zero = self._zero_coeff()
        out = [zero] * (self.order + 1)
        out[0] = inv0
        for m in range(1, self.order + 1):
            acc = zero
            for k in range(1, m + 1):
                a = self.coefficients[k]
                if _is_zero(a):
                    continue
                acc = acc + a * out[m - k]
            out[m] = -(inv0 * acc)
        return PowerSeries(out, self.order, self.variable)

    def __truediv__(self, other) -> PowerSeries:
        if isinstance(other, PowerSeries):
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    # -- analytic-style toolkit -------------------------------------------------

    def derivative(self) -> PowerSeries:
        """Formal d/dq; the result is known one order lower."""
        if self.order == 0:
            return PowerSeries([self._zero_coeff()], 0, self.variable)
        return PowerSeries(
            [self.coefficients[k] * k for k in range(1, self.order + 1)],
            self.order - 1, self.variable)

    def exp(self) -> PowerSeries:
        """exp of a series with zero constant term."""
        if not _is_zero(self.coefficients[0]):
            raise ValueError("exp requires zero constant term")
        zero = self._zero_coeff()
        out = [zero] * (self.order + 1)
        out[0] = _coerce_coeff(1, zero)
        for m in range(1, self.order + 1):
            acc = zero
            for k in range(1, m + 1):
                a = self.coefficients[k]
                if _is_zero(a):
                    continue
                acc = acc + (a * k) * out[m - k]
            out[m] = acc * Fraction(1, m)
        return PowerSeries(out, self.order, self.variable)

    def log(self) -> PowerSeries:
        """log of a series with constant term 1."""
        if not _is_one(self.coefficients[0]):
            raise ValueError("log requires constant term 1")
        zero = self._zero_coeff()
        out = [zero] * (self.order + 1)
        for m in range(1, self.order + 1):
            acc = self.coefficients[m] * m
            for k in range(1, m):
                acc = acc - (out[k] * k) * self.coefficients[m - k]
            out[m] = acc * Fraction(1, m)
        return PowerSeries(out, self.order, self.variable)

    def pow(self, e) -> PowerSeries:
        """Raise to a power: integer, Fraction, or symbolic ``ParamPoly``.

        For non-integer exponents the constant term must be 1, and the result
        is ``exp(e*log(self))``; an integer exponent only needs an invertible
        constant term and agrees with repeated multiplication.
        """
        if isinstance(e, int):
            zero = self._zero_coeff()
            result = PowerSeries([zero + 1] + [zero] * self.order,
                                 self.order, self.variable)
            if e == 0:
                return result
            base = self if e > 0 else self.inverse()
            n = abs(e)
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        return (self.log() * e).exp()

    def __pow__(self, e) -> PowerSeries:
        return self.pow(e)

    def compose(self, inner: PowerSeries) -> PowerSeries:
        """Substitute ``inner`` (zero constant term) into this series.

        The result is expressed in the inner series' variable, so a genus in a
        Chern-root variable can be composed with a change of variables in q.
        """
        if not _is_zero(inner.coefficients[0]):
            raise ValueError("composition requires inner constant term 0")
        n = min(self.order, inner.order)
        zero = inner._zero_coeff()
        g = inner.truncate(n)
        result = PowerSeries([self.coefficients[n]] + [zero] * n, n,
                             inner.variable)
        for k in range(n - 1, -1, -1):
            result = result * g
            result = result + PowerSeries([self.coefficients[k]] + [zero] * n,
                                          n, inner.variable)
        return result

    def substitute_q_power(self, n: int) -> PowerSeries:
        """Map q -> q^n (regrading); requires n >= 1."""
        if n < 1:
            raise ValueError("power must be >= 1")
        zero = self._zero_coeff()
        out = [zero] * (self.order + 1)
        for k in range(self.order + 1):
            if k * n > self.order:
                break
            out[k * n] = self.coefficients[k]
        return PowerSeries(out, self.order, self.variable)

    def map_params(self, f: Callable[[ParamPoly], ParamPoly]) -> PowerSeries:
        return PowerSeries([f(c) for c in self.coefficients], self.order,
                           self.variable)

    # -- comparison and rendering --------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return (self.variable == other.variable and self.order == other.order
                and all(a == b for a, b in
                        zip(self.coefficients, other.coefficients)))

    def __hash__(self):
        raise TypeError("PowerSeries is not hashable")

    def agrees_with(self, other: PowerSeries, order: int | None = None) -> bool:
        """Coefficient-wise equality up to min(order) (or a given order)."""
        n = min(self.order, other.order)
        if order is not None:
            n = min(n, order)
        return all(self.coefficients[k] == other.coefficients[k]
                   for k in range(n + 1))

    def first_divergence(self, other: PowerSeries):
        """Smallest n where the two series differ, with both coefficients.

        Returns None if they agree to the common order.
        """
        n = min(self.order, other.order)
        for k in range(n + 1):
            if not self.coefficients[k] == other.coefficients[k]:
                return k, self.coefficients[k], other.coefficients[k]
        return None

    def render_coefficients(self) -> list[str]:
        return [c.render() if isinstance(c, ParamPoly) else str(c)
                for c in self.coefficients]

    def to_json(self) -> str:
        return json.dumps({
            "variable": self.variable,
            "order": self.order,
            "coefficients": self.render_coefficients(),
        }, separators=(", ", ": "))

    def __repr__(self) -> str:
        parts = []
        for n, c in enumerate(self.coefficients):
            if _is_zero(c):
                continue
            cs = c.render() if isinstance(c, ParamPoly) else str(c)
            if "+" in cs or " - " in cs:
                cs = f"({cs})"
            parts.append(cs if n == 0 else
                         (f"{cs}*{self.variable}" if n == 1 else
                          f"{cs}*{self.variable}^{n}"))
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O({self.variable}^{self.order + 1})"


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero()


def _is_one(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 1
    return _is_zero(c + (-1))


def _invert_coeff(c):
    """Invert a coefficient: Fractions, constants and Laurent monomials."""
    if isinstance(c, (int, Fraction)):
        if c == 0:
            raise ValueError("constant term not invertible (zero)")
        return Fraction(1) / Fraction(c)
    if isinstance(c, ParamPoly):
        if c.is_zero():
            raise ValueError("constant term not invertible (zero)")
        return c.inverse_unit()
    raise ValueError("coefficient ring element not invertible here")


# functional forms used by the operation-level API ---------------------------

def series_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    return a * b


def series_exp_log(a: PowerSeries, mode: str) -> PowerSeries:
    if mode == "exp":
        return a.exp()
    if mode == "log":
        return a.log()
    raise ValueError(f"unknown mode {mode!r}")


def series_pow(a: PowerSeries, e) -> PowerSeries:
    return a.pow(e)


def series_compose(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    return f.compose(g)


def series_coefficient(f: PowerSeries, n: int):
    return f.coefficient(n)
