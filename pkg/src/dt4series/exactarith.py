"""Exact scalar and parameter-polynomial arithmetic.

Everything downstream (series, vertex-algebra states, invariants) is built
over this module.  Scalars are exact rationals with arbitrary-size integers;
``ParamPoly`` is a sparse multivariate Laurent polynomial in a table of
declared parameter symbols (exponent weights like ``g``, Chern-root markers
like ``t``, the half-weight ``s`` with ``s^2 = y``).  No floating point is
used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

#: Exact rational scalar.  ``fractions.Fraction`` already satisfies the
#: required invariants: always reduced, positive denominator, canonical
#: equality.
Scalar = Fraction

ScalarLike = Union[int, Fraction]


@dataclass(frozen=True)
class Sym:
    """A declared parameter symbol.

    ``laurent`` permits negative exponents.  ``maxdeg`` truncates: any term
    whose exponent in this symbol exceeds ``maxdeg`` is dropped on
    construction, which turns the symbol into a bounded-degree (nilpotent)
    direction.
    """

    name: str
    laurent: bool = False
    maxdeg: int | None = None


def _merge_symbols(a: tuple[Sym, ...], b: tuple[Sym, ...]) -> tuple[Sym, ...]:
    by_name: dict[str, Sym] = {s.name: s for s in a}
    for s in b:
        prev = by_name.get(s.name)
        if prev is None:
            by_name[s.name] = s
        elif prev != s:
            raise ValueError(
                f"symbol {s.name!r} declared with conflicting flags: {prev} vs {s}"
            )
    return tuple(sorted(by_name.values(), key=lambda s: s.name))


class ParamPoly:
    """Sparse Laurent polynomial over ``Scalar`` in named parameter symbols.

    Terms map exponent vectors (aligned with the sorted symbol table) to
    nonzero scalars.  Values are immutable after construction; all operations
    return new objects, so sharing across threads is safe.
    """

    __slots__ = ("symbols", "terms")

    def __init__(
        self,
        terms: Mapping[tuple[int, ...], ScalarLike] | None = None,
        symbols: Iterable[Sym] = (),
    ):
        syms = tuple(sorted(symbols, key=lambda s: s.name))
        names = [s.name for s in syms]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in table: {names}")
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for expo, coeff in terms.items():
                expo = tuple(expo)
                if len(expo) != len(syms):
                    raise ValueError(
                        f"exponent vector {expo} does not match arity {len(syms)}"
                    )
                c = Fraction(coeff)
                if c == 0:
                    continue
                keep = True
                for e, s in zip(expo, syms):
                    if e < 0 and not s.laurent:
                        raise ValueError(
                            f"negative exponent for non-Laurent symbol {s.name!r}"
                        )
                    if s.maxdeg is not None and e > s.maxdeg:
                        keep = False
                        break
                if keep:
                    clean[expo] = clean.get(expo, Fraction(0)) + c
                    if clean[expo] == 0:
                        del clean[expo]
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "terms", clean)

    # -- constructors -----------------------------------------------------

    @staticmethod
    def const(c: ScalarLike) -> ParamPoly:
        c = Fraction(c)
        return ParamPoly({(): c} if c != 0 else {}, ())

    @staticmethod
    def var(name: str, laurent: bool = False, maxdeg: int | None = None) -> ParamPoly:
        return ParamPoly({(1,): Fraction(1)}, (Sym(name, laurent, maxdeg),))

    @staticmethod
    def zero() -> ParamPoly:
        return ParamPoly({}, ())

    @staticmethod
    def one() -> ParamPoly:
        return ParamPoly.const(1)

    # -- helpers -----------------------------------------------------------

    def _aligned(self, other: ParamPoly) -> tuple[tuple[Sym, ...], dict, dict]:
        syms = _merge_symbols(self.symbols, other.symbols)
        return syms, self._reindex(syms), other._reindex(syms)

    def _reindex(self, syms: tuple[Sym, ...]) -> dict[tuple[int, ...], Fraction]:
        if syms == self.symbols:
            return dict(self.terms)
        pos = {s.name: i for i, s in enumerate(syms)}
        out: dict[tuple[int, ...], Fraction] = {}
        for expo, c in self.terms.items():
            new = [0] * len(syms)
            for e, s in zip(expo, self.symbols):
                new[pos[s.name]] = e
            out[tuple(new)] = c
        return out

    @staticmethod
    def _coerce(x: ParamPoly | ScalarLike) -> ParamPoly:
        if isinstance(x, ParamPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return ParamPoly.const(x)
        return NotImplemented  # type: ignore[return-value]

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: ParamPoly | ScalarLike) -> ParamPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        syms, a, b = self._aligned(other)
        for expo, c in b.items():
            a[expo] = a.get(expo, Fraction(0)) + c
        return ParamPoly(a, syms)

    __radd__ = __add__

    def __neg__(self) -> ParamPoly:
        return ParamPoly({e: -c for e, c in self.terms.items()}, self.symbols)

    def __sub__(self, other: ParamPoly | ScalarLike) -> ParamPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: ScalarLike) -> ParamPoly:
        return (-self) + other

    def __mul__(self, other: ParamPoly | ScalarLike) -> ParamPoly:
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return ParamPoly({}, self.symbols)
            return ParamPoly({e: k * c for e, k in self.terms.items()}, self.symbols)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        syms, a, b = self._aligned(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return ParamPoly(out, syms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> ParamPoly:
        if not isinstance(n, int):
            raise TypeError("ParamPoly exponent must be an integer")
        if n < 0:
            inv = self.inverse_unit()
            return inv ** (-n)
        result = ParamPoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- predicates and access ----------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in expo) for expo in self.terms)

    def constant_term(self) -> Fraction:
        zero = (0,) * len(self.symbols)
        return self.terms.get(zero, Fraction(0))

    def as_scalar(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self.render()}")
        return self.constant_term()

    def is_integral(self) -> bool:
        """True if every coefficient is an integer."""
        return all(c.denominator == 1 for c in self.terms.values())

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def inverse_unit(self) -> ParamPoly:
        """Invert a nonzero constant or a single Laurent-invertible monomial."""
        if len(self.terms) != 1:
            raise ValueError(f"not invertible as a monomial: {self.render()}")
        (expo, c), = self.terms.items()
        for e, s in zip(expo, self.symbols):
            if e != 0 and not s.laurent:
                raise ValueError(
                    f"cannot invert exponent of non-Laurent symbol {s.name!r}"
                )
        return ParamPoly({tuple(-e for e in expo): Fraction(1) / c}, self.symbols)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ParamPoly.const(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        _, a, b = self._aligned(other)
        return a == b

    def __hash__(self) -> int:
        # canonical: drop symbols with all-zero exponents
        items = []
        for expo, c in self.terms.items():
            named = tuple(
                (s.name, e) for s, e in zip(self.symbols, expo) if e != 0
            )
            items.append((named, c))
        return hash(frozenset(items))

    # -- substitution --------------------------------------------------------

    def substitute(self, values: Mapping[str, ParamPoly | ScalarLike]) -> ParamPoly:
        """Substitute polynomials/scalars for symbols (by name).

        Symbols with negative exponents require the substituted value to be an
        invertible monomial.
        """
        vals = {k: self._coerce(v) for k, v in values.items()}
        out = ParamPoly({}, ())
        kept = tuple(s for s in self.symbols if s.name not in vals)
        for expo, c in self.terms.items():
            factor = ParamPoly({tuple(e for e, s in zip(expo, self.symbols)
                                      if s.name not in vals): c}, kept)
            for e, s in zip(expo, self.symbols):
                if s.name in vals and e != 0:
                    factor = factor * (vals[s.name] ** e)
            out = out + factor
        return out

    def coefficient_of(self, name: str, k: int) -> ParamPoly:
        """The coefficient of name^k, with that symbol's exponent zeroed.

        The symbol table is preserved, so Laurent/bounded flags survive.
        """
        idx = None
        for i, s in enumerate(self.symbols):
            if s.name == name:
                idx = i
        if idx is None:
            return self if k == 0 else ParamPoly({}, self.symbols)
        out: dict[tuple[int, ...], Fraction] = {}
        for expo, c in self.terms.items():
            if expo[idx] != k:
                continue
            e = list(expo)
            e[idx] = 0
            out[tuple(e)] = c
        return ParamPoly(out, self.symbols)

    def scale_exponent(self, name: str, n: int) -> ParamPoly:
        """Map the symbol ``name`` to its n-th power (exponent scaling).

        This realizes plethysm substitutions like ``s -> s^n`` exactly.
        """
        if n <= 0:
            raise ValueError("exponent scale must be positive")
        idx = None
        for i, s in enumerate(self.symbols):
            if s.name == name:
                idx = i
        if idx is None:
            return self
        out: dict[tuple[int, ...], Fraction] = {}
        for expo, c in self.terms.items():
            e = list(expo)
            e[idx] *= n
            key = tuple(e)
            out[key] = out.get(key, Fraction(0)) + c
        return ParamPoly(out, self.symbols)

    # -- rendering -------------------------------------------------------------

    def render(self) -> str:
        """Canonical text form, deterministic: graded-lex descending."""
        if not self.terms:
            return "0"

        def key(expo: tuple[int, ...]) -> tuple:
            return (sum(expo), expo)

        parts = []
        for expo in sorted(self.terms, key=key, reverse=True):
            c = self.terms[expo]
            factors = []
            for e, s in zip(expo, self.symbols):
                if e == 0:
                    continue
                factors.append(s.name if e == 1 else f"{s.name}^{e}")
            mono = "*".join(factors)
            if not mono:
                parts.append(_render_frac(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{_render_frac(c)}*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def to_jsonable(self) -> dict:
        """Lossless structural form (symbol flags included)."""
        def key(expo: tuple[int, ...]) -> tuple:
            return (sum(expo), expo)
        return {
            "symbols": [[s.name, s.laurent, s.maxdeg] for s in self.symbols],
            "terms": [[list(expo), _render_frac(self.terms[expo])]
                      for expo in sorted(self.terms, key=key)],
        }

    @staticmethod
    def from_jsonable(data: dict) -> ParamPoly:
        syms = tuple(Sym(n, bool(l), m) for n, l, m in data["symbols"])
        terms = {tuple(expo): Fraction(c) for expo, c in data["terms"]}
        return ParamPoly(terms, syms)

    def __repr__(self) -> str:
        return f"ParamPoly({self.render()})"


def _render_frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def param_poly_arith(a: ParamPoly, b: ParamPoly, op: str) -> ParamPoly:
    """Dispatch form of the ring operations (`add`, `mul`, `neg`)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


def binomial_poly(symbol: str | ParamPoly, k: int) -> ParamPoly:
    """The polynomial ``c(c-1)...(c-k+1)/k!`` in the symbol ``c``.

    Evaluated at an integer ``n >= k`` it equals ``comb(n, k)``; it is the
    coefficient polynomial of ``x^k`` in ``(1+x)^c`` for a symbolic exponent.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    c = ParamPoly.var(symbol) if isinstance(symbol, str) else symbol
    out = ParamPoly.one()
    for j in range(k):
        out = out * (c - j)
    return out * Fraction(1, _factorial(k))


def _factorial(k: int) -> int:
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out
