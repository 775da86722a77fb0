"""Truncated multivariate power series with constant coefficients.

Law components and chart transforms are series in k variables whose
coefficients lie in the ring of constants of R (F_q, or Z/p^M for Z_p),
truncated at total degree < M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .ring_core import (
    Monomial,
    Terms,
    TruncatedElement,
    format_terms,
    freeze_terms,
    poly_add,
    poly_mul,
    poly_neg,
    poly_scale,
    poly_truncate,
)


@dataclass(frozen=True)
class TruncatedSeries:
    nvars: int
    trunc: int
    coeffs: object  # GaloisField | IntegersMod
    terms: Terms

    @classmethod
    def from_dict(cls, nvars: int, trunc: int, coeffs, terms: Mapping[Monomial, int]) -> "TruncatedSeries":
        clean = {}
        for m, c in terms.items():
            m = tuple(m)
            if len(m) != nvars:
                raise ValueError(f"monomial {m} has arity {len(m)}, expected {nvars}")
            if sum(m) >= trunc:
                continue
            v = coeffs.from_int(c)
            if v:
                clean[m] = coeffs.add(clean.get(m, 0), v)
        return cls(nvars, trunc, coeffs, freeze_terms(clean))

    @classmethod
    def zero(cls, nvars: int, trunc: int, coeffs) -> "TruncatedSeries":
        return cls(nvars, trunc, coeffs, ())

    @classmethod
    def variable(cls, i: int, nvars: int, trunc: int, coeffs) -> "TruncatedSeries":
        """The i-th variable, 0-based."""
        mono = tuple(1 if j == i else 0 for j in range(nvars))
        return cls.from_dict(nvars, trunc, coeffs, {mono: 1})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def _wrap(self, d: Mapping[Monomial, int]) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.trunc, self.coeffs, freeze_terms(d))

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self._wrap(poly_add(self.as_dict(), other.as_dict(), self.coeffs))

    def __neg__(self) -> "TruncatedSeries":
        return self._wrap(poly_neg(self.as_dict(), self.coeffs))

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self._wrap(poly_mul(self.as_dict(), other.as_dict(), self.coeffs, self.trunc))

    def scale(self, c: int) -> "TruncatedSeries":
        return self._wrap(poly_scale(self.as_dict(), c, self.coeffs))

    def truncate(self, trunc: int) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, trunc, self.coeffs, freeze_terms(poly_truncate(self.as_dict(), trunc)))

    def homogeneous_part(self, deg: int) -> dict:
        return {m: c for m, c in self.terms if sum(m) == deg}

    def constant_term(self) -> int:
        return self.as_dict().get((0,) * self.nvars, 0)

    def min_degree(self) -> int:
        """Lowest total degree present (trunc for the zero series)."""
        return sum(self.terms[0][0]) if self.terms else self.trunc

    def max_degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=-1)

    def __str__(self) -> str:
        names = [f"X{i + 1}" for i in range(self.nvars)] if self.nvars > 1 else ["X"]
        return format_terms(self.as_dict(), self.nvars, names)


def _power_table(xs: Sequence, max_exp: Sequence[int], one, mul):
    table = []
    for x, e in zip(xs, max_exp):
        row = [one]
        for _ in range(e):
            row.append(mul(row[-1], x))
        table.append(row)
    return table


def compose(outer: Sequence[TruncatedSeries], inner: Sequence[TruncatedSeries], trunc: int | None = None) -> list[TruncatedSeries]:
    """Substitute ``inner`` (k series in m variables, no constant terms) into each
    series of ``outer`` (k variables), truncating at total degree < trunc."""
    if not inner:
        raise ValueError("need at least one inner series")
    k = len(inner)
    m = inner[0].nvars
    coeffs = inner[0].coeffs
    if trunc is None:
        trunc = min([s.trunc for s in outer] + [s.trunc for s in inner])
    for s in outer:
        if s.nvars != k:
            raise ValueError(f"outer series has {s.nvars} variables, but {k} inner series were given")
    for s in inner:
        if s.nvars != m:
            raise ValueError("inner series must share the same variables")
        if s.constant_term():
            raise ValueError("inner series must have no constant term")
    inner_t = [s.truncate(trunc) for s in inner]
    max_exp = [0] * k
    for s in outer:
        for mono, _ in s.terms:
            for i, e in enumerate(mono):
                max_exp[i] = max(max_exp[i], min(e, trunc))
    one = TruncatedSeries.from_dict(m, trunc, coeffs, {(0,) * m: 1})
    powers = _power_table(inner_t, max_exp, one, lambda a, b: a * b)
    out = []
    for s in outer:
        acc: dict = {}
        for mono, c in s.terms:
            if sum(mono) >= trunc:
                continue
            term = one
            for i, e in enumerate(mono):
                if e:
                    term = term * powers[i][e]
                    if not term.terms:
                        break
            if term.terms:
                acc = poly_add(acc, poly_scale(term.as_dict(), c, coeffs), coeffs)
        out.append(TruncatedSeries(m, trunc, coeffs, freeze_terms(acc)))
    return out


def evaluate(series: TruncatedSeries, xs: Sequence[TruncatedElement]) -> TruncatedElement:
    """Evaluate at ring elements (all coordinates must have positive valuation
    unless the series is a polynomial, which it always is at finite truncation)."""
    return evaluate_many([series], xs)[0]


def evaluate_many(series: Sequence[TruncatedSeries], xs: Sequence[TruncatedElement]) -> list[TruncatedElement]:
    if not xs:
        raise ValueError("no arguments")
    ring, trunc = xs[0].ring, xs[0].trunc
    max_exp = [0] * len(xs)
    for s in series:
        if s.nvars != len(xs):
            raise ValueError(f"series in {s.nvars} variables evaluated at {len(xs)} arguments")
        for mono, _ in s.terms:
            for i, e in enumerate(mono):
                if e > max_exp[i]:
                    max_exp[i] = e
    if ring.is_padic:
        mod = ring.p**trunc
        powers = [[pow(x.value, e, mod) for e in range(k + 1)] for x, k in zip(xs, max_exp)]
        out = []
        for s in series:
            acc = 0
            for mono, c in s.terms:
                term = c
                for i, e in enumerate(mono):
                    if e:
                        term = term * powers[i][e] % mod
                acc += term
            out.append(TruncatedElement(ring, trunc, acc % mod))
        return out
    F = ring.residue_field
    one = {(0,) * ring.num_vars: 1}
    powers = _power_table([dict(x.value) for x in xs], max_exp, one, lambda a, b: poly_mul(a, b, F, trunc))
    out = []
    for s in series:
        acc: dict = {}
        for mono, c in s.terms:
            term = None
            for i, e in enumerate(mono):
                if e:
                    term = powers[i][e] if term is None else poly_mul(term, powers[i][e], F, trunc)
                    if not term:
                        break
            if term is None:
                term = one
            if term:
                acc = poly_add(acc, term if c == 1 else poly_scale(term, c, F), F)
        out.append(TruncatedElement(ring, trunc, freeze_terms(acc)))
    return out
