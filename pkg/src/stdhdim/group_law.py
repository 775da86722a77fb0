"""Formal group laws, standard groups and chart changes.

A standard group of level N and dimension d is identified with (m^N)^d via
its chart; the group operation in coordinates is x * y = F(x, y) for a formal
group law F = X + Y + G(X, Y). Every identity here holds modulo m^M, the
working truncation.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from itertools import permutations
from typing import Sequence

from .linalg import _perm_sign, matrix_inverse
from .ring_core import (
    RingDescriptor,
    TruncatedElement,
    check_level,
    format_monomial,
    format_terms,
    random_element,
)
from .series import TruncatedSeries, compose, evaluate_many

Point = tuple[TruncatedElement, ...]


class LawError(ValueError):
    """A law or transform is outside the supported class."""


class LevelError(ValueError):
    """A point has a coordinate of valuation below the level."""


# --- laws ----------------------------------------------------------------


@dataclass(frozen=True)
class FormalGroupLaw:
    """d series F_1..F_d in the 2d variables X_1..X_d, Y_1..Y_d.

    Variables are indexed 0..d-1 for X and d..2d-1 for Y.
    """

    ring: RingDescriptor
    d: int
    trunc: int
    components: tuple[TruncatedSeries, ...]
    label: str | None = None

    def __post_init__(self):
        if len(self.components) != self.d:
            raise LawError(f"law has {len(self.components)} components, expected d = {self.d}")
        for s in self.components:
            if s.nvars != 2 * self.d:
                raise LawError(f"law component in {s.nvars} variables, expected {2 * self.d}")

    @classmethod
    def from_coefficients(cls, ring: RingDescriptor, d: int, trunc: int, components, label=None) -> "FormalGroupLaw":
        """``components``: one mapping {exponent vector of length 2d: coefficient} per coordinate."""
        C = ring.coefficients(trunc)
        comps = tuple(TruncatedSeries.from_dict(2 * d, trunc, C, comp) for comp in components)
        return cls(ring, d, trunc, comps, label)

    def to_coefficients(self) -> list[list[tuple[list[int], int]]]:
        return [[(list(m), c) for m, c in s.terms] for s in self.components]

    @cached_property
    def is_additive(self) -> bool:
        return all(s.max_degree() <= 1 for s in self.components) and not validate_law(self)

    def describe(self) -> str:
        return self.label or "custom"

    def __str__(self) -> str:
        names = _xy_names(self.d)
        return "(" + ", ".join(format_terms(s.as_dict(), 2 * self.d, names) for s in self.components) + ")"


def _xy_names(d: int) -> list[str]:
    if d == 1:
        return ["X", "Y"]
    return [f"X{i}" for i in range(1, d + 1)] + [f"Y{i}" for i in range(1, d + 1)]


@dataclass(frozen=True)
class Violation:
    component: int  # 1-based coordinate index
    monomial: tuple[int, ...]
    rule: str
    message: str

    def __str__(self) -> str:
        return f"F_{self.component}: {self.message} [{self.rule}]"


def validate_law(law: FormalGroupLaw) -> list[Violation]:
    """Structural check F = X + Y + G with every monomial of G mixed.

    Returns the violations; an empty list means the law is well formed.
    Associativity is a separate, empirical matter (see check_group_axioms).
    """
    d = law.d
    names = _xy_names(d)
    out = []
    for j, comp in enumerate(law.components):
        terms = comp.as_dict()
        const = (0,) * (2 * d)
        if const in terms:
            out.append(Violation(j + 1, const, "no-constant-term", f"constant term {terms[const]}"))
        for i in range(2 * d):
            mono = tuple(1 if k == i else 0 for k in range(2 * d))
            want = 1 if i in (j, j + d) else 0
            have = terms.get(mono, 0)
            if have != want:
                out.append(
                    Violation(j + 1, mono, "linear-part", f"coefficient of {names[i]} is {have}, expected {want}")
                )
        for mono, c in comp.terms:
            if sum(mono) < 2:
                continue
            has_x = any(mono[:d])
            has_y = any(mono[d:])
            if not (has_x and has_y):
                missing = "Y" if has_x else "X"
                out.append(
                    Violation(
                        j + 1,
                        mono,
                        "mixed-monomial",
                        f"monomial {_mono_str(mono, names)} has no {missing} factor",
                    )
                )
    return out


def _mono_str(mono, names) -> str:
    return format_monomial(mono, names)


def _additive_components(d: int, offset: int, total: int) -> list[dict]:
    comps = []
    for j in range(d):
        x = [0] * (2 * total)
        y = [0] * (2 * total)
        x[offset + j] = 1
        y[total + offset + j] = 1
        comps.append({tuple(x): 1, tuple(y): 1})
    return comps


def _builtin_components(name: str, d: int, offset: int, total: int) -> list[dict]:
    comps = _additive_components(d, offset, total)
    if name == "additive":
        return comps
    if name == "multiplicative":
        if d != 1:
            raise LawError("the multiplicative law has dimension 1")
        xy = [0] * (2 * total)
        xy[offset] = 1
        xy[total + offset] = 1
        comps[0][tuple(xy)] = 1
        return comps
    if name == "heisenberg":
        if d != 3:
            raise LawError("the Heisenberg law has dimension 3")
        x1y2 = [0] * (2 * total)
        x1y2[offset] = 1
        x1y2[total + offset + 1] = 1
        comps[2][tuple(x1y2)] = 1
        return comps
    raise LawError(f"unknown builtin law {name!r}")


_FACTOR = re.compile(r"^\s*(additive|multiplicative|heisenberg)\s*(?:\(\s*(\d+)\s*\))?\s*$")
_NATURAL_DIM = {"multiplicative": 1, "heisenberg": 3}


def parse_law_name(name: str, d: int | None = None) -> list[tuple[str, int]]:
    """Split ``"multiplicative*additive(2)"`` into [(name, dim), ...]."""
    factors = []
    parts = name.split("*")
    for part in parts:
        m = _FACTOR.match(part)
        if not m:
            raise LawError(f"unknown builtin law {part.strip()!r}")
        base, dim = m.group(1), m.group(2)
        if dim is not None:
            k = int(dim)
        elif base in _NATURAL_DIM:
            k = _NATURAL_DIM[base]
        elif len(parts) == 1 and d is not None:
            k = d
        else:
            raise LawError(f"factor {part.strip()!r} needs an explicit dimension, e.g. additive(2)")
        factors.append((base, k))
    return factors


def builtin_law(name: str, ring: RingDescriptor, d: int, trunc: int) -> FormalGroupLaw:
    """Catalog laws: additive, multiplicative (d=1), heisenberg (d=3) and block
    products written as ``"multiplicative*additive(2)"``."""
    factors = parse_law_name(name, d)
    total = sum(k for _, k in factors)
    if total != d:
        raise LawError(f"law {name!r} has dimension {total}, but d = {d}")
    comps: list[dict] = []
    offset = 0
    for base, k in factors:
        comps.extend(_builtin_components(base, k, offset, total))
        offset += k
    return FormalGroupLaw.from_coefficients(ring, d, trunc, comps, label=name)


def product_law(*laws: FormalGroupLaw) -> FormalGroupLaw:
    """Block-diagonal juxtaposition of laws over the same ring and truncation."""
    if not laws:
        raise LawError("empty product")
    ring, trunc = laws[0].ring, laws[0].trunc
    total = sum(law.d for law in laws)
    comps = []
    offset = 0
    for law in laws:
        if law.ring != ring or law.trunc != trunc:
            raise LawError("product factors must share ring and truncation")
        for comp in law.components:
            new = {}
            for mono, c in comp.terms:
                e = [0] * (2 * total)
                for i in range(law.d):
                    e[offset + i] = mono[i]
                    e[total + offset + i] = mono[law.d + i]
                new[tuple(e)] = c
            comps.append(new)
        offset += law.d
    label = "*".join(f"{law.describe()}({law.d})" for law in laws)
    return FormalGroupLaw.from_coefficients(ring, total, trunc, comps, label=label)


# --- series utilities ----------------------------------------------------------


def identity_series(d: int, trunc: int, C) -> list[TruncatedSeries]:
    return [TruncatedSeries.variable(i, d, trunc, C) for i in range(d)]


def compose_series(outer: Sequence[TruncatedSeries], inner: Sequence[TruncatedSeries], trunc: int | None = None) -> list[TruncatedSeries]:
    """outer(inner(X)) truncated at total degree < trunc; inner must have no constant term."""
    return compose(outer, inner, trunc)


def _embed(series: TruncatedSeries, offset: int, nvars: int) -> TruncatedSeries:
    terms = {}
    for mono, c in series.terms:
        e = [0] * nvars
        e[offset : offset + series.nvars] = mono
        terms[tuple(e)] = c
    return TruncatedSeries.from_dict(nvars, series.trunc, series.coeffs, terms)


@lru_cache(maxsize=256)
def inverse_series(law: FormalGroupLaw) -> tuple[TruncatedSeries, ...]:
    """I(X) with F(X, I(X)) = 0 = F(I(X), X) mod degree M.

    Starts from -X and subtracts the current defect F(X, y); since G has no
    linear terms each pass fixes one more degree.
    """
    d, M = law.d, law.trunc
    C = law.ring.coefficients(M)
    xs = identity_series(d, M, C)
    y = [-x for x in xs]
    for _ in range(M + 1):
        defect = compose(law.components, xs + y, M)
        if all(not s.terms for s in defect):
            break
        y = [a - b for a, b in zip(y, defect)]
    else:
        raise LawError("inversion did not converge within the truncation")
    other = compose(law.components, y + xs, M)
    if any(s.terms for s in other):
        raise LawError("right inverse is not a left inverse; the law is not a group law")
    return tuple(y)


# --- standard groups -----------------------------------------------------------


@dataclass(frozen=True)
class StandardGroupPresentation:
    """(m^N)^d with the operation given by ``law``, at working precision M.

    ``scale`` = k != 0 marks the chart pi^k * phi: the operation is then
    x * y = pi^k F(x / pi^k, y / pi^k), which is how a uniformizer scaling is
    carried without leaving R[[X, Y]].
    """

    ring: RingDescriptor
    d: int
    level: int
    law: FormalGroupLaw
    trunc: int
    scale: int = 0
    strict_p2: bool = True
    name: str | None = None

    def __post_init__(self):
        check_level(self.ring, self.level, self.strict_p2)
        if self.trunc <= self.level:
            raise ValueError(f"working precision M = {self.trunc} must exceed the level N = {self.level}")
        if self.law.d != self.d:
            raise LawError(f"law dimension {self.law.d} does not match d = {self.d}")
        if self.law.ring != self.ring or self.law.trunc != self.trunc:
            raise LawError("law must share the presentation's ring and truncation")
        if self.scale and not self.ring.is_dvr:
            raise LawError("uniformizer scalings need a discrete valuation ring")

    @property
    def max_steps(self) -> int:
        """Largest n for which S/S_n is represented faithfully: n < M - N."""
        return self.trunc - self.level - 1

    def describe(self) -> str:
        if self.name:
            return self.name
        s = f"{self.law.describe()} over {self.ring.describe()}, d={self.d}, N={self.level}, M={self.trunc}"
        if self.scale:
            s += f", scale={self.scale}"
        return s

    def zero(self) -> Point:
        return tuple(self.ring.zero(self.trunc) for _ in range(self.d))

    def point(self, coords: Sequence[TruncatedElement]) -> Point:
        p = tuple(coords)
        self.check_point(p)
        return p

    def check_point(self, x: Point) -> None:
        if len(x) != self.d:
            raise LevelError(f"point has {len(x)} coordinates, expected {self.d}")
        for i, c in enumerate(x):
            if c.ring != self.ring or c.trunc != self.trunc:
                raise LevelError(f"coordinate {i + 1} lives in {c!r}, expected {self.ring.describe()} mod m^{self.trunc}")
            if c.valuation() < self.level:
                raise LevelError(f"coordinate {i + 1} = {c} has valuation {c.valuation()} < level {self.level}")

    def random_point(self, rng: random.Random, min_valuation: int | None = None) -> Point:
        v = self.level if min_valuation is None else min_valuation
        return tuple(random_element(self.ring, self.trunc, v, rng) for _ in range(self.d))

    def multiply(self, x: Point, y: Point) -> Point:
        return law_multiply(self, x, y)

    def inverse(self, x: Point) -> Point:
        return law_inverse(self, x)


def _unscale(S: StandardGroupPresentation, x: Point) -> list[TruncatedElement]:
    return [c.shift(-S.scale) for c in x] if S.scale else list(x)


def _rescale(S: StandardGroupPresentation, x: Sequence[TruncatedElement]) -> Point:
    return tuple(c.shift(S.scale) for c in x) if S.scale else tuple(x)


def law_multiply(S: StandardGroupPresentation, x: Point, y: Point) -> Point:
    """Coordinates of the product: F(x, y) mod m^M."""
    S.check_point(x)
    S.check_point(y)
    return _rescale(S, evaluate_many(S.law.components, _unscale(S, x) + _unscale(S, y)))


def multiply_unchecked(S: StandardGroupPresentation, x: Point, y: Point) -> Point:
    return _rescale(S, evaluate_many(S.law.components, _unscale(S, x) + _unscale(S, y)))


def law_inverse(S: StandardGroupPresentation, x: Point) -> Point:
    """Coordinates of x^{-1}: I(x) mod m^M."""
    S.check_point(x)
    return inverse_unchecked(S, x)


def inverse_unchecked(S: StandardGroupPresentation, x: Point) -> Point:
    return _rescale(S, evaluate_many(inverse_series(S.law), _unscale(S, x)))


def check_group_axioms(S: StandardGroupPresentation, trials: int, rng: random.Random) -> list[tuple[str, tuple]]:
    """Empirical associativity, identity and inverse checks on random points."""
    failures = []
    e = S.zero()
    for _ in range(trials):
        x, y, z = (S.random_point(rng) for _ in range(3))
        if S.multiply(S.multiply(x, y), z) != S.multiply(x, S.multiply(y, z)):
            failures.append(("associativity", (x, y, z)))
        if S.multiply(x, e) != x or S.multiply(e, x) != x:
            failures.append(("identity", (x,)))
        try:
            xi = S.inverse(x)
        except LawError:
            failures.append(("inverse", (x,)))
            continue
        if S.multiply(x, xi) != e or S.multiply(xi, x) != e:
            failures.append(("inverse", (x,)))
    return failures


# --- chart transforms ------------------------------------------------------------

SERIES = "series"
SCALE = "scale"


@dataclass(frozen=True)
class ChartTransform:
    """A chart change tau: psi = tau o phi.

    Two kinds are supported: ``series`` (d series in d variables without
    constant term and with invertible linear part, level shift 0) and
    ``scale`` (multiplication by pi^power, level shift = power, DVRs only).
    ``restrict`` = j >= 0 first passes to the open standard subgroup S_j.
    """

    ring: RingDescriptor
    d: int
    trunc: int
    kind: str
    components: tuple[TruncatedSeries, ...] = ()
    power: int = 0
    restrict: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.restrict < 0:
            raise LawError("restrict must be >= 0")
        if self.kind == SERIES:
            if len(self.components) != self.d:
                raise LawError(f"transform has {len(self.components)} components, expected {self.d}")
            for s in self.components:
                if s.nvars != self.d:
                    raise LawError("transform components must be series in d variables")
                if s.constant_term():
                    raise LawError("transform must fix 0 (no constant term)")
            C = self.ring.coefficients(self.trunc)
            lin = self.linear_part()
            det = _det(lin, C)
            if not C.is_unit(det):
                raise LawError("transform has a non-invertible linear part")
        elif self.kind == SCALE:
            if self.power == 0:
                raise LawError("use an identity series transform for power 0")
            if not self.ring.is_dvr:
                raise LawError("uniformizer scalings need a discrete valuation ring")
        else:
            raise LawError(f"unknown transform kind {self.kind!r}")

    @property
    def level_shift(self) -> int:
        return self.power if self.kind == SCALE else 0

    def linear_part(self) -> list[list[int]]:
        d = self.d
        rows = []
        for s in self.components:
            terms = s.as_dict()
            rows.append([terms.get(tuple(1 if k == i else 0 for k in range(d)), 0) for i in range(d)])
        return rows

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == SCALE:
            return f"pi^{self.power}*X"
        return "series"

    @classmethod
    def identity(cls, ring: RingDescriptor, d: int, trunc: int, label="identity") -> "ChartTransform":
        return cls(ring, d, trunc, SERIES, tuple(identity_series(d, trunc, ring.coefficients(trunc))), label=label)

    @classmethod
    def scaling(cls, ring: RingDescriptor, d: int, trunc: int, power: int = 1, restrict: int = 0, label=None) -> "ChartTransform":
        return cls(ring, d, trunc, SCALE, power=power, restrict=restrict, label=label)

    @classmethod
    def linear(cls, ring: RingDescriptor, d: int, trunc: int, matrix: Sequence[Sequence[int]], label=None) -> "ChartTransform":
        C = ring.coefficients(trunc)
        comps = []
        for row in matrix:
            terms = {tuple(1 if k == i else 0 for k in range(d)): c for i, c in enumerate(row)}
            comps.append(TruncatedSeries.from_dict(d, trunc, C, terms))
        return cls(ring, d, trunc, SERIES, tuple(comps), label=label)

    @classmethod
    def from_coefficients(cls, ring: RingDescriptor, d: int, trunc: int, components, restrict: int = 0, label=None) -> "ChartTransform":
        C = ring.coefficients(trunc)
        comps = tuple(TruncatedSeries.from_dict(d, trunc, C, comp) for comp in components)
        return cls(ring, d, trunc, SERIES, comps, restrict=restrict, label=label)


def _det(mat, C):
    n = len(mat)
    total = C.zero
    for perm in permutations(range(n)):
        term = C.one
        for i, j in enumerate(perm):
            term = C.mul(term, mat[i][j])
        total = C.add(total, term) if _perm_sign(perm) > 0 else C.sub(total, term)
    return total


def apply_transform(tau: ChartTransform, x: Sequence[TruncatedElement]) -> Point:
    """tau(x) coordinate-wise. A negative scale power divides exactly and drops
    that many digits of precision."""
    if tau.kind == SCALE:
        return tuple(c.shift(tau.power) for c in x)
    return tuple(evaluate_many(tau.components, list(x)))


def invert_transform(tau: ChartTransform) -> ChartTransform:
    """sigma with sigma o tau = tau o sigma = identity mod degree M.

    Solved degree by degree as sigma = L^{-1}(X - Q(sigma)), where L is the
    linear part of tau and Q its nonlinear part.
    """
    if tau.kind == SCALE:
        return replace(tau, power=-tau.power, restrict=0, label=f"inverse of {tau.describe()}")
    d, M = tau.d, tau.trunc
    C = tau.ring.coefficients(M)
    lin = tau.linear_part()
    lin_inv = matrix_inverse(lin, C)
    xs = identity_series(d, M, C)
    nonlinear = [TruncatedSeries.from_dict(d, M, C, {m: c for m, c in s.terms if sum(m) >= 2}) for s in tau.components]

    def apply_matrix(mat, vec):
        out = []
        for row in mat:
            acc = TruncatedSeries.zero(d, M, C)
            for c, v in zip(row, vec):
                if c:
                    acc = acc + v.scale(c)
            out.append(acc)
        return out

    sigma = apply_matrix(lin_inv, xs)
    for _ in range(M + 1):
        q = compose(nonlinear, sigma, M)
        nxt = apply_matrix(lin_inv, [x - y for x, y in zip(xs, q)])
        if nxt == sigma:
            break
        sigma = nxt
    else:
        raise LawError("transform inversion did not converge")
    if compose(tau.components, sigma, M) != xs or compose(sigma, list(tau.components), M) != xs:
        raise LawError("computed inverse fails the composition check")
    label = f"inverse of {tau.describe()}"
    return ChartTransform(tau.ring, d, M, SERIES, tuple(sigma), label=label)


def conjugate_law(law: FormalGroupLaw, tau: ChartTransform) -> FormalGroupLaw:
    """F^tau(X, Y) = tau(F(sigma(X), sigma(Y))) for a series transform tau."""
    if tau.kind != SERIES:
        raise LawError("only series transforms conjugate a law inside R[[X, Y]]")
    d, M = law.d, law.trunc
    sigma = invert_transform(tau).components
    inner = [_embed(s, 0, 2 * d) for s in sigma] + [_embed(s, d, 2 * d) for s in sigma]
    g = compose(law.components, inner, M)
    new = compose(tau.components, g, M)
    label = f"{law.describe()}^({tau.describe()})"
    return FormalGroupLaw(law.ring, d, M, tuple(new), label)


def transform_presentation(S: StandardGroupPresentation, tau: ChartTransform) -> StandardGroupPresentation:
    """The presentation of the group with chart psi = tau o phi (on S_restrict)."""
    if tau.ring != S.ring or tau.d != S.d or tau.trunc != S.trunc:
        raise LawError("transform must share ring, dimension and truncation with the presentation")
    level = S.level + tau.restrict
    name = f"{S.describe()} | {tau.describe()}"
    if tau.kind == SCALE:
        new_level = level + tau.power
        scale = S.scale + tau.power
        if S.law.is_additive:
            scale = 0  # pi^k commutes with the additive law
        return StandardGroupPresentation(S.ring, S.d, new_level, S.law, S.trunc, scale, S.strict_p2, name)
    if S.scale:
        raise LawError("apply series transforms before uniformizer scalings")
    law = conjugate_law(S.law, tau)
    violations = validate_law(law)
    if violations:
        raise LawError("transformed law is invalid: " + "; ".join(map(str, violations)))
    return StandardGroupPresentation(S.ring, S.d, level, law, S.trunc, 0, S.strict_p2, name)


__all__ = [
    "ChartTransform",
    "FormalGroupLaw",
    "LawError",
    "LevelError",
    "Point",
    "StandardGroupPresentation",
    "Violation",
    "apply_transform",
    "builtin_law",
    "check_group_axioms",
    "compose_series",
    "conjugate_law",
    "identity_series",
    "inverse_series",
    "invert_transform",
    "law_inverse",
    "law_multiply",
    "product_law",
    "transform_presentation",
    "validate_law",
]
