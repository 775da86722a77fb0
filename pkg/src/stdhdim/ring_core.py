"""Truncated pro-p rings R/m^M and their Hilbert data.

Two families are supported, both with an integral-domain associated graded
ring: the p-adic integers Z_p and power series rings F_q[[t_1, ..., t_r]].
Elements are stored at a fixed truncation M, i.e. as elements of R/m^M.

For these rings the Hilbert function H(n) = dim m^n/m^{n+1} already agrees
with its Hilbert polynomial for every n >= 0, so only H is exposed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement, product
from math import comb
from typing import Iterable, Iterator, Mapping, Union

from .fields import GaloisField, IntegersMod, galois_field, is_prime, prime_power_exponent

PADIC = "padic"
POWER_SERIES = "power_series"

Monomial = tuple[int, ...]
Terms = tuple[tuple[Monomial, int], ...]


class RingMismatchError(ValueError):
    """Operands live in different rings or at different truncations."""


# --- sparse polynomial helpers (dict: exponent tuple -> coefficient) -------


def degree(mono: Monomial) -> int:
    return sum(mono)


@lru_cache(maxsize=None)
def grlex_key(mono: Monomial):
    """Graded-lexicographic order, lower degree first, t1 > t2 > ... within a degree."""
    return (sum(mono), tuple(-e for e in mono))


def poly_add(a: Mapping[Monomial, int], b: Mapping[Monomial, int], F) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = F.add(out.get(m, 0), c)
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def poly_neg(a: Mapping[Monomial, int], F) -> dict:
    return {m: F.neg(c) for m, c in a.items()}


def poly_scale(a: Mapping[Monomial, int], c: int, F) -> dict:
    out = {}
    for m, v in a.items():
        w = F.mul(c, v)
        if w:
            out[m] = w
    return out


def poly_mul(a: Mapping[Monomial, int], b: Mapping[Monomial, int], F, trunc: int) -> dict:
    """Product truncated to total degree < trunc."""
    out: dict = {}
    b_items = [(m, c, sum(m)) for m, c in b.items()]
    for ma, ca in a.items():
        da = sum(ma)
        if da >= trunc:
            continue
        for mb, cb, db in b_items:
            if da + db >= trunc:
                continue
            m = tuple(x + y for x, y in zip(ma, mb))
            v = F.add(out.get(m, 0), F.mul(ca, cb))
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def poly_truncate(a: Mapping[Monomial, int], trunc: int) -> dict:
    return {m: c for m, c in a.items() if sum(m) < trunc}


def _term_key(mc):
    return grlex_key(mc[0])


def freeze_terms(a: Mapping[Monomial, int]) -> Terms:
    return tuple(sorted([(m, c) for m, c in a.items() if c], key=_term_key))


# --- rings ---------------------------------------------------------------


@dataclass(frozen=True)
class RingDescriptor:
    """A supported pro-p ring: Z_p (kind "padic") or F_q[[t_1..t_r]] (kind "power_series")."""

    kind: str
    p: int
    q: int
    num_vars: int | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        s = prime_power_exponent(self.q, self.p)
        if s is None:
            raise ValueError(f"q = {self.q} is not a positive power of p = {self.p}")
        if self.kind == PADIC:
            if self.q != self.p:
                raise ValueError("Z_p has residue field F_p, so q must equal p")
            if self.num_vars is not None:
                raise ValueError("num_vars is meaningless for Z_p")
        elif self.kind == POWER_SERIES:
            if self.num_vars is None or self.num_vars < 1:
                raise ValueError("power series rings need num_vars >= 1")
            if s > 3:
                raise ValueError(f"F_q with q = p^{s}, s > 3, is not supported")
        else:
            raise ValueError(f"unknown ring kind {self.kind!r}")

    @classmethod
    def padic(cls, p: int) -> "RingDescriptor":
        return cls(PADIC, p, p)

    @classmethod
    def power_series(cls, p: int, q: int | None = None, num_vars: int = 1) -> "RingDescriptor":
        return cls(POWER_SERIES, p, p if q is None else q, num_vars)

    @cached_property
    def is_padic(self) -> bool:
        return self.kind == PADIC

    @cached_property
    def is_dvr(self) -> bool:
        return self.kind == PADIC or self.num_vars == 1

    @cached_property
    def s(self) -> int:
        return prime_power_exponent(self.q, self.p)

    @cached_property
    def residue_field(self) -> GaloisField:
        return galois_field(self.p, self.s)

    def coefficients(self, trunc: int) -> GaloisField | IntegersMod:
        """Ring of constants that law and transform coefficients live in."""
        if self.is_padic:
            return _integers_mod(self.p, trunc)
        return self.residue_field

    def describe(self) -> str:
        if self.is_padic:
            return f"Z_{self.p}"
        names = ",".join(variable_names(self.num_vars))
        return f"F_{self.q}[[{names}]]"

    # constructors

    def zero(self, trunc: int) -> "TruncatedElement":
        return TruncatedElement(self, trunc, 0 if self.is_padic else ())

    def constant(self, c: int, trunc: int) -> "TruncatedElement":
        if self.is_padic:
            return TruncatedElement(self, trunc, c % self.p**trunc)
        v = self.residue_field.from_int(c)
        if not v or trunc <= 0:
            return self.zero(trunc)
        return TruncatedElement(self, trunc, (((0,) * self.num_vars, v),))

    def one(self, trunc: int) -> "TruncatedElement":
        return self.constant(1, trunc)

    def variable(self, i: int, trunc: int) -> "TruncatedElement":
        """The i-th variable t_i (1-based); for Z_p the uniformizer p."""
        if self.is_padic:
            return self.constant(self.p, trunc)
        if not 1 <= i <= self.num_vars:
            raise IndexError(f"variable index {i} out of range 1..{self.num_vars}")
        mono = tuple(1 if j == i - 1 else 0 for j in range(self.num_vars))
        return self.from_terms({mono: 1}, trunc)

    def uniformizer(self, trunc: int) -> "TruncatedElement":
        if not self.is_dvr:
            raise ValueError(f"{self.describe()} has no uniformizer (maximal ideal is not principal)")
        return self.variable(1, trunc)

    def from_terms(self, terms: Mapping[Monomial, int], trunc: int) -> "TruncatedElement":
        if self.is_padic:
            raise TypeError("Z_p elements are residues, use constant()")
        F = self.residue_field
        clean = {}
        for m, c in terms.items():
            m = tuple(m)
            if len(m) != self.num_vars:
                raise ValueError(f"monomial {m} has wrong arity for {self.describe()}")
            if sum(m) >= trunc:
                continue
            v = F.from_int(c)
            if v:
                clean[m] = F.add(clean.get(m, 0), v)
        return TruncatedElement(self, trunc, freeze_terms(clean))


@lru_cache(maxsize=None)
def _integers_mod(p: int, k: int) -> IntegersMod:
    return IntegersMod(p, k)


def variable_names(r: int) -> list[str]:
    return ["t"] if r == 1 else [f"t{i}" for i in range(1, r + 1)]


@dataclass(frozen=True)
class TruncatedElement:
    """An element of R/m^M.

    ``value`` is the residue in [0, p^M) for Z_p, and otherwise a sorted tuple
    of (monomial, coefficient) pairs with nonzero coefficients and total
    degree < M.
    """

    ring: RingDescriptor
    trunc: int
    value: Union[int, Terms]

    def _check(self, other: "TruncatedElement"):
        if self.ring != other.ring or self.trunc != other.trunc:
            raise RingMismatchError(
                f"cannot combine {self.ring.describe()} mod m^{self.trunc} "
                f"with {other.ring.describe()} mod m^{other.trunc}"
            )

    def terms(self) -> dict:
        if self.ring.is_padic:
            raise TypeError("Z_p elements have no monomial terms")
        return dict(self.value)

    def is_zero(self) -> bool:
        return not self.value

    def __bool__(self) -> bool:
        return bool(self.value)

    def __add__(self, other: "TruncatedElement") -> "TruncatedElement":
        self._check(other)
        if self.ring.is_padic:
            return TruncatedElement(self.ring, self.trunc, (self.value + other.value) % self.ring.p**self.trunc)
        if not other.value:
            return self
        if not self.value:
            return other
        s = poly_add(dict(self.value), dict(other.value), self.ring.residue_field)
        return TruncatedElement(self.ring, self.trunc, freeze_terms(s))

    def __neg__(self) -> "TruncatedElement":
        if self.ring.is_padic:
            return TruncatedElement(self.ring, self.trunc, (-self.value) % self.ring.p**self.trunc)
        F = self.ring.residue_field
        return TruncatedElement(self.ring, self.trunc, tuple((m, F.neg(c)) for m, c in self.value))

    def __sub__(self, other: "TruncatedElement") -> "TruncatedElement":
        return self + (-other)

    def __mul__(self, other: "TruncatedElement") -> "TruncatedElement":
        self._check(other)
        if self.ring.is_padic:
            return TruncatedElement(self.ring, self.trunc, (self.value * other.value) % self.ring.p**self.trunc)
        if not self.value or not other.value:
            return self.ring.zero(self.trunc)
        prod = poly_mul(dict(self.value), dict(other.value), self.ring.residue_field, self.trunc)
        return TruncatedElement(self.ring, self.trunc, freeze_terms(prod))

    def scale(self, c: int) -> "TruncatedElement":
        """Multiply by a constant from the coefficient ring."""
        if self.ring.is_padic:
            return TruncatedElement(self.ring, self.trunc, (c * self.value) % self.ring.p**self.trunc)
        F = self.ring.residue_field
        return TruncatedElement(self.ring, self.trunc, freeze_terms(poly_scale(dict(self.value), c, F)))

    def valuation(self) -> int:
        """m-adic valuation; the zero element has valuation M by convention."""
        if self.ring.is_padic:
            v = self.value
            if v == 0:
                return self.trunc
            k = 0
            while v % self.ring.p == 0:
                v //= self.ring.p
                k += 1
            return k
        if not self.value:
            return self.trunc
        return sum(self.value[0][0])

    def reduce(self, trunc: int) -> "TruncatedElement":
        """Image in R/m^trunc for trunc <= M."""
        if trunc > self.trunc:
            raise ValueError(f"cannot raise precision from {self.trunc} to {trunc}")
        if self.ring.is_padic:
            return TruncatedElement(self.ring, trunc, self.value % self.ring.p**trunc)
        return TruncatedElement(self.ring, trunc, tuple(mc for mc in self.value if sum(mc[0]) < trunc))

    def lift(self, trunc: int) -> "TruncatedElement":
        """The canonical representative viewed in R/m^trunc for trunc >= M."""
        if trunc < self.trunc:
            raise ValueError("lift() only raises precision")
        return TruncatedElement(self.ring, trunc, self.value)

    def shift(self, k: int) -> "TruncatedElement":
        """Multiply by pi^k (k >= 0) or divide exactly by pi^{-k}, pi the uniformizer.

        Division by pi^k loses k digits of precision, multiplication gains k;
        the truncation is kept at M either way, so the result is exact only
        when the caller accounts for that (see the scaled presentations).
        """
        ring = self.ring
        if not ring.is_dvr:
            raise ValueError(f"{ring.describe()} has no uniformizer")
        if k == 0 or not self.value:
            return self
        if ring.is_padic:
            mod = ring.p**self.trunc
            if k > 0:
                return TruncatedElement(ring, self.trunc, (self.value * ring.p**k) % mod)
            if self.valuation() < -k:
                raise ValueError(f"{self} is not divisible by p^{-k}")
            return TruncatedElement(ring, self.trunc, self.value // ring.p ** (-k))
        if k < 0 and self.valuation() < -k:
            raise ValueError(f"{self} is not divisible by t^{-k}")
        out = tuple(((m[0] + k,), c) for m, c in self.value if m[0] + k < self.trunc)
        return TruncatedElement(ring, self.trunc, out)

    def __str__(self) -> str:
        if self.ring.is_padic:
            return str(self.value)
        return format_terms(dict(self.value), self.ring.num_vars)

    def __repr__(self) -> str:
        return f"<{self} mod m^{self.trunc} in {self.ring.describe()}>"


def format_monomial(mono: Monomial, names: list[str]) -> str:
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def format_terms(terms: Mapping[Monomial, int], nvars: int, names: list[str] | None = None) -> str:
    if not terms:
        return "0"
    names = names or variable_names(nvars)
    out = []
    for m in sorted(terms, key=grlex_key):
        c = terms[m]
        mono = format_monomial(m, names)
        if mono == "1":
            out.append(str(c))
        elif c == 1:
            out.append(mono)
        else:
            out.append(f"{c}*{mono}")
    return " + ".join(out)


# --- Hilbert data ----------------------------------------------------------


def hilbert_function(ring: RingDescriptor, n: int) -> int:
    """H(n) = dim_{R/m} m^n / m^{n+1}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if ring.is_padic:
        return 1
    r = ring.num_vars
    return comb(n + r - 1, r - 1)


def filtration_exponent(ring: RingDescriptor, level: int, n: int) -> int:
    """f(n) = H(N) + ... + H(N+n-1), so that |(m^N)^d : (m^{N+n})^d| = q^{d f(n)}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return sum(hilbert_function(ring, i) for i in range(level, level + n))


def check_level(ring: RingDescriptor, level: int, strict_p2: bool = True) -> None:
    if level < 1:
        raise ValueError(f"level N must be >= 1, got {level}")
    if strict_p2 and ring.is_padic and ring.p == 2 and level < 2:
        raise ValueError("Z_2 presentations need level N >= 2 (pass strict_p2=False to override)")


def monomials_in_degree(r: int, deg: int) -> list[Monomial]:
    out = []
    for combo in combinations_with_replacement(range(r), deg):
        e = [0] * r
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, key=grlex_key)


def monomials_in_degree_range(ring: RingDescriptor, lo: int, hi: int) -> list[Monomial]:
    """Monomials with lo <= total degree < hi in graded-lexicographic order."""
    if ring.is_padic:
        raise ValueError("monomial enumeration applies to power series rings only")
    if not 0 <= lo <= hi:
        raise ValueError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")
    return [m for k in range(lo, hi) for m in monomials_in_degree(ring.num_vars, k)]


def add(a: TruncatedElement, b: TruncatedElement) -> TruncatedElement:
    return a + b


def negate(a: TruncatedElement) -> TruncatedElement:
    return -a


def multiply(a: TruncatedElement, b: TruncatedElement) -> TruncatedElement:
    return a * b


# --- enumeration and sampling ------------------------------------------------


def residues_between(ring: RingDescriptor, lo: int, hi: int, trunc: int) -> Iterator[TruncatedElement]:
    """All elements of m^lo / m^hi, as canonical representatives in R/m^trunc."""
    if hi > trunc:
        raise ValueError("hi must not exceed the truncation")
    if ring.is_padic:
        step = ring.p**lo
        for k in range(ring.p ** (hi - lo)):
            yield TruncatedElement(ring, trunc, k * step)
        return
    monos = monomials_in_degree_range(ring, lo, hi)
    for coeffs in product(ring.residue_field.elements(), repeat=len(monos)):
        yield TruncatedElement(ring, trunc, freeze_terms(dict(zip(monos, coeffs))))


def count_residues_between(ring: RingDescriptor, lo: int, hi: int) -> int:
    return ring.q ** filtration_exponent(ring, lo, hi - lo)


def random_element(ring: RingDescriptor, trunc: int, min_valuation: int, rng: random.Random) -> TruncatedElement:
    """Uniform element of m^min_valuation / m^trunc."""
    if ring.is_padic:
        k = rng.randrange(ring.p ** max(trunc - min_valuation, 0))
        return TruncatedElement(ring, trunc, (k * ring.p**min_valuation) % ring.p**trunc)
    monos = monomials_in_degree_range(ring, min_valuation, trunc)
    terms = {m: rng.randrange(ring.q) for m in monos}
    return ring.from_terms(terms, trunc)


def tuple_valuation(xs: Iterable[TruncatedElement]) -> int:
    return min(x.valuation() for x in xs)
