"""Closed subgroups of a standard group and their images in S/S_n.

S_n is the n-th term of the natural filtration, the points whose coordinates
all lie in m^(N+n). By the congruence property of standard groups, the coset
of a point modulo S_n is determined by its coordinates modulo m^(N+n), so the
quotient S/S_n is modelled as coordinate tuples truncated at N+n.

All logarithms are base p and exact integers: |H : H cap S_n| is a power of p.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Union

from .group_law import (
    Point,
    StandardGroupPresentation,
    inverse_unchecked,
    multiply_unchecked,
)
from .linalg import minors, row_reduce, span_log_size_mod_pk
from .ring_core import (
    TruncatedElement,
    count_residues_between,
    filtration_exponent,
    freeze_terms,
    monomials_in_degree_range,
    residues_between,
)


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the element budget."""

    def __init__(self, what: str, needed: int | None, budget: int):
        self.what = what
        self.needed = needed
        self.budget = budget
        size = f"{needed}" if needed is not None else f"more than {budget}"
        super().__init__(f"{what}: {size} elements exceed budget {budget}")


class NotASubgroupError(ValueError):
    """The described set is not closed under the group law."""


class IndeterminateRankError(ValueError):
    """The truncated rank had not stabilized at the working precision."""


DEFAULT_BUDGET = 1 << 20


# --- specs -------------------------------------------------------------------


@dataclass(frozen=True)
class Generated:
    """Closed subgroup topologically generated by finitely many points.

    Over F_q[[t]] with an abelian law such subgroups are finite; use
    ModuleSpan for R-submodules.
    """

    gens: tuple[Point, ...] = ()


@dataclass(frozen=True)
class ModuleSpan:
    """The R-span W of coordinate vectors, all coordinates of valuation >= N."""

    gens: tuple[Point, ...]


@dataclass(frozen=True)
class ValuationSet:
    """Closed additive subgroup {sum c_a t^a : a in A} of one coordinate of F_q[[t]].

    Bits are indexed by exponent starting at 0: exponent i is in A when
    ``preperiod[i]`` is set (i < len(preperiod)) or, past the preperiod, when
    the matching bit of ``period`` is set. Exponents below the level are
    ignored.
    """

    period: tuple[int, ...]
    preperiod: tuple[int, ...] = ()
    coordinate: int = 1

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(b not in (0, 1) for b in self.period + self.preperiod):
            raise ValueError("bits must be 0 or 1")

    def contains(self, i: int) -> bool:
        if i < len(self.preperiod):
            return bool(self.preperiod[i])
        return bool(self.period[(i - len(self.preperiod)) % len(self.period)])

    def exponents(self, lo: int, hi: int) -> list[int]:
        return [i for i in range(lo, hi) if self.contains(i)]

    @property
    def density(self) -> Fraction:
        return Fraction(sum(self.period), len(self.period))


SubgroupSpec = Union[Generated, ModuleSpan, ValuationSet]


def spec_kind(spec: SubgroupSpec) -> str:
    return {Generated: "generated", ModuleSpan: "module_span", ValuationSet: "valuation_set"}[type(spec)]


def check_spec(S: StandardGroupPresentation, spec: SubgroupSpec) -> None:
    """Validate a spec against a presentation; raises ValueError."""
    if isinstance(spec, (Generated, ModuleSpan)):
        if isinstance(spec, ModuleSpan) and not spec.gens:
            raise ValueError("ModuleSpan needs at least one generator")
        for g in spec.gens:
            S.check_point(g)
    elif isinstance(spec, ValuationSet):
        if S.ring.is_padic or S.ring.num_vars != 1:
            raise ValueError("valuation sets live in F_q[[t]] (one variable)")
        if not 1 <= spec.coordinate <= S.d:
            raise ValueError(f"coordinate {spec.coordinate} out of range 1..{S.d}")
    else:
        raise TypeError(f"unknown subgroup spec {spec!r}")


# --- points ----------------------------------------------------------------------


def reduce_point(x: Point, trunc: int) -> Point:
    return tuple(c.reduce(trunc) for c in x)


def point_key(x: Point):
    return tuple(c.value for c in x)


def point_valuation(x: Point) -> int:
    return min(c.valuation() for c in x)


def format_point(x: Point) -> str:
    return "(" + ", ".join(str(c) for c in x) + ")"


# --- quotients -------------------------------------------------------------------


class QuotientGroup:
    """S/S_n with canonical representatives: coordinates in m^N / m^(N+n)."""

    def __init__(self, S: StandardGroupPresentation, n: int, elements: list[Point]):
        self.S = S
        self.n = n
        self.precision = S.level + n
        self.elements = elements
        self._members = set(elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: Point) -> bool:
        return x in self._members

    def __iter__(self):
        return iter(self.elements)

    def identity(self) -> Point:
        return tuple(self.S.ring.zero(self.precision) for _ in range(self.S.d))

    def project(self, x: Point) -> Point:
        """Image of a point of S (at any precision >= N+n) in the quotient."""
        return reduce_point(x, self.precision)

    def multiply(self, x: Point, y: Point) -> Point:
        return multiply_unchecked(self.S, x, y)

    def inverse(self, x: Point) -> Point:
        return inverse_unchecked(self.S, x)


def _check_steps(S: StandardGroupPresentation, n: int) -> None:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > S.max_steps:
        raise ValueError(f"n = {n} needs working precision M > N + n = {S.level + n}; have M = {S.trunc}")


def quotient_order_log(S: StandardGroupPresentation, n: int) -> int:
    """log_p |S : S_n| = d f(n) log_p q."""
    return S.d * filtration_exponent(S.ring, S.level, n) * S.ring.s


def quotient_group(S: StandardGroupPresentation, n: int, budget: int = DEFAULT_BUDGET) -> QuotientGroup:
    """Enumerate S/S_n; it has q^(d f(n)) elements."""
    _check_steps(S, n)
    K = S.level + n
    size = count_residues_between(S.ring, S.level, K) ** S.d
    if size > budget:
        raise BudgetExceeded(f"quotient S/S_{n}", size, budget)
    coords = list(residues_between(S.ring, S.level, K, K))
    elements = [tuple(x) for x in product(coords, repeat=S.d)]
    return QuotientGroup(S, n, elements)


# --- image sets --------------------------------------------------------------------


def _bfs_closure(start: Point, gens: list[Point], mul, budget: int, what: str) -> set[Point]:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = mul(g, x)
            if y not in seen:
                seen.add(y)
                if len(seen) > budget:
                    raise BudgetExceeded(what, None, budget)
                queue.append(y)
    return seen


def _generated_image(S: StandardGroupPresentation, spec: Generated, n: int, budget: int) -> set[Point]:
    K = S.level + n
    e = tuple(S.ring.zero(K) for _ in range(S.d))
    gens = []
    for g in spec.gens:
        gk = reduce_point(g, K)
        for h in (gk, inverse_unchecked(S, gk)):
            if h != e and h not in gens:
                gens.append(h)
    return _bfs_closure(e, gens, lambda a, b: multiply_unchecked(S, a, b), budget, f"image of generated subgroup at n={n}")


def _module_rows(S: StandardGroupPresentation, spec: ModuleSpan, n: int) -> list[dict]:
    """F_q-spanning vectors of W mod m^(N+n): monomial multiples of the generators."""
    K = S.level + n
    ring = S.ring
    mults = monomials_in_degree_range(ring, 0, n)
    rows = []
    for g in spec.gens:
        for mu in mults:
            mu_el = ring.from_terms({mu: 1}, K)
            row = {}
            for j, c in enumerate(g):
                for mono, v in (mu_el * c.reduce(K)).value:
                    row[(j, mono)] = v
            if row:
                rows.append(row)
    return rows


def _module_columns(S: StandardGroupPresentation, n: int) -> list:
    # degree-major, so each reduced row's pivot is its leading (lowest-degree) term
    monos = monomials_in_degree_range(S.ring, S.level, S.level + n)
    return [(j, m) for m in monos for j in range(S.d)]


def _row_to_point(S: StandardGroupPresentation, row: dict, K: int) -> Point:
    coords = [dict() for _ in range(S.d)]
    for (j, mono), v in row.items():
        coords[j][mono] = v
    return tuple(TruncatedElement(S.ring, K, freeze_terms(c)) for c in coords)


def _padic_rows(S: StandardGroupPresentation, spec: ModuleSpan, n: int) -> list[list[int]]:
    K = S.level + n
    return [[c.reduce(K).value for c in g] for g in spec.gens]


def _module_image(S: StandardGroupPresentation, spec: ModuleSpan, n: int, budget: int) -> set[Point]:
    K = S.level + n
    ring = S.ring
    if ring.is_padic:
        mod = ring.p**K
        gens = [tuple(TruncatedElement(ring, K, v % mod) for v in row) for row in _padic_rows(S, spec, n)]
        e = tuple(ring.zero(K) for _ in range(S.d))
        add = lambda a, b: tuple(x + y for x, y in zip(a, b))
        return _bfs_closure(e, gens, add, budget, f"image of module span at n={n}")
    F = ring.residue_field
    basis = row_reduce(_module_rows(S, spec, n), F, _module_columns(S, n))
    size = ring.q ** len(basis)
    if size > budget:
        raise BudgetExceeded(f"image of module span at n={n}", size, budget)
    cols = _module_columns(S, n)
    span = [tuple([0] * len(cols))]
    for b in basis:
        dense = [b.get(col, 0) for col in cols]
        grown = list(span)
        for c in F.elements():
            if c:
                cb = [F.mul(c, v) for v in dense]
                grown.extend(tuple(F.add(x, y) for x, y in zip(v, cb)) for v in span)
        span = grown
    return {_row_to_point(S, {col: v for col, v in zip(cols, vec) if v}, K) for vec in span}


def _valuation_image(S: StandardGroupPresentation, spec: ValuationSet, n: int, budget: int) -> set[Point]:
    K = S.level + n
    ring = S.ring
    exps = spec.exponents(S.level, K)
    size = ring.q ** len(exps)
    if size > budget:
        raise BudgetExceeded(f"image of valuation set at n={n}", size, budget)
    zero = ring.zero(K)
    out = set()
    for coeffs in product(ring.residue_field.elements(), repeat=len(exps)):
        x = ring.from_terms({(a,): c for a, c in zip(exps, coeffs)}, K)
        out.add(tuple(x if j == spec.coordinate - 1 else zero for j in range(S.d)))
    return out


def image_set(S: StandardGroupPresentation, spec: SubgroupSpec, n: int, budget: int = DEFAULT_BUDGET) -> set[Point]:
    """The image of H in S/S_n as a set of canonical coordinate tuples."""
    _check_steps(S, n)
    check_spec(S, spec)
    if isinstance(spec, Generated):
        return _generated_image(S, spec, n, budget)
    if isinstance(spec, ModuleSpan):
        return _module_image(S, spec, n, budget)
    return _valuation_image(S, spec, n, budget)


def _exact_log(size: int, p: int) -> int:
    k = 0
    while size > 1:
        if size % p:
            raise AssertionError(f"subgroup order {size} is not a power of {p}")
        size //= p
        k += 1
    return k


def _log_index(S: StandardGroupPresentation, spec: SubgroupSpec, n: int, budget: int) -> int:
    if isinstance(spec, Generated):
        return _exact_log(len(_generated_image(S, spec, n, budget)), S.ring.p)
    if isinstance(spec, ModuleSpan):
        if S.ring.is_padic:
            return span_log_size_mod_pk(_padic_rows(S, spec, n), S.ring.p, S.level + n)
        basis = row_reduce(_module_rows(S, spec, n), S.ring.residue_field, _module_columns(S, n))
        return len(basis) * S.ring.s
    return len(spec.exponents(S.level, S.level + n)) * S.ring.s


def image_log_index(S: StandardGroupPresentation, spec: SubgroupSpec, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """log_p |H : H cap S_n|, the log-size of the image of H in S/S_n.

    Generated uses a breadth-first closure in the quotient; ModuleSpan uses
    F_q-row reduction (power series) or diagonalization over Z/p^(N+n) (Z_p);
    ValuationSet counts exponents.

    ModuleSpan and ValuationSet name a coordinate set, which is a subgroup
    automatically only for the additive law. Under any other law the pair
    (S, spec) must first pass verify_subgroup or ensure_subgroup.
    """
    _check_steps(S, n)
    check_spec(S, spec)
    if needs_verification(S, spec) and (S, spec) not in _VERIFIED:
        raise NotASubgroupError(
            f"{spec_kind(spec)} under the {S.law.describe()} law is not known to be a subgroup; run verify_subgroup first"
        )
    return _log_index(S, spec, n, budget)


# --- verification ------------------------------------------------------------------


@dataclass(frozen=True)
class Counterexample:
    x: Point
    y: Point | None  # None for an inverse failure
    result: Point

    def __str__(self) -> str:
        if self.y is None:
            return f"inverse of {format_point(self.x)} is {format_point(self.result)}, outside the set"
        return f"{format_point(self.x)} * {format_point(self.y)} = {format_point(self.result)}, outside the set"


_VERIFIED: set = set()


def needs_verification(S: StandardGroupPresentation, spec: SubgroupSpec) -> bool:
    if isinstance(spec, Generated):
        return False
    return not (S.law.is_additive and not S.scale)


def _filtered_basis(S: StandardGroupPresentation, spec: SubgroupSpec, n: int) -> list[Point] | None:
    """F_p-basis of the image whose leading terms are independent, or None."""
    ring = S.ring
    if ring.is_padic:
        return None
    K = S.level + n
    scalars = ring.residue_field.prime_basis()
    F = ring.residue_field
    out = []
    if isinstance(spec, ModuleSpan):
        for row in row_reduce(_module_rows(S, spec, n), F, _module_columns(S, n)):
            for c in scalars:
                out.append(_row_to_point(S, {col: F.mul(c, v) for col, v in row.items()}, K))
        return out
    if isinstance(spec, ValuationSet):
        zero = ring.zero(K)
        for a in spec.exponents(S.level, K):
            for c in scalars:
                x = ring.from_terms({(a,): c}, K)
                out.append(tuple(x if j == spec.coordinate - 1 else zero for j in range(S.d)))
        return out
    return None


def verification_cost(S: StandardGroupPresentation, spec: SubgroupSpec, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Number of law evaluations verify_subgroup performs at step n."""
    if not needs_verification(S, spec):
        return 0
    log = _log_index(S, spec, n, budget)
    if log == quotient_order_log(S, n):
        return 0  # the whole quotient
    size = S.ring.p**log
    basis = _filtered_basis(S, spec, n)
    return size * len(basis) if basis is not None else size * (size + 1)


def _pairwise_check(S, ordered: list[Point], X: set[Point]) -> Counterexample | None:
    for x in ordered:
        for y in ordered:
            z = multiply_unchecked(S, x, y)
            if z not in X:
                return Counterexample(x, y, z)
    for x in ordered:
        xi = inverse_unchecked(S, x)
        if xi not in X:
            return Counterexample(x, None, xi)
    return None


def _basis_closure_check(S, basis: list[Point], X: set[Point], K: int) -> tuple[Counterexample | None, int]:
    """Grow the closure of ``basis`` inside X; returns (violation, closure size)."""
    e = tuple(S.ring.zero(K) for _ in range(S.d))
    seen = {e}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for b in basis:
            z = multiply_unchecked(S, x, b)
            if z not in X:
                return Counterexample(x, b, z), len(seen)
            if z not in seen:
                seen.add(z)
                queue.append(z)
    return None, len(seen)


def verify_subgroup(S: StandardGroupPresentation, spec: SubgroupSpec, n: int, budget: int = DEFAULT_BUDGET) -> Counterexample | None:
    """Check the image of ``spec`` in S/S_n is closed under the law and inversion.

    Returns None when it is a subgroup, else the first violation in canonical
    order. Generated specs are subgroups by construction and coordinate sets
    are subgroups of the additive law.

    For power series rings the closure of a basis of X with independent
    leading terms is grown by right multiplication; X is a subgroup exactly
    when no product leaves X and the closure reaches |X| elements. Other
    cases fall back to checking all pairs.
    """
    _check_steps(S, n)
    check_spec(S, spec)
    if not needs_verification(S, spec):
        return None
    cost = verification_cost(S, spec, n, budget)
    if cost > budget:
        raise BudgetExceeded(f"closure check at n={n}", cost, budget)
    if cost == 0:
        _VERIFIED.add((S, spec))
        return None
    X = image_set(S, spec, n, budget)
    ordered = sorted(X, key=point_key)
    basis = _filtered_basis(S, spec, n)
    if basis is None:
        found = _pairwise_check(S, ordered, X)
    else:
        found, size = _basis_closure_check(S, basis, X, S.level + n)
        if found is None and size != len(X):
            found = _pairwise_check(S, ordered, X)
            if found is None:
                raise AssertionError("closure of a filtered basis is smaller than a closed set")
    if found is None:
        _VERIFIED.add((S, spec))
    return found


def ensure_subgroup(S: StandardGroupPresentation, spec: SubgroupSpec, n_max: int, budget: int = 1 << 16) -> int | None:
    """Verify ``spec`` at the largest step n <= n_max whose check fits the budget.

    Returns that step (None when no check is needed) and raises
    NotASubgroupError with the counterexample otherwise. Closure at step n
    implies closure at every smaller step.
    """
    check_spec(S, spec)
    if not needs_verification(S, spec):
        return None
    top = min(n_max, S.max_steps)
    n = 1
    for k in range(1, top + 1):
        if verification_cost(S, spec, k) > budget:
            break
        n = k
    found = verify_subgroup(S, spec, n, max(budget, verification_cost(S, spec, n)))
    if found is not None:
        raise NotASubgroupError(f"not a subgroup at n={n}: {found}")
    return n


# --- rank ------------------------------------------------------------------------------


def truncated_ranks(S: StandardGroupPresentation, spec: ModuleSpan) -> list[int]:
    """rank_k for k = 0..M: the largest size of a minor of the generator matrix
    that is nonzero mod m^k. Nondecreasing in k; equals the K-rank for large k."""
    M = S.trunc
    mat = [list(g) for g in spec.gens]
    zero, one = S.ring.zero(M), S.ring.one(M)
    min_val = {0: 0}
    for k in range(1, min(len(mat), S.d) + 1):
        min_val[k] = min((m.valuation() for m in minors(mat, k, zero, one)), default=M)
    return [max(k for k, v in min_val.items() if v < prec or k == 0) for prec in range(M + 1)]


def kspan_rank(S: StandardGroupPresentation, spec: ModuleSpan) -> int:
    """Dimension e of the K-span of the generators (K the fraction field of R).

    Stabilization of the truncated rank at the last two precisions is required.
    """
    if not isinstance(spec, ModuleSpan):
        raise TypeError("kspan_rank applies to ModuleSpan specs")
    check_spec(S, spec)
    ranks = truncated_ranks(S, spec)
    if ranks[-1] != ranks[-2]:
        raise IndeterminateRankError(f"rank not stabilized at M = {S.trunc} ({ranks[-2]} -> {ranks[-1]}); raise M")
    return ranks[-1]


# --- oracle ---------------------------------------------------------------------------


def _pair_closure(Q: QuotientGroup, start: Iterable[Point], budget: int) -> set[Point]:
    """Smallest set containing ``start`` closed under products, by semi-naive iteration."""
    known: set[Point] = set()
    frontier = set(start)
    while frontier:
        new = set()
        old = list(known)
        fresh = list(frontier)
        known |= frontier
        for x in fresh:
            for y in fresh + old:
                for z in (Q.multiply(x, y), Q.multiply(y, x)):
                    if z not in Q:
                        raise AssertionError(f"product {format_point(z)} left the quotient carrier")
                    if z not in known:
                        new.add(z)
        if len(known) + len(new) > budget:
            raise BudgetExceeded("oracle closure", None, budget)
        frontier = new
    return known


def _additive_closure(Q: QuotientGroup, gens: list[Point], budget: int) -> set[Point]:
    e = Q.identity()
    add = lambda a, b: tuple(x + y for x, y in zip(a, b))
    return _bfs_closure(e, [g for g in gens if g != e], add, budget, "oracle span closure")


def bruteforce_oracle(S: StandardGroupPresentation, spec: SubgroupSpec, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """log_p of the image size computed extensionally in the materialized quotient.

    Generated: closure of the generator images under all pairwise products.
    ModuleSpan: explicit additive closure of scalar and monomial multiples.
    ValuationSet: membership filter over every element of S/S_n.
    """
    check_spec(S, spec)
    Q = quotient_group(S, n, budget)
    ring = S.ring
    K = Q.precision
    if isinstance(spec, Generated):
        start = {Q.identity()}
        for g in spec.gens:
            gk = Q.project(g)
            start.add(gk)
            start.add(Q.inverse(gk))
        image = _pair_closure(Q, start, budget)
    elif isinstance(spec, ModuleSpan):
        if ring.is_padic:
            gens = [Q.project(g) for g in spec.gens]
        else:
            gens = []
            for g in spec.gens:
                for mu in monomials_in_degree_range(ring, 0, n):
                    for c in ring.residue_field.prime_basis():
                        m = ring.from_terms({mu: c}, K)
                        gens.append(tuple(m * x.reduce(K) for x in g))
        image = _additive_closure(Q, gens, budget)
        if not image <= Q._members:
            raise AssertionError("span closure left the quotient carrier")
    else:
        j = spec.coordinate - 1
        image = set()
        for x in Q:
            if any(c for i, c in enumerate(x) if i != j):
                continue
            if all(spec.contains(mono[0]) for mono, _ in x[j].value):
                image.add(x)
    return _exact_log(len(image), ring.p)


__all__ = [
    "BudgetExceeded",
    "Counterexample",
    "DEFAULT_BUDGET",
    "Generated",
    "IndeterminateRankError",
    "ModuleSpan",
    "NotASubgroupError",
    "QuotientGroup",
    "SubgroupSpec",
    "ValuationSet",
    "bruteforce_oracle",
    "check_spec",
    "ensure_subgroup",
    "image_log_index",
    "image_set",
    "kspan_rank",
    "needs_verification",
    "quotient_group",
    "quotient_order_log",
    "verify_subgroup",
]
