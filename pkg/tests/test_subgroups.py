from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stdhdim.group_law import StandardGroupPresentation, builtin_law
from stdhdim.ring_core import RingDescriptor, filtration_exponent
from stdhdim.subgroups import (
    BudgetExceeded,
    Generated,
    IndeterminateRankError,
    ModuleSpan,
    NotASubgroupError,
    ValuationSet,
    bruteforce_oracle,
    ensure_subgroup,
    image_log_index,
    image_set,
    kspan_rank,
    needs_verification,
    quotient_group,
    quotient_order_log,
    verify_subgroup,
)

F2 = RingDescriptor.power_series(2)
F2xy = RingDescriptor.power_series(2, num_vars=2)
F4 = RingDescriptor.power_series(2, 4)
Z3 = RingDescriptor.padic(3)


def group(name="additive", ring=F2, d=1, N=1, M=10):
    return StandardGroupPresentation(ring, d, N, builtin_law(name, ring, d, M), M)


def pt(ring, M, *coords):
    """Coordinates as {exponent: coeff} dicts (power series) or ints (Z_p)."""
    out = []
    for c in coords:
        if ring.is_padic:
            out.append(ring.constant(c, M))
        else:
            out.append(ring.from_terms({(k,) if isinstance(k, int) else k: v for k, v in c.items()}, M))
    return tuple(out)


T = {1: 1}
T2 = {2: 1}
O = {}


# --- quotients ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "S,n,size",
    [
        (group(), 3, 8),
        (group("heisenberg", d=3), 2, 64),
        (group(ring=F2xy), 2, 32),
        (group(ring=F4), 2, 16),
        (group(ring=Z3, d=2), 2, 81),
    ],
)
def test_quotient_sizes(S, n, size):
    Q = quotient_group(S, n)
    assert len(Q) == size == S.ring.p ** quotient_order_log(S, n)


def test_quotient_budget():
    with pytest.raises(BudgetExceeded):
        quotient_group(group("heisenberg", d=3), 4, budget=1000)


def test_quotient_operation_is_well_defined():
    # the law mod m^(N+n) does not depend on the representatives
    S = group("heisenberg", d=3, M=6)
    Q = quotient_group(S, 2)
    rng = random.Random(0)
    for _ in range(100):
        x, y = S.random_point(rng), S.random_point(rng)
        dx, dy = S.random_point(rng, 3), S.random_point(rng, 3)
        x2 = tuple(a + b for a, b in zip(x, dx))
        y2 = tuple(a + b for a, b in zip(y, dy))
        assert Q.project(S.multiply(x, y)) == Q.project(S.multiply(x2, y2))
        assert Q.multiply(Q.project(x), Q.project(y)) == Q.project(S.multiply(x, y))
        assert Q.inverse(Q.project(x)) == Q.project(S.inverse(x))


def test_congruence_on_heisenberg_quotient():
    S = group("heisenberg", d=3, M=6)
    Q = quotient_group(S, 2)
    for x, y in product(Q, repeat=2):
        z = Q.multiply(x, Q.inverse(y))
        for k in range(3):
            in_filtration = all(c.valuation() >= S.level + k for c in z)
            congruent = all((a - b).valuation() >= S.level + k for a, b in zip(x, y))
            assert in_filtration == congruent


# --- image indices -------------------------------------------------------------------


def test_heisenberg_center_as_module_span():
    S = group("heisenberg", d=3, M=12)
    center = ModuleSpan((pt(F2, 12, O, O, T),))
    ensure_subgroup(S, center, 8)
    assert [image_log_index(S, center, n) for n in range(1, 9)] == list(range(1, 9))


def test_single_central_generator_is_finite_in_char_2():
    # (0, 0, t) has order 2: the closed subgroup it generates is {1, (0, 0, t)}
    S = group("heisenberg", d=3, M=12)
    g = Generated((pt(F2, 12, O, O, T),))
    assert [image_log_index(S, g, n) for n in range(1, 6)] == [1] * 5
    assert [bruteforce_oracle(S, g, n) for n in range(1, 4)] == [1] * 3


def test_diagonal_line_additive():
    S = group(d=2, M=12)
    diag = ModuleSpan((pt(F2, 12, T, T),))
    assert [image_log_index(S, diag, n) for n in range(1, 9)] == list(range(1, 9))


def test_valuation_set_count():
    S = group(N=2, M=10)
    evens = ValuationSet((1, 0))
    assert image_log_index(S, evens, 4) == 2
    assert sorted(evens.exponents(2, 6)) == [2, 4]


def test_valuation_set_over_f4_counts_s():
    S = group(ring=F4, M=10)
    assert image_log_index(S, ValuationSet((1, 0)), 4) == 2 * 2


def test_padic_module_span_diagonalization():
    S = group(ring=Z3, d=2, M=10)
    spec = ModuleSpan((pt(Z3, 10, 3, 9), pt(Z3, 10, 9, 0)))
    fast = [image_log_index(S, spec, n) for n in range(1, 5)]
    assert fast == [bruteforce_oracle(S, spec, n) for n in range(1, 5)]
    # the generator matrix has determinant -81, of valuation 4, so the index in (3Z_3)^2 stabilizes
    assert [2 * n - image_log_index(S, spec, n) for n in range(3, 8)] == [2, 2, 2, 2, 2]


def test_multivariable_module_span():
    S = group(ring=F2xy, M=6)
    spec = ModuleSpan((pt(F2xy, 6, {(1, 0): 1}),))  # the ideal (t1)
    for n in range(1, 4):
        # t1 * (monomials of degree < n) spans degrees 1..n except pure t2 powers
        expected = sum(k for k in range(1, n + 1))
        assert image_log_index(S, spec, n) == expected == bruteforce_oracle(S, spec, n)


def test_full_and_trivial_oracle():
    S = group("heisenberg", d=3, M=8)
    full = ModuleSpan((pt(F2, 8, T, O, O), pt(F2, 8, O, T, O), pt(F2, 8, O, O, T)))
    ensure_subgroup(S, full, 3)
    for n in range(1, 3):
        assert bruteforce_oracle(S, full, n) == 3 * filtration_exponent(F2, 1, n) == image_log_index(S, full, n)
        assert bruteforce_oracle(S, Generated(()), n) == 0 == image_log_index(S, Generated(()), n)


def test_center_oracle_n3():
    S = group("heisenberg", d=3, M=8)
    center = ModuleSpan((pt(F2, 8, O, O, T),))
    assert bruteforce_oracle(S, center, 3) == 3


def test_generated_heisenberg_dihedral():
    # (t,0,0) and (0,t,0) generate a dihedral group of order 8 modulo S_n, n >= 2
    S = group("heisenberg", d=3, M=10)
    g = Generated((pt(F2, 10, T, O, O), pt(F2, 10, O, T, O)))
    assert [image_log_index(S, g, n) for n in range(1, 5)] == [2, 3, 3, 3]
    assert [bruteforce_oracle(S, g, n) for n in range(1, 5)] == [2, 3, 3, 3]


def test_generated_multiplicative_is_procyclic():
    # 1 + t generates a group whose image mod t^(n+1) has order the next power of 2 above n
    S = group("multiplicative", M=14)
    g = Generated((pt(F2, 14, T),))
    for n in range(1, 10):
        assert 2 ** image_log_index(S, g, n) == 1 << n.bit_length()


def test_image_budget():
    S = group(d=3, M=12)
    full = ModuleSpan((pt(F2, 12, T, O, O), pt(F2, 12, O, T, O), pt(F2, 12, O, O, T)))
    with pytest.raises(BudgetExceeded):
        image_set(S, full, 8, budget=1 << 10)
    assert image_log_index(S, full, 8, budget=1 << 10) == 24  # rank path does not enumerate


# --- verification --------------------------------------------------------------------


def test_verify_xz_plane_ok():
    S = group("heisenberg", d=3, M=8)
    assert verify_subgroup(S, ModuleSpan((pt(F2, 8, T, O, O), pt(F2, 8, O, O, T))), 3) is None


def test_verify_xy_plane_counterexample():
    S = group("heisenberg", d=3, M=8)
    found = verify_subgroup(S, ModuleSpan((pt(F2, 8, T, O, O), pt(F2, 8, O, T, O))), 3)
    assert found is not None
    assert str(found) == "(t, 0, 0) * (0, t, 0) = (t, t, t^2), outside the set"


def test_verify_additive_always_ok():
    S = group(d=2, M=8)
    spec = ModuleSpan((pt(F2, 8, T, {1: 1, 3: 1}),))
    assert not needs_verification(S, spec)
    assert verify_subgroup(S, spec, 3) is None


def test_verify_valuation_set_multiplicative():
    S = group("multiplicative", M=10)
    assert verify_subgroup(S, ValuationSet((1, 0)), 5) is None  # F_2[[t^2]] is a subring
    assert verify_subgroup(S, ValuationSet((1, 1, 0)), 5) is not None


def test_verify_padic_pairwise():
    S = group("multiplicative*additive(1)", ring=Z3, d=2, M=8)
    assert verify_subgroup(S, ModuleSpan((pt(Z3, 8, 3, 0),)), 3) is None
    assert verify_subgroup(S, ModuleSpan((pt(Z3, 8, 3, 9),)), 3) is not None


def test_guard_requires_verification():
    S = group("heisenberg", d=3, M=11)
    spec = ModuleSpan((pt(F2, 11, O, O, T2),))
    with pytest.raises(NotASubgroupError):
        image_log_index(S, spec, 3)
    assert ensure_subgroup(S, spec, 6) == 6
    assert image_log_index(S, spec, 3) == 2


def test_ensure_subgroup_rejects():
    S = group("heisenberg", d=3, M=9)
    with pytest.raises(NotASubgroupError, match="outside the set"):
        ensure_subgroup(S, ModuleSpan((pt(F2, 9, T, O, O), pt(F2, 9, O, T, O))), 6)


# --- K-rank ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "gens,e",
    [
        ([(T, T)], 1),
        ([(T, O), (O, T), (T, T)], 2),
        ([(T, T2), (T2, {3: 1})], 1),
        ([(T, O), (T2, {5: 1})], 2),
        ([(O, {7: 1})], 1),
    ],
)
def test_kspan_rank(gens, e):
    S = group(d=2, M=10)
    assert kspan_rank(S, ModuleSpan(tuple(pt(F2, 10, *g) for g in gens))) == e


def test_kspan_rank_padic():
    S = group(ring=Z3, d=2, M=8)
    assert kspan_rank(S, ModuleSpan((pt(Z3, 8, 3, 6), pt(Z3, 8, 6, 12)))) == 1
    assert kspan_rank(S, ModuleSpan((pt(Z3, 8, 3, 6), pt(Z3, 8, 6, 3)))) == 2


def test_kspan_rank_indeterminate():
    # the 2x2 minor t^9 only becomes nonzero at the last precision
    S = group(d=2, M=10)
    spec = ModuleSpan((pt(F2, 10, T, O), pt(F2, 10, O, {8: 1})))
    with pytest.raises(IndeterminateRankError):
        kspan_rank(S, spec)


def test_bracketing_module_span():
    # e * f(n) - C <= log_q |image| <= e * f(n): the index tracks e * n up to a constant
    S = group(d=3, M=14)
    spec = ModuleSpan((pt(F2, 14, T2, O, {3: 1}), pt(F2, 14, O, {4: 1}, O)))
    e = kspan_rank(S, spec)
    gaps = [e * n - image_log_index(S, spec, n) for n in range(1, 13)]
    assert e == 2
    assert all(0 <= g <= 4 for g in gaps)
    assert gaps[-1] == gaps[-2] == gaps[-3]


# --- properties ---------------------------------------------------------------------


def random_module_span(rng, ring, d, M, count):
    gens = []
    for _ in range(count):
        g = tuple(ring.from_terms({(k,): rng.randrange(ring.q) for k in range(1, 4) if rng.random() < 0.5}, M) for _ in range(d))
        if all(c.is_zero for c in g):
            g = (ring.from_terms({(1,): 1}, M),) + g[1:]
        gens.append(g)
    return ModuleSpan(tuple(gens))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([F2, F4, RingDescriptor.power_series(3)]), st.integers(1, 2), st.integers(1, 3))
def test_oracle_equivalence_module_span(seed, ring, d, count):
    rng = random.Random(seed)
    M = 8
    S = group(ring=ring, d=d, M=M)
    spec = random_module_span(rng, ring, d, M, count)
    for n in range(1, 4 if ring.q * d < 6 else 3):
        assert image_log_index(S, spec, n) == bruteforce_oracle(S, spec, n)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["additive", "multiplicative"]), st.integers(1, 2))
def test_oracle_equivalence_generated(seed, law, count):
    rng = random.Random(seed)
    S = group(law, M=8)
    spec = Generated(tuple(S.random_point(rng) for _ in range(count)))
    for n in range(1, 5):
        assert image_log_index(S, spec, n) == bruteforce_oracle(S, spec, n)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=4), st.lists(st.integers(0, 1), max_size=3), st.integers(1, 3))
def test_oracle_equivalence_valuation_set(period, pre, N):
    S = group(N=N, M=N + 7)
    spec = ValuationSet(tuple(period), tuple(pre))
    for n in range(1, 6):
        assert image_log_index(S, spec, n) == bruteforce_oracle(S, spec, n)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_index_monotone_and_bounded(seed):
    rng = random.Random(seed)
    S = group(d=2, M=10)
    spec = random_module_span(rng, F2, 2, 10, 2)
    logs = [image_log_index(S, spec, n) for n in range(1, 9)]
    assert logs == sorted(logs)
    assert all(h <= quotient_order_log(S, n) for n, h in enumerate(logs, 1))
