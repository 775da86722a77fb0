from __future__ import annotations

import random
from itertools import product
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stdhdim.fields import GaloisField, IntegersMod, irreducible_polynomial
from stdhdim.ring_core import (
    RingDescriptor,
    RingMismatchError,
    add,
    check_level,
    count_residues_between,
    filtration_exponent,
    hilbert_function,
    monomials_in_degree_range,
    multiply,
    negate,
    random_element,
    residues_between,
)

F2 = RingDescriptor.power_series(2)
F2xy = RingDescriptor.power_series(2, num_vars=2)
Z2 = RingDescriptor.padic(2)
Z3 = RingDescriptor.padic(3)


def t(ring, terms, M):
    return ring.from_terms(terms, M)


# --- finite fields --------------------------------------------------------------


@pytest.mark.parametrize("p,s", [(2, 2), (2, 3), (3, 2), (3, 3), (5, 2)])
def test_galois_field_axioms_exhaustive(p, s):
    F = GaloisField(p, s)
    q = p**s
    els = list(F.elements())
    assert len(els) == q
    for a in els:
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
    # multiplicative group is cyclic of order q - 1: some element has full order
    orders = []
    for a in els[1:]:
        k, x = 1, a
        while x != 1:
            x = F.mul(x, a)
            k += 1
        orders.append(k)
    assert max(orders) == q - 1
    rng = random.Random(p * 10 + s)
    for _ in range(200):
        a, b, c = (rng.randrange(q) for _ in range(3))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))


def test_irreducible_table_has_no_roots():
    for p, s in [(2, 2), (2, 3), (3, 2), (3, 3), (7, 3)]:
        coeffs = irreducible_polynomial(p, s)
        assert len(coeffs) == s + 1 and coeffs[-1] == 1
        assert all(sum(c * a**i for i, c in enumerate(coeffs)) % p for a in range(p))


def test_extension_degree_above_three_rejected():
    with pytest.raises(ValueError):
        GaloisField(2, 4)


def test_integers_mod():
    R = IntegersMod(2, 3)
    assert R.mul(3, 3) == 1
    assert R.is_unit(3) and not R.is_unit(2)
    assert R.mul(5, R.inv(5)) == 1


# --- descriptors ---------------------------------------------------------------


def test_descriptor_validation():
    with pytest.raises(ValueError):
        RingDescriptor.padic(4)
    with pytest.raises(ValueError):
        RingDescriptor.power_series(2, q=6)
    with pytest.raises(ValueError):
        RingDescriptor.power_series(2, num_vars=0)
    assert RingDescriptor.power_series(3, q=9).s == 2


# --- Hilbert data ----------------------------------------------------------------


def test_hilbert_function_examples():
    assert hilbert_function(RingDescriptor.padic(3), 5) == 1
    assert hilbert_function(F2, 0) == 1
    assert hilbert_function(F2xy, 3) == 4


def test_filtration_exponent_examples():
    assert filtration_exponent(F2, 1, 4) == 4
    assert filtration_exponent(F2xy, 7, 0) == 0
    assert filtration_exponent(Z3, 2, 0) == 0
    assert filtration_exponent(F2xy, 1, 3) == 9


@pytest.mark.parametrize("r", [1, 2, 3])
def test_hilbert_function_counts_monomials(r):
    ring = RingDescriptor.power_series(2, num_vars=r)
    for n in range(7):
        brute = sum(1 for e in product(range(n + 1), repeat=r) if sum(e) == n)
        assert hilbert_function(ring, n) == brute == comb(n + r - 1, r - 1)
        assert len(monomials_in_degree_range(ring, n, n + 1)) == brute


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 6), st.integers(0, 6))
def test_filtration_exponent_additive(r, N, n, m):
    ring = RingDescriptor.power_series(2, num_vars=r)
    assert filtration_exponent(ring, N, n + m) == filtration_exponent(ring, N, n) + filtration_exponent(ring, N + n, m)


def test_monomials_in_degree_range_examples():
    t1, t2 = (1, 0), (0, 1)
    assert monomials_in_degree_range(F2xy, 1, 2) == [t1, t2]
    assert monomials_in_degree_range(F2, 2, 4) == [(2,), (3,)]
    assert len(monomials_in_degree_range(F2xy, 0, 3)) == 6
    with pytest.raises(ValueError):
        monomials_in_degree_range(Z3, 0, 2)


def test_residue_enumeration_matches_count():
    for ring, lo, hi in [(F2xy, 1, 3), (RingDescriptor.power_series(3, 9), 1, 3), (Z3, 1, 4)]:
        els = list(residues_between(ring, lo, hi, hi + 1))
        assert len(set(els)) == len(els) == count_residues_between(ring, lo, hi)
        assert all(x.valuation() >= lo for x in els)


def test_levels():
    check_level(Z3, 1)
    check_level(F2, 1)
    with pytest.raises(ValueError):
        check_level(F2, 0)
    with pytest.raises(ValueError):
        check_level(Z2, 1)
    check_level(Z2, 1, strict_p2=False)
    check_level(Z2, 2)


# --- arithmetic ------------------------------------------------------------------


def test_arithmetic_examples():
    M = 5
    x = t(F2, {(1,): 1}, M)
    assert add(x, x).is_zero
    one_plus_t = t(F2, {(0,): 1, (1,): 1}, 3)
    assert multiply(one_plus_t, t(F2, {(1,): 1}, 3)) == t(F2, {(1,): 1, (2,): 1}, 3)
    assert multiply(Z2.constant(3, 3), Z2.constant(3, 3)) == Z2.constant(1, 3)
    assert negate(Z3.constant(1, 2)).value == 8


def test_truncation_drops_high_degree():
    x = t(F2, {(1,): 1}, 3)
    assert (x * x * x).is_zero
    assert Z3.constant(9, 2).is_zero


def test_mismatch_rejected():
    with pytest.raises(RingMismatchError):
        add(F2.constant(1, 3), F2.constant(1, 4))
    with pytest.raises(RingMismatchError):
        add(F2.constant(1, 3), Z2.constant(1, 3))


def test_valuation_convention():
    assert F2.zero(6).valuation() == 6
    assert Z3.constant(18, 5).valuation() == 2
    assert t(F2xy, {(1, 2): 1, (2, 0): 1}, 6).valuation() == 2


def test_uniformizer_shift():
    x = t(F2, {(2,): 1, (3,): 1}, 6)
    assert x.shift(1) == t(F2, {(3,): 1, (4,): 1}, 6)
    assert x.shift(1).shift(-1) == x
    assert Z3.constant(9, 4).shift(-2) == Z3.constant(1, 4)
    with pytest.raises(ValueError):
        F2xy.constant(1, 4).shift(1)


def test_str():
    assert str(t(F2, {(1,): 1, (2,): 1}, 4)) == "t + t^2"
    assert str(t(F2xy, {(1, 1): 1}, 4)) == "t1*t2"


RINGS = [F2, F2xy, RingDescriptor.power_series(3, 9), Z3, RingDescriptor.padic(5)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(RINGS), st.integers(2, 7), st.integers(0, 2**32))
def test_ring_axioms_random(ring, M, seed):
    rng = random.Random(seed)
    a, b, c = (random_element(ring, M, 0, rng) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == ring.zero(M)
    assert a * ring.one(M) == a


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(RINGS), st.integers(2, 7), st.integers(0, 4), st.integers(0, 2**32))
def test_valuation_is_superadditive(ring, M, v, seed):
    rng = random.Random(seed)
    a = random_element(ring, M, 0, rng)
    b = random_element(ring, M, min(v, M), rng)
    assert (a * b).valuation() >= b.valuation()
    assert (a * b).valuation() >= min(a.valuation() + b.valuation(), M)
