"""Exact linear algebra over F_q and Z/p^k."""

from __future__ import annotations

from itertools import combinations, permutations
from typing import Hashable, Sequence


def row_reduce(rows: Sequence[dict[Hashable, int]], F, col_order: Sequence[Hashable] | None = None) -> list[dict]:
    """Reduced row-echelon basis of the F-span of sparse rows.

    ``col_order`` fixes the pivot search order so the basis is deterministic;
    by default columns are taken in sorted order.
    """
    work = [dict(r) for r in rows if r]
    if col_order is None:
        cols = sorted({c for r in work for c in r})
    else:
        cols = list(col_order)
    basis: list[dict] = []
    for col in cols:
        pivot_idx = next((i for i, r in enumerate(work) if r.get(col, 0)), None)
        if pivot_idx is None:
            continue
        pivot = work.pop(pivot_idx)
        inv = F.inv(pivot[col])
        pivot = {c: F.mul(inv, v) for c, v in pivot.items()}
        for target in work + basis:
            a = target.get(col, 0)
            if a:
                for c, v in pivot.items():
                    w = F.sub(target.get(c, 0), F.mul(a, v))
                    if w:
                        target[c] = w
                    else:
                        target.pop(c, None)
        work = [r for r in work if r]
        basis.append(pivot)
    return basis


def rank_over_field(rows: Sequence[dict[Hashable, int]], F) -> int:
    return len(row_reduce(rows, F))


def _valuation(a: int, p: int, k: int) -> int:
    a %= p**k
    if a == 0:
        return k
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def diagonal_valuations(rows: Sequence[Sequence[int]], p: int, k: int) -> list[int]:
    """Valuations of the diagonal obtained by eliminating over Z/p^k.

    Each step takes an entry of least valuation as pivot and clears its
    column; the span of the rows is then the direct sum of cyclic groups of
    orders p^(k - v) over the returned valuations v.
    """
    mod = p**k
    work = [[a % mod for a in r] for r in rows]
    work = [r for r in work if any(r)]
    ncols = len(work[0]) if work else 0
    active_cols = set(range(ncols))
    vals = []
    while work:
        best = None
        for i, r in enumerate(work):
            for c in active_cols:
                v = _valuation(r[c], p, k)
                if v < k and (best is None or v < best[0]):
                    best = (v, i, c)
        if best is None:
            break
        v, i, c = best
        pivot = work.pop(i)
        unit = (pivot[c] // p**v) % mod
        unit_inv = pow(unit, -1, mod)
        for r in work:
            if r[c]:
                factor = ((r[c] // p**v) * unit_inv) % mod
                for j in range(ncols):
                    r[j] = (r[j] - factor * pivot[j]) % mod
        work = [r for r in work if any(r)]
        active_cols.discard(c)
        vals.append(v)
    return vals


def span_log_size_mod_pk(rows: Sequence[Sequence[int]], p: int, k: int) -> int:
    """log_p of the size of the subgroup of (Z/p^k)^n generated by ``rows``."""
    return sum(k - v for v in diagonal_valuations(rows, p, k))


def matrix_inverse(mat: Sequence[Sequence[int]], C) -> list[list[int]]:
    """Inverse over a field or over Z/p^k (pivots are chosen among units)."""
    n = len(mat)
    aug = [[C.from_int(x) for x in row] + [C.one if i == j else C.zero for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if C.is_unit(aug[r][col])), None)
        if piv is None:
            raise ZeroDivisionError("matrix is not invertible")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = C.inv(aug[col][col])
        aug[col] = [C.mul(inv, x) for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [C.sub(x, C.mul(f, y)) for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def determinant(mat, zero, one):
    """Leibniz determinant for a small square matrix over any commutative ring
    whose elements support +, -, * (e.g. TruncatedElement)."""
    n = len(mat)
    total = zero
    for perm in permutations(range(n)):
        term = one
        for i, j in enumerate(perm):
            term = term * mat[i][j]
        total = total + term if _perm_sign(perm) > 0 else total - term
    return total


def minors(mat, k: int, zero, one):
    """All k x k minors of a rectangular matrix."""
    nrows = len(mat)
    ncols = len(mat[0]) if mat else 0
    for rs in combinations(range(nrows), k):
        for cs in combinations(range(ncols), k):
            yield determinant([[mat[r][c] for c in cs] for r in rs], zero, one)
