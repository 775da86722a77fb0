"""Coefficient rings: finite fields F_q (q = p^s, s <= 3) and Z/p^k."""

from __future__ import annotations

from functools import lru_cache
from itertools import product


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def prime_power_exponent(q: int, p: int) -> int | None:
    """Return s with q == p**s (s >= 1), or None."""
    if q < p:
        return None
    s = 0
    while q % p == 0:
        q //= p
        s += 1
    return s if q == 1 and s >= 1 else None


def _has_root(coeffs: tuple[int, ...], p: int) -> bool:
    # coeffs low -> high
    for a in range(p):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * a + c) % p
        if acc == 0:
            return True
    return False


@lru_cache(maxsize=None)
def irreducible_polynomial(p: int, s: int) -> tuple[int, ...]:
    """First monic irreducible polynomial of degree s over F_p, coefficients low -> high.

    For s <= 3 a polynomial is irreducible iff it has no root in F_p, which
    makes the search exhaustive and deterministic.
    """
    if s == 1:
        return (0, 1)
    if s > 3:
        raise ValueError(f"extension degree {s} > 3 not supported")
    for low in product(range(p), repeat=s):
        coeffs = tuple(low) + (1,)
        if coeffs[0] != 0 and not _has_root(coeffs, p):
            return coeffs
    raise AssertionError("no irreducible polynomial found")  # unreachable


class GaloisField:
    """F_q with elements encoded as integers 0..q-1.

    The integer c = a_0 + a_1 p + ... + a_{s-1} p^{s-1} stands for
    a_0 + a_1 w + ... + a_{s-1} w^{s-1}, w a root of the table polynomial.
    """

    def __init__(self, p: int, s: int = 1):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if s < 1 or s > 3:
            raise ValueError(f"extension degree must be in 1..3, got {s}")
        self.p = p
        self.s = s
        self.q = p**s
        self.modulus = irreducible_polynomial(p, s)
        self.zero = 0
        self.one = 1
        if s > 1:
            self._add = [[self._slow_add(a, b) for b in range(self.q)] for a in range(self.q)]
            self._neg = [self._pack([(-x) % p for x in self._digits(a)]) for a in range(self.q)]

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.s):
            out.append(a % self.p)
            a //= self.p
        return out

    def _pack(self, digits) -> int:
        v = 0
        for c in reversed(digits):
            v = v * self.p + c
        return v

    def from_int(self, n: int) -> int:
        """Interpret an integer: image of n in the prime field when s == 1,
        otherwise n must be an encoding in [0, q) (negatives mean -encoding)."""
        if self.s == 1:
            return n % self.p
        if n < 0:
            return self.neg(self.from_int(-n))
        if n >= self.q:
            raise ValueError(f"{n} is not an element encoding of {self!r}")
        return n

    def _slow_add(self, a: int, b: int) -> int:
        return self._pack([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def add(self, a: int, b: int) -> int:
        if self.s == 1:
            return (a + b) % self.p
        return self._add[a][b]

    def neg(self, a: int) -> int:
        if self.s == 1:
            return (-a) % self.p
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.s == 1:
            return (a * b) % self.p
        return _gf_mul(self.p, self.s, a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        if self.s == 1:
            return pow(a, -1, self.p)
        return _gf_inv(self.p, self.s, a)

    def is_unit(self, a: int) -> bool:
        return a != 0

    def elements(self) -> range:
        return range(self.q)

    def prime_basis(self) -> list[int]:
        """An F_p-basis of F_q (the powers of the generator)."""
        return [self.p**i for i in range(self.s)]


@lru_cache(maxsize=65536)
def _gf_mul(p: int, s: int, a: int, b: int) -> int:
    mod = irreducible_polynomial(p, s)
    da = [(a // p**i) % p for i in range(s)]
    db = [(b // p**i) % p for i in range(s)]
    prod = [0] * (2 * s - 1)
    for i, x in enumerate(da):
        if x:
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(2 * s - 2, s - 1, -1):
        c = prod[k]
        if c:
            for i in range(s + 1):
                prod[k - s + i] = (prod[k - s + i] - c * mod[i]) % p
    return sum(prod[i] * p**i for i in range(s))


@lru_cache(maxsize=4096)
def _gf_inv(p: int, s: int, a: int) -> int:
    # a^(q-2) by square-and-multiply
    e = p**s - 2
    result, base = 1, a
    while e:
        if e & 1:
            result = _gf_mul(p, s, result, base)
        base = _gf_mul(p, s, base, base)
        e >>= 1
    return result


@lru_cache(maxsize=None)
def galois_field(p: int, s: int = 1) -> GaloisField:
    return GaloisField(p, s)


class IntegersMod:
    """Z/p^k, the coefficient ring of Z_p at precision k."""

    def __init__(self, p: int, k: int):
        self.p = p
        self.k = k
        self.modulus = p**k
        self.zero = 0
        self.one = 1 % self.modulus

    def __repr__(self) -> str:
        return f"Z/{self.p}^{self.k}"

    def from_int(self, n: int) -> int:
        return n % self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def neg(self, a: int) -> int:
        return (-a) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus

    def is_unit(self, a: int) -> bool:
        return a % self.p != 0

    def inv(self, a: int) -> int:
        if not self.is_unit(a):
            raise ZeroDivisionError(f"{a} is not a unit mod {self.p}^{self.k}")
        return pow(a, -1, self.modulus)
