"""Modular arithmetic over Z_m and its prime-power factors.

Everything here is a pure function over immutable values: factorization,
CRT projection/lifting, units and inverses, base-p orders and suffixes,
cosets of the form S(s, l, i), and orthogonal idempotents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class RingError(ValueError):
    """Invalid modulus, coset, or argument outside the ring."""


@dataclass(frozen=True)
class RingSpec:
    """A modulus together with its prime-power factorization.

    factors is a list of (p, d) pairs with strictly increasing primes;
    omega is the number of distinct primes.
    """

    m: int
    factors: tuple[tuple[int, int], ...]
    omega: int

    def __post_init__(self):
        prod = 1
        for p, d in self.factors:
            prod *= p**d
        if prod != self.m or self.omega != len(self.factors):
            raise RingError(f"inconsistent RingSpec for m={self.m}")
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)):
            raise RingError("factor primes must be strictly increasing")

    @property
    def is_prime_power(self) -> bool:
        return self.omega == 1


def factorize(m: int) -> RingSpec:
    """Factor m by trial division into a RingSpec. Requires m >= 2."""
    if m < 2:
        raise RingError(f"invalid modulus {m}: need m >= 2")
    factors = []
    rest = m
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            d = 0
            while rest % p == 0:
                rest //= p
                d += 1
            factors.append((p, d))
        p += 1
    if rest > 1:
        factors.append((rest, 1))
    return RingSpec(m=m, factors=tuple(factors), omega=len(factors))


def crt_project(a: int, m: int, factor: tuple[int, int]) -> int:
    """Project a in Z_m to Z_{p^d} for one factor (p, d) of m."""
    p, d = factor
    return a % (p**d)


def crt_lift(residues: list[int], spec: RingSpec) -> int:
    """Recombine one residue per factor of spec into the unique value mod m."""
    if len(residues) != spec.omega:
        raise RingError("need one residue per factor")
    x = 0
    for r, (p, d) in zip(residues, spec.factors):
        q = p**d
        rest = spec.m // q
        inv = pow(rest, -1, q)
        x = (x + (r % q) * inv * rest) % spec.m
    return x


def is_unit(a: int, q: int) -> bool:
    """True iff a is invertible mod q."""
    return math.gcd(a % q, q) == 1


def units(q: int) -> list[int]:
    """All units of Z_q in increasing order."""
    return [a for a in range(1, q) if math.gcd(a, q) == 1]


def unit_inverse(a: int, q: int) -> int:
    if not is_unit(a, q):
        raise RingError(f"{a} is not a unit mod {q}")
    return pow(a % q, -1, q)


def order(a: int, p: int, d: int) -> int:
    """Number of trailing base-p zeros of a in Z_{p^d}; order(0) = d."""
    a %= p**d
    if a == 0:
        return d
    i = 0
    while a % p == 0:
        a //= p
        i += 1
    return i


def suffix(a: int, p: int, d: int, j: int) -> int:
    """The j least significant digits of a after dropping trailing zeros.

    Equals (a / p^order(a)) mod p^j. Undefined for a = 0.
    """
    a %= p**d
    if a == 0:
        raise RingError("suffix of 0 is undefined")
    if j < 1:
        raise RingError("need j >= 1")
    return (a // p ** order(a, p, d)) % p**j


@dataclass(frozen=True)
class Coset:
    """The set S(s, l, i) = {a in Z_{p^d} : order(a) = i and suffix(a, l) = s}.

    Stored by (order, suffix length, suffix); members are materialized on
    demand.  Valid when i + l <= d and the least digit of s is nonzero.
    """

    order: int
    suffix_len: int
    suffix: int

    def validate(self, p: int, d: int) -> None:
        i, l, s = self.order, self.suffix_len, self.suffix
        if i < 0 or l < 1 or i + l > d:
            raise RingError(f"invalid coset ({i},{l},{s}) for p^d={p}**{d}")
        if not 0 <= s < p**l or s % p == 0:
            raise RingError(f"coset suffix {s} is not a unit mod {p}")

    def is_singleton(self, d: int) -> bool:
        return self.order + self.suffix_len == d


def coset_members(c: Coset, p: int, d: int) -> set[int]:
    """The exact membership set of c in Z_{p^d}; always nonempty."""
    c.validate(p, d)
    i, l, s = c.order, c.suffix_len, c.suffix
    free = d - i - l
    return {(s + high * p**l) * p**i for high in range(p**free)}


def coset_value(c: Coset, p: int, d: int) -> int:
    """The single member of a singleton coset: s * p^i."""
    if not c.is_singleton(d):
        raise RingError("coset is not a singleton")
    return c.suffix * p**c.order


DISJOINT = "disjoint"
EQUAL = "equal"
PROPER_SUBSET = "proper-subset"
PROPER_SUPERSET = "proper-superset"


def coset_relation(c1: Coset, c2: Coset, p: int, d: int) -> str:
    """Containment relation of two cosets; the family is laminar.

    S(s,l,i) is inside S(s',l',i') exactly when the orders agree, l >= l'
    and s mod p^l' = s'.
    """
    c1.validate(p, d)
    c2.validate(p, d)
    if c1 == c2:
        return EQUAL
    if c1.order == c2.order:
        if c1.suffix_len > c2.suffix_len and c1.suffix % p**c2.suffix_len == c2.suffix:
            return PROPER_SUBSET
        if c2.suffix_len > c1.suffix_len and c2.suffix % p**c1.suffix_len == c1.suffix:
            return PROPER_SUPERSET
    return DISJOINT


def all_cosets(p: int, d: int) -> list[Coset]:
    """Every valid coset of Z_{p^d}, singletons included."""
    out = []
    for i in range(d):
        for l in range(1, d - i + 1):
            for s in range(p**l):
                if s % p != 0:
                    out.append(Coset(order=i, suffix_len=l, suffix=s))
    return out


def orthogonal_idempotents(spec: RingSpec) -> list[int]:
    """One idempotent per factor: q_i = 1 mod p_i^{d_i}, 0 mod the others."""
    out = []
    for idx in range(spec.omega):
        residues = [1 if j == idx else 0 for j in range(spec.omega)]
        out.append(crt_lift(residues, spec))
    return out
