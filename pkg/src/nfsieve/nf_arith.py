"""Exact arithmetic in O_K: elements, HNF ideals, prime decomposition, ideals of bounded norm."""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import total_ordering
from typing import Iterator, Sequence

from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor

from . import intlin
from .errors import IndexDivisorError
from .field_data import Coords, FieldData

Hnf = tuple[tuple[int, ...], ...]

IDEAL_ENUM_LIMIT = 10**6


def primes_up_to(x: int) -> list[int]:
    if x < 2:
        return []
    sieve = bytearray([1]) * (x + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(x) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, x + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


@dataclass(frozen=True)
class NfElement:
    field: FieldData = dc_field(compare=False, repr=False, hash=False)
    coords: Coords

    def __add__(self, other: "NfElement") -> "NfElement":
        return NfElement(self.field, self.field.add(self.coords, _coords(other)))

    def __sub__(self, other: "NfElement") -> "NfElement":
        return NfElement(self.field, self.field.sub(self.coords, _coords(other)))

    def __neg__(self) -> "NfElement":
        return NfElement(self.field, self.field.neg(self.coords))

    def __mul__(self, other) -> "NfElement":
        if isinstance(other, int):
            return NfElement(self.field, self.field.scale(self.coords, other))
        return NfElement(self.field, self.field.mul(self.coords, _coords(other)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "NfElement":
        return NfElement(self.field, self.field.power(self.coords, k))

    def norm(self) -> int:
        return self.field.norm(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    @classmethod
    def from_int(cls, F: FieldData, k: int) -> "NfElement":
        return cls(F, F.scale(F.one(), k))


def _coords(a) -> Coords:
    return a.coords if isinstance(a, NfElement) else tuple(a)


@total_ordering
@dataclass(frozen=True)
class NfIdeal:
    """Integral ideal given by its lower-triangular HNF basis over the integral basis."""

    field: FieldData = dc_field(compare=False, repr=False, hash=False)
    hnf: Hnf
    factors: tuple | None = dc_field(default=None, compare=False, repr=False, hash=False)

    @property
    def norm(self) -> int:
        return math.prod(self.hnf[i][i] for i in range(len(self.hnf)))

    def sort_key(self) -> tuple:
        return (self.norm, self.hnf)

    def __lt__(self, other: "NfIdeal") -> bool:
        return self.sort_key() < other.sort_key()

    @classmethod
    def from_generators(cls, F: FieldData, gens: Sequence[Sequence[int]], factors=None) -> "NfIdeal":
        rows = []
        for g in gens:
            rows.extend(F.mult_matrix(g))
        return cls(F, _freeze(intlin.hnf(rows, F.n)), factors)

    @classmethod
    def from_hnf(cls, F: FieldData, H: Sequence[Sequence[int]], factors=None) -> "NfIdeal":
        return cls(F, _freeze(intlin.hnf([list(r) for r in H], F.n)), factors)

    @classmethod
    def principal(cls, F: FieldData, a) -> "NfIdeal":
        a = _coords(a)
        if not any(a):
            raise ValueError("zero ideal")
        return cls(F, _freeze(intlin.hnf(F.mult_matrix(a), F.n)))

    @classmethod
    def unit_ideal(cls, F: FieldData) -> "NfIdeal":
        return cls(F, tuple(tuple(int(i == j) for j in range(F.n)) for i in range(F.n)), ())

    def is_unit_ideal(self) -> bool:
        return self.norm == 1

    def contains(self, a) -> bool:
        return intlin.in_lattice(_coords(a), self.hnf)

    def contains_ideal(self, other: "NfIdeal") -> bool:
        return all(self.contains(row) for row in other.hnf)

    def divides(self, other: "NfIdeal") -> bool:
        """self | other  <=>  other is contained in self."""
        return self.contains_ideal(other)

    def __mul__(self, other: "NfIdeal") -> "NfIdeal":
        return ideal_mul(self, other)

    def __add__(self, other: "NfIdeal") -> "NfIdeal":
        return ideal_sum(self, other)

    def __repr__(self) -> str:
        return f"NfIdeal(norm={self.norm}, hnf={[list(r) for r in self.hnf]})"


def _freeze(H) -> Hnf:
    return tuple(tuple(int(v) for v in row) for row in H)


def ideal_mul(a: NfIdeal, b: NfIdeal) -> NfIdeal:
    F = a.field
    rows = [list(F.mul(x, y)) for x in a.hnf for y in b.hnf]
    N = a.norm * b.norm
    rows += [[N * int(i == j) for j in range(F.n)] for i in range(F.n)]
    factors = None
    if a.factors is not None and b.factors is not None:
        factors = _merge_factors(a.factors, b.factors)
    out = NfIdeal(F, _freeze(intlin.hnf(rows, F.n)), factors)
    return out


def ideal_sum(a: NfIdeal, b: NfIdeal) -> NfIdeal:
    return NfIdeal(a.field, _freeze(intlin.hnf([list(r) for r in a.hnf + b.hnf], a.field.n)))


def ideal_power(a: NfIdeal, k: int) -> NfIdeal:
    out = NfIdeal.unit_ideal(a.field)
    for _ in range(k):
        out = ideal_mul(out, a)
    return out


def colon(b: NfIdeal, a: NfIdeal) -> NfIdeal:
    """(b : a) = {x in O_K : x a in b}. For b = (N(a)) this is N(a) a^{-1}."""
    F = a.field
    # x * a_k in b  <=>  coordinates of x * a_k reduce to 0 mod b; b is handled through its
    # exponent-free description only when b = (m) for an integer m
    m = b.hnf[0][0] if _is_rational_ideal(b) else None
    if m is None:
        raise NotImplementedError("colon is implemented for b = (m), m a rational integer")
    cols = []
    for row in a.hnf:
        M = F.mult_matrix(row)
        cols.append(M)
    C = [[v for M in cols for v in M[i]] for i in range(F.n)]
    return NfIdeal(F, _freeze(intlin.kernel_mod(C, m, F.n)))


def _is_rational_ideal(b: NfIdeal) -> bool:
    F = b.field
    m = b.hnf[0][0]
    return b == NfIdeal.principal(F, F.scale(F.one(), m))


def inverse_class_ideal(a: NfIdeal) -> NfIdeal:
    """An integral ideal in the inverse class of a, namely N(a) a^{-1}."""
    F = a.field
    return colon(NfIdeal.principal(F, F.scale(F.one(), a.norm)), a)


def _merge_factors(fa, fb) -> tuple:
    d: dict = {}
    for p, e in list(fa) + list(fb):
        d[p] = d.get(p, 0) + e
    return tuple(sorted(d.items(), key=lambda kv: kv[0].sort_key()))


# ---------------------------------------------------------------------- primes


@dataclass(frozen=True)
class PrimeIdeal:
    p: int
    ideal: NfIdeal
    residue_degree: int
    ramification: int

    @property
    def norm(self) -> int:
        return self.p**self.residue_degree

    def sort_key(self) -> tuple:
        return (self.norm, self.ideal.hnf)

    def __repr__(self) -> str:
        return f"PrimeIdeal(p={self.p}, f={self.residue_degree}, e={self.ramification}, hnf={[list(r) for r in self.ideal.hnf]})"


def primes_above(F: FieldData, p: int) -> list[PrimeIdeal]:
    cache = F._cache.setdefault("primes_above", {})
    if p in cache:
        return cache[p]
    table = F.index_prime_table()
    out = []
    if p in table:
        for gens, e, f in table[p]:
            gens = list(gens) + [F.scale(F.one(), p)]
            I = NfIdeal.from_generators(F, gens)
            if I.norm != p**f:
                raise IndexDivisorError(f"tabulated prime above {p} has norm {I.norm}, expected {p ** f}")
            out.append(PrimeIdeal(p, I, f, e))
    else:
        if F.index % p == 0:
            raise IndexDivisorError(f"{p} divides the index [O_K : Z[theta]] = {F.index} and is not tabulated")
        poly = [c % p for c in reversed(F.defining_poly)]
        _, facs = gf_factor([ZZ(c) for c in poly], p, ZZ)
        theta = F.theta()
        for g, e in facs:
            g = [int(c) for c in g]
            # g(theta) by Horner
            acc = F.zero()
            for c in g:
                acc = F.add(F.mul(acc, theta), F.scale(F.one(), c))
            I = NfIdeal.from_generators(F, [F.scale(F.one(), p), acc])
            f = len(g) - 1
            if I.norm != p**f:
                raise IndexDivisorError(f"Dedekind-Kummer failed at {p}")
            out.append(PrimeIdeal(p, I, f, e))
    out.sort(key=PrimeIdeal.sort_key)
    if sum(P.residue_degree * P.ramification for P in out) != F.n:
        raise IndexDivisorError(f"sum e f != n above {p}")
    for P in out:
        object.__setattr__(P.ideal, "factors", ((P, 1),))
    cache[p] = out
    return out


def prime_ideals_up_to(F: FieldData, x: int) -> list[PrimeIdeal]:
    """All prime ideals of norm <= x, sorted by (norm, hnf)."""
    out = [P for p in primes_up_to(int(x)) for P in primes_above(F, p) if P.norm <= x]
    out.sort(key=PrimeIdeal.sort_key)
    return out


def factor_ideal(a: NfIdeal) -> tuple:
    """Prime factorization ((P, e), ...) of an integral ideal."""
    if a.factors is not None:
        return a.factors
    F = a.field
    N = a.norm
    out = []
    for p in sorted(_rational_prime_factors(N)):
        for P in primes_above(F, p):
            e = 0
            cur = a
            Q = P.ideal
            while Q.norm <= N and Q.divides(a):
                e += 1
                Q = ideal_mul(Q, P.ideal)
            if e:
                out.append((P, e))
    out.sort(key=lambda pe: pe[0].sort_key())
    if math.prod(P.norm**e for P, e in out) != N:
        raise ArithmeticError("factorization does not reproduce the norm")
    object.__setattr__(a, "factors", tuple(out))
    return a.factors


def _rational_prime_factors(N: int) -> set[int]:
    out, d = set(), 2
    while d * d <= N:
        while N % d == 0:
            out.add(d)
            N //= d
        d += 1
    if N > 1:
        out.add(N)
    return out


def ideals_of_norm_up_to(F: FieldData, x: int) -> Iterator[NfIdeal]:
    """Every integral ideal of norm <= x exactly once, by (norm, HNF) order, factorizations attached."""
    x = int(x)
    if x < 1:
        return iter(())
    if x > IDEAL_ENUM_LIMIT:
        from .errors import ScaleLimitExceeded

        raise ScaleLimitExceeded(f"x = {x} exceeds the desk-scale limit {IDEAL_ENUM_LIMIT}")
    cached = F._cache.get("ideal_list")
    if cached is None or cached[0] < x:
        cached = (x, _build_ideal_list(F, x))
        F._cache["ideal_list"] = cached
    lst = cached[1]
    return iter([I for I in lst if I.norm <= x])


def _build_ideal_list(F: FieldData, x: int) -> list[NfIdeal]:
    primes = prime_ideals_up_to(F, x)
    out = [NfIdeal.unit_ideal(F)]

    def rec(start: int, cur: NfIdeal, norm: int) -> None:
        for idx in range(start, len(primes)):
            P = primes[idx]
            if norm * P.norm > x:
                break
            nxt, nn = cur, norm
            while nn * P.norm <= x:
                nxt = ideal_mul(nxt, P.ideal)
                nn *= P.norm
                out.append(nxt)
                rec(idx + 1, nxt, nn)

    rec(0, NfIdeal.unit_ideal(F), 1)
    out.sort(key=NfIdeal.sort_key)
    return out


def ideal_counts(F: FieldData, x: int) -> list[int]:
    """a_k for k = 0..x (a_0 = 0)."""
    counts = [0] * (x + 1)
    for I in ideals_of_norm_up_to(F, x):
        counts[I.norm] += 1
    return counts


# ---------------------------------------------------------------------- congruences


def elem_mod(a, f: NfIdeal) -> Coords:
    """Canonical residue of a modulo f (reduced against the HNF)."""
    return intlin.reduce_mod_hnf(_coords(a), f.hnf)


def is_coprime(a, f: NfIdeal) -> bool:
    if isinstance(a, NfIdeal):
        return ideal_sum(a, f).is_unit_ideal()
    a = _coords(a)
    if not any(a):
        return f.is_unit_ideal()
    return ideal_sum(NfIdeal.principal(f.field, a), f).is_unit_ideal()


def crt_lift(a_ideal: NfIdeal, f_ideal: NfIdeal, f_elem) -> Coords:
    """An element of a_ideal congruent to f_elem modulo f_ideal (the two ideals coprime)."""
    F = a_ideal.field
    rows = [list(r) for r in a_ideal.hnf] + [list(r) for r in f_ideal.hnf]
    H, U = intlin.hnf_with_transform(rows, F.n)
    if math.prod(H[i][i] for i in range(F.n)) != 1:
        from .errors import CoprimalityError

        raise CoprimalityError("ideals are not coprime")
    one = F.one()
    # H is the identity, so 1 = sum_k one[k] * (row k of U) @ rows
    comb = [sum(one[k] * U[k][l] for k in range(F.n)) for l in range(len(rows))]
    a = [0] * F.n
    for l in range(len(a_ideal.hnf)):
        if comb[l]:
            a = [x + comb[l] * y for x, y in zip(a, rows[l])]
    lifted = F.mul(tuple(a), _coords(f_elem))
    af = ideal_mul(a_ideal, f_ideal)
    return intlin.reduce_mod_hnf(lifted, af.hnf)


def residues_mod(f: NfIdeal) -> list[Coords]:
    """All canonical residues modulo f."""
    import itertools

    diag = [f.hnf[i][i] for i in range(len(f.hnf))]
    return [tuple(v) for v in itertools.product(*(range(d) for d in diag))]


def unit_residues_mod(f: NfIdeal) -> list[Coords]:
    """Canonical representatives of (O_K / f)^*."""
    return [v for v in residues_mod(f) if is_coprime(v, f)]


def ideal_totient(f: NfIdeal) -> int:
    """|(O_K/f)^*| from the prime factorization."""
    out = 1
    for P, e in factor_ideal(f):
        out *= P.norm ** (e - 1) * (P.norm - 1)
    return out
