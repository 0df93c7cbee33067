"""Selberg's upper-bound sieve on integral ideals, in exact rational arithmetic.

Squarefree moduli d are frozensets of prime objects (anything with a ``norm``), so the same code
runs over O_K and, for regression against the classical numbers, over Z.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import mpmath
from mpmath import mp

from .errors import DensityViolation, NotSquarefree, RangeError
from .field_data import FieldData
from .ideal_census import census_constant
from .nf_arith import factor_ideal, prime_ideals_up_to, primes_up_to

Squarefree = frozenset


def _one(_P) -> Fraction:
    return Fraction(1)


def _all(_P) -> bool:
    return True


def norm_of(d: Iterable) -> int:
    return math.prod(P.norm for P in d)


def _prime_set(a) -> frozenset:
    """Set of primes dividing a (an NfIdeal or anything with ``factors``)."""
    facs = a.factors if a.factors is not None else factor_ideal(a)
    return frozenset(P for P, _ in facs)


def as_squarefree(a) -> frozenset:
    facs = a.factors if a.factors is not None else factor_ideal(a)
    if any(e > 1 for _, e in facs):
        raise NotSquarefree(f"{a} is not squarefree")
    return frozenset(P for P, _ in facs)


@dataclass(frozen=True)
class RationalPrime:
    """A rational prime p as a sieve prime of norm p (the degree-one stand-in)."""

    p: int

    @property
    def norm(self) -> int:
        return self.p


@dataclass(frozen=True)
class RationalIdeal:
    m: int

    @property
    def norm(self) -> int:
        return self.m

    @property
    def factors(self) -> tuple:
        out, m, d = [], self.m, 2
        while d * d <= m:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            if e:
                out.append((RationalPrime(d), e))
            d += 1
        if m > 1:
            out.append((RationalPrime(m), 1))
        return tuple(out)


@dataclass
class SieveConfig:
    field: FieldData | None  # None: the rational integers
    A: Sequence
    z: float
    X: Fraction
    P: Callable[[Hashable], bool] = _all
    density: Callable[[Hashable], Fraction] = _one
    A_const: Fraction | None = None

    def sifting_primes(self) -> list:
        """Primes of the sifting set with norm <= z, i.e. the divisors of P(z)."""
        zf = math.floor(self.z)
        if self.field is None:
            cands = [RationalPrime(p) for p in primes_up_to(zf)]
        else:
            cands = prime_ideals_up_to(self.field, zf)
        return [P for P in cands if self.P(P)]

    def check_density(self) -> None:
        for P in self.sifting_primes():
            w = Fraction(self.density(P))
            ratio = w / P.norm
            upper = 1 - 1 / self.A_const if self.A_const is not None else Fraction(1)
            if ratio < 0 or ratio > upper or (self.A_const is None and ratio >= 1):
                raise DensityViolation(f"omega(p)/N(p) = {ratio} outside [0, {upper}) at {P}")


def omega_of(d: frozenset, density) -> Fraction:
    out = Fraction(1)
    for P in d:
        out *= Fraction(density(P))
    return out


def g_of(d: frozenset, density) -> Fraction:
    """omega(d) / (N(d) prod_{p | d}(1 - omega(p)/N(p)))."""
    out = Fraction(1)
    for P in d:
        w = Fraction(density(P))
        if w == 0:
            return Fraction(0)
        out *= w / (P.norm * (1 - w / P.norm))
    return out


def g_value(F: FieldData | None, d, density=_one) -> Fraction:
    """g(d) for a squarefree ideal d (its factorization is computed if absent)."""
    if not isinstance(d, frozenset):
        d = as_squarefree(d)
    return g_of(d, density)


def squarefree_products(primes: Sequence, bound, strict: bool = True) -> list[frozenset]:
    """All squarefree products of the given primes with norm < bound (<= bound if not strict)."""
    primes = sorted(primes, key=lambda P: P.norm)
    out: list[frozenset] = []

    def ok(N):
        return N < bound if strict else N <= bound

    def rec(start: int, cur: tuple, N: int) -> None:
        out.append(frozenset(cur))
        for i in range(start, len(primes)):
            M = N * primes[i].norm
            if not ok(M):
                break
            rec(i + 1, cur + (primes[i],), M)

    if ok(1):
        rec(0, (), 1)
    return out


def big_G_sum(divisors: Sequence[frozenset], x, density, k: frozenset = frozenset()) -> Fraction:
    """G_k(x) = sum over squarefree d with N(d) < x, (d, k) = 1 of g(d)."""
    return sum((g_of(d, density) for d in divisors if norm_of(d) < x and not (d & k)), Fraction(0))


def big_G(F: FieldData | None, k, x, cfg: SieveConfig) -> Fraction:
    """G_k(x) over the divisors of P(z); k is an ideal (or a prime set) to stay coprime to."""
    if not isinstance(k, frozenset):
        k = _prime_set(k) if k is not None else frozenset()
    divs = squarefree_products(cfg.sifting_primes(), x)
    return big_G_sum(divs, x, cfg.density, k)


def selberg_weights(divisors: Sequence[frozenset], z, density) -> tuple[Fraction, dict]:
    """G(z) and lambda_d = mu(d) / prod(1 - omega/N) * G_d(z / N(d)) / G(z) for N(d) < z."""
    z = Fraction(z)
    small = [d for d in divisors if norm_of(d) < z]
    Gz = big_G_sum(small, z, density)
    lam = {}
    for d in small:
        Nd = norm_of(d)
        mu = -1 if len(d) % 2 else 1
        fac = Fraction(1)
        for P in d:
            fac *= 1 - Fraction(density(P)) / P.norm
        lam[d] = mu / fac * big_G_sum(small, z / Nd, density, d) / Gz
    return Gz, lam


@dataclass
class SieveResult:
    sifted_exact: int
    upper_bound: Fraction  # X/G(z) + sum 3^nu |R_d|
    G_z: Fraction
    lam: dict = dc_field(repr=False)
    error_sum: Fraction = Fraction(0)
    X_over_G: Fraction = Fraction(0)
    quadratic_form: int = 0  # sum_a (sum_{d | a} lambda_d)^2, exact
    sigma2: Fraction = Fraction(0)  # sum lambda lambda R_[d1,d2]
    sigma2_abs: Fraction = Fraction(0)  # sum |R_[d1,d2]|
    size_A: int = 0
    z: float = 0.0

    @property
    def chain_ok(self) -> bool:
        return (
            self.sifted_exact <= self.quadratic_form
            and self.quadratic_form == self.X_over_G + self.sigma2
            and self.sigma2 <= self.sigma2_abs <= self.error_sum
            and self.sifted_exact <= self.upper_bound
        )

    @property
    def lambda_ok(self) -> bool:
        return self.lam.get(frozenset()) == 1 and all(abs(v) <= 1 for v in self.lam.values())


def selberg_upper_bound(cfg: SieveConfig) -> SieveResult:
    """Run the sieve on the explicit sequence A and check every link of the upper bound."""
    cfg.check_density()
    primes = cfg.sifting_primes()
    pset = frozenset(primes)
    z = Fraction(cfg.z)
    dens = cfg.density
    divisors = squarefree_products(primes, z * z)
    Gz, lam = selberg_weights(divisors, z, dens)

    # |A_d| for every squarefree d | P(z) with N(d) < z^2, by divisibility
    A_d: dict[frozenset, int] = {}
    sifted = 0
    qform = Fraction(0)
    zz = z * z
    for a in cfg.A:
        ps = sorted(_prime_set(a) & pset, key=lambda P: P.norm)
        if not ps:
            sifted += 1
        for d in squarefree_products(ps, zz):
            A_d[d] = A_d.get(d, 0) + 1
        s = sum((lam[d] for d in squarefree_products(ps, z) if d in lam), Fraction(0))
        qform += s * s

    X = Fraction(cfg.X)

    def R(d: frozenset) -> Fraction:
        return A_d.get(d, 0) - omega_of(d, dens) * X / norm_of(d)

    err = Fraction(0)
    for d in divisors:
        err += 3 ** len(d) * abs(R(d))
    sig, sig_abs = Fraction(0), Fraction(0)
    items = list(lam.items())
    for d1, l1 in items:
        for d2, l2 in items:
            r = R(d1 | d2)
            sig += l1 * l2 * r
            sig_abs += abs(r)
    XG = X / Gz
    res = SieveResult(
        sifted, XG + err, Gz, lam, err, XG, qform, sig, sig_abs, len(cfg.A), float(z),
    )
    if not sifted <= res.upper_bound:
        raise ArithmeticError(f"sieve inequality violated: {sifted} > {float(res.upper_bound)}")
    return res


def diagonal_identity(lam: dict, density) -> Fraction:
    """sum_{d1, d2} lambda_d1 lambda_d2 omega([d1, d2]) / N([d1, d2])  (equals 1/G(z))."""
    tot = Fraction(0)
    items = list(lam.items())
    for d1, l1 in items:
        for d2, l2 in items:
            m = d1 | d2
            tot += l1 * l2 * omega_of(m, density) / norm_of(m)
    return tot


def sieve_csv(rows: Sequence[tuple[str, SieveResult]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "z", "size_A", "sifted", "X_over_G", "sigma2", "error_sum", "upper_bound", "pass"])
    for name, r in rows:
        w.writerow(
            [name, f"{r.z:g}", r.size_A, r.sifted_exact, f"{float(r.X_over_G):.12g}", f"{float(r.sigma2):.12g}",
             f"{float(r.error_sum):.12g}", f"{float(r.upper_bound):.12g}", r.chain_ok]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------- explicit lemmas


def lemma7_threshold(F: FieldData) -> mpmath.mpf:
    """(e c / kappa)^n with c the ideal-census constant at Reg h."""
    with mp.workprec(F.precision):
        c = census_constant(F.n, F.reg_convention * F.class_number)
        return (mpmath.e * c / F.residue) ** F.n


def lemma7_lower_bound(F: FieldData, z, bad_primes: Iterable = ()) -> mpmath.mpf:
    """prod_{bad p, N(p) <= z} (1 - 1/N(p)) * kappa * log(kappa^n z / (e^n c^n))."""
    n = F.n
    with mp.workprec(F.precision):
        z = mpmath.mpf(z)
        c = census_constant(n, F.reg_convention * F.class_number)
        kappa = F.residue
        thr = (mpmath.e * c / kappa) ** n
        if z < thr * (1 - mpmath.mpf(2) ** (-F.precision // 2)):
            raise RangeError(f"z = {mpmath.nstr(z, 5)} below the validity threshold {mpmath.nstr(thr, 5)}")
        prod = mpmath.mpf(1)
        for P in bad_primes:
            if P.norm <= z:
                prod *= 1 - mpmath.mpf(1) / P.norm
        val = prod * kappa * mpmath.log(kappa**n * z / (mpmath.e * c) ** n)
        return max(val, mpmath.mpf(0))


def lemma8_error_bound(n: int, z) -> mpmath.mpf:
    """z^{2/n} (2 log z)^{3n}, valid for z >= 16."""
    z = mpmath.mpf(z)
    if z < 16:
        raise RangeError(f"z = {z} < 16")
    return z ** (mpmath.mpf(2) / n) * (2 * mpmath.log(z)) ** (3 * n)


def exact_error_sum(F: FieldData | None, z, P: Callable = _all) -> mpmath.mpf:
    """sum over squarefree d | P(z), N(d) <= z^2 of 3^nu(d) / N(d)^{1 - 1/n}."""
    cfg = SieveConfig(F, (), z, Fraction(0), P)
    n = F.n if F is not None else 1
    divs = squarefree_products(cfg.sifting_primes(), z * z, strict=False)
    ex = 1 - mpmath.mpf(1) / n
    return mpmath.fsum(mpmath.mpf(3) ** len(d) / mpmath.mpf(norm_of(d)) ** ex for d in divs)


def eqprod(F: FieldData, z) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(prod_{N(p) <= z} (1 + 1/N(p)), (2 log z)^n)."""
    prod = mpmath.mpf(1)
    for P in prime_ideals_up_to(F, math.floor(z)):
        prod *= 1 + mpmath.mpf(1) / P.norm
    return prod, (2 * mpmath.log(z)) ** F.n
