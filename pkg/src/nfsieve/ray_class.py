"""Narrow class group modulo f: the residue-and-sign map rho, its unit image, and class labels.

An ideal a coprime to f gets the label (i, coset of rho(alpha) mod rho(V)), where i is the
ordinary class of a and alpha generates a * d_i for a fixed integral ideal d_i of the inverse
class, chosen coprime to f. Two ideals are narrowly equivalent mod f iff their labels agree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import NotCoprime, ScaleLimitExceeded
from .field_data import Coords, FieldData
from .ideal_census import ClassTag, class_of, inverse_class, is_principal
from .minkowski import DEFAULT_TAU_MEM
from .nf_arith import (
    NfIdeal,
    _coords,
    elem_mod,
    factor_ideal,
    ideal_mul,
    ideal_totient,
    inverse_class_ideal,
    ideals_of_norm_up_to,
    is_coprime,
    prime_ideals_up_to,
    unit_residues_mod,
)

TARGET_LIMIT = 200_000

Signs = tuple[int, ...]


@dataclass(frozen=True, order=True)
class RhoImage:
    residue: Coords
    signs: Signs


def _sign_vector(F: FieldData, a: Coords, tau_mem=DEFAULT_TAU_MEM) -> Signs:
    if F.r1 == 0:
        return ()
    with mp.workprec(F.precision):
        vals = F.embed(a)[: F.r1]
        out = []
        for v in vals:
            x = mpmath.re(v)
            if abs(x) < tau_mem:
                raise ArithmeticError(f"|sigma(alpha)| = {x} below the membership tolerance; raise precision")
            out.append(1 if x > 0 else -1)
    return tuple(out)


def rho(F: FieldData, alpha, f: NfIdeal, tau_mem=DEFAULT_TAU_MEM) -> RhoImage:
    """(alpha mod f, signs of the real embeddings of alpha)."""
    a = _coords(alpha)
    if not is_coprime(a, f):
        raise NotCoprime(f"alpha = {a} is not coprime to the modulus")
    return RhoImage(elem_mod(a, f), _sign_vector(F, a, tau_mem))


def rho_mul(F: FieldData, f: NfIdeal, x: RhoImage, y: RhoImage) -> RhoImage:
    res = elem_mod(F.mul(x.residue, y.residue), f)
    return RhoImage(res, tuple(s * t for s, t in zip(x.signs, y.signs)))


def _closure(F: FieldData, f: NfIdeal, gens: list[RhoImage]) -> frozenset[RhoImage]:
    """Subgroup generated by gens inside the finite group (O/f)^* x {+-1}^r1."""
    one = RhoImage(elem_mod(F.one(), f), (1,) * F.r1)
    group = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = rho_mul(F, f, x, g)
                if y not in group:
                    group.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(group)


@dataclass
class NarrowClassGroupData:
    field: FieldData = dc_field(repr=False)
    modulus: NfIdeal
    rho_V: frozenset
    h_star: int
    splitting: Fraction
    phi_f: int
    target: tuple = dc_field(repr=False, default=())
    coset_rep: dict = dc_field(repr=False, default_factory=dict)  # element -> min element of its coset
    inverse_reps: dict = dc_field(repr=False, default_factory=dict)  # class index -> d_i coprime to f
    _law: dict = dc_field(repr=False, default_factory=dict)

    @property
    def n_cosets(self) -> int:
        return len(set(self.coset_rep.values()))

    @property
    def h_star_enumerated(self) -> int:
        return self.field.class_number * self.n_cosets

    def canonical(self, x: RhoImage) -> RhoImage:
        return self.coset_rep[x]


def build_group_data(F: FieldData, f: NfIdeal) -> NarrowClassGroupData:
    """rho(V_K), h_f^* and the splitting count, with an explicit coset enumeration alongside."""
    cache = F._cache.setdefault("narrow", {})
    if f.hnf in cache:
        return cache[f.hnf]
    phi = ideal_totient(f)
    size = phi * 2**F.r1
    if size > TARGET_LIMIT:
        raise ScaleLimitExceeded(f"|(O/f)^* x signs| = {size} beyond {TARGET_LIMIT}")
    # every rho(eps) has finite order in the target, so the closure loop terminates
    gens = [rho(F, F.torsion_generator, f)] + [rho(F, u, f) for u in F.fundamental_units]
    rV = _closure(F, f, gens)

    h_star = Fraction(2**F.r1 * phi * F.class_number, len(rV))
    if h_star.denominator != 1:
        raise ArithmeticError(f"|rho(V)| = {len(rV)} does not divide 2^r1 phi(f) h")
    split = Fraction(2**F.r1 * f.norm, len(rV))
    for P, _ in factor_ideal(f):
        split *= 1 - Fraction(1, P.norm)

    units = unit_residues_mod(f)
    target = tuple(sorted(RhoImage(u, s) for u in units for s in itertools.product((1, -1), repeat=F.r1)))
    coset_rep: dict[RhoImage, RhoImage] = {}
    for t in target:  # sorted, so the first unvisited element of a coset is its minimum
        if t in coset_rep:
            continue
        for v in rV:
            coset_rep[rho_mul(F, f, t, v)] = t
    data = NarrowClassGroupData(F, f, rV, int(h_star), split, phi, target, coset_rep)
    cache[f.hnf] = data
    return data


def _inverse_rep_coprime(F: FieldData, data: NarrowClassGroupData, i: int) -> NfIdeal:
    """An integral ideal in the inverse of class i, coprime to the modulus."""
    if i in data.inverse_reps:
        return data.inverse_reps[i]
    if F.class_number == 1:
        d = NfIdeal.unit_ideal(F)
    else:
        want = inverse_class(F, ClassTag(i))
        x = 16
        d = None
        while d is None:
            for I in ideals_of_norm_up_to(F, x):
                # norm coprime to N(f) keeps the rational integer N(d_i) invertible mod f
                if math.gcd(I.norm, data.modulus.norm) == 1 and class_of(F, I) == want:
                    d = I
                    break
            x *= 4
    data.inverse_reps[i] = d
    return d


def narrow_class_label(F: FieldData, a: NfIdeal, data: NarrowClassGroupData) -> tuple[int, RhoImage]:
    if not is_coprime(a, data.modulus):
        raise NotCoprime(f"{a} is not coprime to the modulus")
    i = class_of(F, a).index
    b = ideal_mul(a, _inverse_rep_coprime(F, data, i))
    alpha = is_principal(F, b)
    if alpha is None:
        raise ArithmeticError("a * d_i is not principal (inconsistent class data)")
    return i, data.canonical(rho(F, alpha, data.modulus))


def same_narrow_class(F: FieldData, a: NfIdeal, b: NfIdeal, f: NfIdeal) -> bool:
    """a ~ b in the narrow class group mod f.

    With a d = (alpha), b d = (beta) for one d of the inverse class, a b^{-1} = (alpha / beta);
    some generator of it has trivial rho iff rho(alpha) and rho(beta) lie in one rho(V)-coset.
    """
    data = build_group_data(F, f)
    if class_of(F, a) != class_of(F, b):
        if not (is_coprime(a, f) and is_coprime(b, f)):
            raise NotCoprime("ideals must be coprime to the modulus")
        return False
    return narrow_class_label(F, a, data) == narrow_class_label(F, b, data)


def class_labels(data: NarrowClassGroupData) -> list[tuple[int, RhoImage]]:
    """All h_f^* labels (class index, minimal coset element), sorted."""
    reps = sorted(set(data.coset_rep.values()))
    return [(i, r) for i in range(data.field.class_number) for r in reps]


def prime_class_partition(F: FieldData, f: NfIdeal, x: int) -> dict:
    """Prime ideals of norm <= x coprime to f, grouped by narrow class label."""
    data = build_group_data(F, f)
    out: dict = {}
    for P in prime_ideals_up_to(F, x):
        if is_coprime(P.ideal, f):
            out.setdefault(narrow_class_label(F, P.ideal, data), []).append(P)
    return out


def element_label(F: FieldData, alpha, data: NarrowClassGroupData) -> tuple[int, RhoImage]:
    """Label of the principal ideal (alpha)."""
    return narrow_class_label(F, NfIdeal.principal(F, _coords(alpha)), data)


def rho_order(F: FieldData, f: NfIdeal, x: RhoImage) -> int:
    one = RhoImage(elem_mod(F.one(), f), (1,) * F.r1)
    y, k = x, 1
    while y != one:
        y = rho_mul(F, f, y, x)
        k += 1
    return k



def rho_inverse(F: FieldData, f: NfIdeal, x: RhoImage) -> RhoImage:
    k = rho_order(F, f, x)
    out = RhoImage(elem_mod(F.one(), f), (1,) * F.r1)
    for _ in range(k - 1):
        out = rho_mul(F, f, out, x)
    return out


def _class_law(F: FieldData, data: NarrowClassGroupData, i: int, j: int) -> tuple[int, RhoImage]:
    """(k, correction) with c_i c_j = c_k and label(ab) = (k, r_a r_b * correction).

    d_i d_j = d_k (gamma); the correction is rho(gamma)^{-1} = rho(N(d_k)) rho(eps)^{-1}, where
    eps generates d_i d_j N(d_k) d_k^{-1}.
    """
    key = (i, j)
    if key in data._law:
        return data._law[key]
    f = data.modulus
    di, dj = _inverse_rep_coprime(F, data, i), _inverse_rep_coprime(F, data, j)
    # class of a b is the inverse of the class of d_i d_j
    k = class_of(F, inverse_class_ideal(ideal_mul(di, dj))).index
    dk = _inverse_rep_coprime(F, data, k)
    e = ideal_mul(ideal_mul(di, dj), inverse_class_ideal(dk))
    eps = is_principal(F, e)
    if eps is None:
        raise ArithmeticError("d_i d_j / d_k is not principal (inconsistent class data)")
    corr = rho_mul(F, f, rho(F, F.scale(F.one(), dk.norm), f), rho_inverse(F, f, rho(F, eps, f)))
    data._law[key] = (k, corr)
    return data._law[key]


def label_mul(F: FieldData, data: NarrowClassGroupData, x: tuple[int, RhoImage], y: tuple[int, RhoImage]):
    k, corr = _class_law(F, data, x[0], y[0])
    f = data.modulus
    return k, data.canonical(rho_mul(F, f, rho_mul(F, f, x[1], y[1]), corr))


def ideal_labels(F: FieldData, ideals, data: NarrowClassGroupData) -> list[tuple[int, RhoImage]]:
    """Narrow class labels of many ideals, from their factorizations and the labels of primes."""
    one = (class_of(F, NfIdeal.unit_ideal(F)).index, data.canonical(RhoImage(elem_mod(F.one(), data.modulus), (1,) * F.r1)))
    prime_lab: dict = {}
    out = []
    for I in ideals:
        if not is_coprime(I, data.modulus):
            raise NotCoprime(f"{I} is not coprime to the modulus")
        lab = one
        for P, e in factor_ideal(I):
            if P not in prime_lab:
                prime_lab[P] = narrow_class_label(F, P.ideal, data)
            for _ in range(e):
                lab = label_mul(F, data, lab, prime_lab[P])
        out.append(lab)
    return out
