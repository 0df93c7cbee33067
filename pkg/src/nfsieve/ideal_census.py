"""Ideal counts by norm, overall and per ideal class, and the class-dependent factor N(C).

Principality is decided by lattice search: a is principal iff some alpha in a has
|N(alpha)| = N(a), and such an alpha (up to units) lies in the fundamental domain F(N(a)), so the
box enclosing that slice is searched and every candidate's norm is recomputed exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from .errors import ScaleLimitExceeded
from .field_data import Coords, FieldData
from .lattice_count import lattice_points_in_ellipsoid
from .minkowski import place_bounds
from .nf_arith import NfIdeal, ideal_mul, ideals_of_norm_up_to, inverse_class_ideal

PRINCIPAL_NORM_LIMIT = 10**9


@dataclass(frozen=True, order=True)
class ClassTag:
    index: int


def is_principal(F: FieldData, a: NfIdeal) -> Coords | None:
    """A generator of a, or None if a is not principal."""
    N = a.norm
    if N == 1:
        return F.one()
    if N > PRINCIPAL_NORM_LIMIT:
        raise ScaleLimitExceeded(f"N(a) = {N} beyond the principality search limit")
    walls = tuple((Fraction(0), Fraction(1)) for _ in range(F.r))
    # slightly enlarged so elements sitting on a wall of the slice are not lost
    B = place_bounds(F, walls, N) * (1 + 1e-9)
    pts = lattice_points_in_ellipsoid(F, a.hnf, None, B, float(F.n_places))
    if len(pts) == 0:
        return None
    emb = np.abs(F.float_embed(pts))
    e = np.array(F.e_weights, dtype=float)
    with np.errstate(divide="ignore"):
        normf = np.exp(np.log(emb) @ e)
    cand = np.nonzero(np.abs(normf - N) < 0.5)[0]
    for idx in cand[np.argsort(np.abs(normf[cand] - N), kind="stable")]:
        alpha = tuple(int(v) for v in pts[idx])
        if abs(F.norm(alpha)) == N:
            return alpha
    return None


def _inverse_reps(F: FieldData) -> tuple[NfIdeal, ...]:
    if "inverse_reps" not in F._cache:
        F._cache["inverse_reps"] = tuple(inverse_class_ideal(c) for c in F.class_rep_ideals)
    return F._cache["inverse_reps"]


def class_of(F: FieldData, a: NfIdeal) -> ClassTag:
    """Index of the representative c_i with a c_i^{-1} principal."""
    if F.class_number == 1:
        return ClassTag(0)
    cache = F._cache.setdefault("class_of", {})
    if a.hnf in cache:
        return cache[a.hnf]
    for i, d in enumerate(_inverse_reps(F)):
        if is_principal(F, ideal_mul(a, d)) is not None:
            cache[a.hnf] = ClassTag(i)
            return cache[a.hnf]
    raise ArithmeticError(f"{a} matches no class representative (inconsistent class data)")


def classes_distinct(F: FieldData) -> bool:
    reps = F.class_rep_ideals
    inv = _inverse_reps(F)
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if is_principal(F, ideal_mul(reps[i], inv[j])) is not None:
                return False
    return True


def inverse_class(F: FieldData, C: ClassTag) -> ClassTag:
    return class_of(F, _inverse_reps(F)[C.index])


def ideals_in_class(F: FieldData, C: ClassTag, count: int) -> list[NfIdeal]:
    """The first ``count`` integral ideals of class C in (norm, HNF) order."""
    x = max(8, 4 * count * F.class_number)
    while True:
        out = [I for I in ideals_of_norm_up_to(F, x) if class_of(F, I) == C]
        if len(out) >= count:
            return out[:count]
        x *= 2


def frak_N(F: FieldData, C: ClassTag) -> mpmath.mpf:
    """Sum of N(b_i)^{-(n-1)/n} over the first m_1...m_r ideals b_i of class C."""
    y = F.unit_product
    with mp.workprec(F.precision):
        ex = mpmath.mpf(F.n - 1) / F.n
        return mpmath.fsum(mpmath.mpf(I.norm) ** (-ex) for I in ideals_in_class(F, C, y))


def lemma9_sum(F: FieldData, y: int) -> mpmath.mpf:
    """sum_{i <= y} N(b_i)^{-(n-1)/n} over all integral ideals in norm order."""
    return lemma9_partial_sums(F, y)[y - 1]


def lemma9_partial_sums(F: FieldData, ymax: int) -> list[mpmath.mpf]:
    x = max(8, 2 * ymax)
    while True:
        norms = [I.norm for I in ideals_of_norm_up_to(F, x)]
        if len(norms) >= ymax:
            break
        x *= 2
    with mp.workprec(F.precision):
        ex = mpmath.mpf(F.n - 1) / F.n
        out, acc = [], mpmath.mpf(0)
        for N in norms[:ymax]:
            acc += mpmath.mpf(N) ** (-ex)
            out.append(+acc)
        return out


def lemma9_bound(n: int, y) -> mpmath.mpf:
    """6 n y^{1/n} (log y)^{(n-1)^2/n}, stated for y >= 2."""
    y = mpmath.mpf(y)
    return 6 * n * y ** (mpmath.mpf(1) / n) * mpmath.log(y) ** (mpmath.mpf((n - 1) ** 2) / n)


def census_constant(n: int, reg_h) -> mpmath.mpf:
    """n^{10 n^2} (Reg h)^{1/n} (1 + log Reg h)^{(n-1)^2/n}."""
    reg_h = mpmath.mpf(reg_h)
    base = 1 + mpmath.log(reg_h)
    if base <= 0:
        raise ValueError(f"1 + log(Reg h) = {base} <= 0: the constant is undefined")
    return mpmath.mpf(n) ** (10 * n * n) * reg_h ** (mpmath.mpf(1) / n) * base ** (mpmath.mpf((n - 1) ** 2) / n)


@dataclass
class CensusReport:
    field_name: str
    x: int
    total: int
    per_class: list[int]
    main_total: float
    main_class: float
    log10_bound_total: float
    log10_bound_class: float
    pass_total: bool
    pass_class: list[bool]
    empirical_ratio: float  # |total - kappa x| / x^{1 - 1/n}
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.pass_total and all(self.pass_class)

    def rows(self) -> list[dict]:
        out = [
            {
                "field": self.field_name, "x": self.x, "class": "all", "exact": self.total,
                "main": f"{self.main_total:.12g}", "deviation": f"{abs(self.total - self.main_total):.12g}",
                "log10_bound": f"{self.log10_bound_total:.6f}", "pass": self.pass_total,
            }
        ]
        for i, (b, ok) in enumerate(zip(self.per_class, self.pass_class)):
            out.append(
                {
                    "field": self.field_name, "x": self.x, "class": i, "exact": b,
                    "main": f"{self.main_class:.12g}", "deviation": f"{abs(b - self.main_class):.12g}",
                    "log10_bound": f"{self.log10_bound_class:.6f}", "pass": ok,
                }
            )
        return out


def census(F: FieldData, x: int) -> CensusReport:
    """Exact ideal counts up to x against kappa x and kappa x / h with the explicit constants."""
    x = int(x)
    if x < 1:
        raise ValueError("x >= 1 required")
    per = [0] * F.class_number
    total = 0
    for I in ideals_of_norm_up_to(F, x):
        total += 1
        per[class_of(F, I).index] += 1
    n = F.n
    with mp.workprec(F.precision):
        kappa = F.residue
        reg, h = F.reg_convention, F.class_number
        scale = mpmath.mpf(x) ** (1 - mpmath.mpf(1) / n)
        bt = census_constant(n, reg * h) * scale
        bc = census_constant(n, reg) * scale
        main_t = kappa * x
        main_c = kappa * x / h
        pass_t = bool(abs(total - main_t) <= bt)
        pass_c = [bool(abs(b - main_c) <= bc) for b in per]
        ratio = float(abs(total - main_t) / scale)
        return CensusReport(
            F.name, x, total, per, float(main_t), float(main_c), float(mpmath.log10(bt)), float(mpmath.log10(bc)),
            pass_t, pass_c, ratio,
        )


def census_csv(reports: list[CensusReport]) -> str:
    rows = [r for rep in reports for r in rep.rows()]
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def count_ideals_in_class_by_elements(F: FieldData, C: ClassTag, x: int) -> Fraction:
    """(1/w) #{alpha in b : phi(alpha) in F(x N(b))} with b an integral ideal of the inverse class.

    An independent route to the per-class count, through principal ideals inside b.
    """
    from .lattice_count import IdealLattice, enumerate_in_domain
    from .minkowski import DomainSpec

    b = _inverse_reps(F)[C.index]
    res = enumerate_in_domain(IdealLattice(F, b), DomainSpec.full(F, x * b.norm))
    if res.lo != res.hi:
        raise ArithmeticError("boundary-uncertain points in an element count")
    return Fraction(res.lo, F.roots_of_unity)
