"""Exact lattice-point counts in fundamental-domain slices and the counting certificate.

The lattice is phi(a f) (optionally translated by phi(f') with f' in a, f' = f mod f, and
optionally twisted by a partition cell). Points are enumerated with a Fincke-Pohst traversal of
the ellipsoid sum_i |x_i|^2 / B_i^2 <= r1 + r2, which contains the box |x_i| <= B_i enclosing
the slice, and then classified exactly by :func:`minkowski.classify_batch`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mp

from . import intlin
from .errors import CoprimalityError, ScaleLimitExceeded
from .field_data import Coords, FieldData, _lll
from .minkowski import (
    DEFAULT_TAU_MEM,
    DomainSpec,
    PartitionCell,
    as_fraction,
    classify_batch,
    partition_cells,
    place_bounds,
)
from .nf_arith import NfElement, NfIdeal, crt_lift, ideal_mul, inverse_class_ideal, is_coprime

ENUM_POINT_LIMIT = 5_000_000
DESK_X_LIMIT = 10**7


@dataclass(frozen=True)
class IdealLattice:
    """phi(ideal) + phi(translation), optionally multiplied by a cell twist beta_k."""

    field: FieldData = field(repr=False)
    ideal: NfIdeal
    translation: Coords | None = None
    cell_twist: PartitionCell | None = None

    @property
    def basis_embedded(self) -> np.ndarray:
        """n x n real matrix: rows are embedded HNF basis vectors, complex places split into (Re, Im)."""
        F = self.field
        return real_embedding(F, np.array(self.ideal.hnf, dtype=float), self.cell_twist)

    @property
    def det(self) -> mpmath.mpf:
        F = self.field
        with mp.workprec(F.precision):
            return mpmath.mpf(2) ** (-F.r2) * mpmath.sqrt(abs(F.disc)) * self.ideal.norm

    def det_check(self, rel: float = 1e-9) -> bool:
        d = abs(np.linalg.det(self.basis_embedded))
        return abs(d - float(self.det)) <= rel * float(self.det)

    def walls(self, D: DomainSpec) -> tuple[tuple[Fraction, Fraction], ...]:
        """Unit-coordinate intervals for the untwisted elements (twist undone by shifting walls)."""
        if self.cell_twist is None:
            return D.box
        sh = self.cell_twist.shift(self.field)
        return tuple((a - s, b - s) for (a, b), s in zip(D.box, sh))


def real_embedding(F: FieldData, coords: np.ndarray, twist: PartitionCell | None = None) -> np.ndarray:
    emb = F.float_embed(coords)
    if twist is not None:
        emb = emb * np.array([complex(b) for b in twist.beta.coords])[None, :]
    cols = [emb[:, i].real for i in range(F.r1)]
    for i in range(F.r1, F.n_places):
        cols += [emb[:, i].real, emb[:, i].imag]
    return np.stack(cols, axis=1)


@dataclass
class EnumerationResult:
    lo: int
    hi: int
    points: np.ndarray  # integer O_K coordinates of the inside points
    uncertain: np.ndarray

    @property
    def interval(self) -> tuple[int, int]:
        return (self.lo, self.hi)


@dataclass
class CountCertificate:
    field_name: str
    a: tuple
    f: tuple
    f_elem: Coords
    eta: tuple | None
    t: float
    exact_lo: int
    exact_hi: int
    main_term: float
    error_bound: float
    slack: float
    passed: bool
    deviation: float
    frak_N: float
    minima: list = field(default_factory=list)

    @property
    def pass_(self) -> bool:
        return self.passed

    def row(self) -> dict:
        return {
            "field": self.field_name,
            "a": _hnf_str(self.a),
            "f": _hnf_str(self.f),
            "f_elem": " ".join(map(str, self.f_elem)),
            "eta": "all" if self.eta is None else "".join("+" if s > 0 else "-" for s in self.eta),
            "t": f"{self.t:.12g}",
            "exact_lo": self.exact_lo,
            "exact_hi": self.exact_hi,
            "main": f"{self.main_term:.12g}",
            "deviation": f"{self.deviation:.12g}",
            "log10_bound": f"{math.log10(self.error_bound):.6f}" if self.error_bound > 0 else "-inf",
            "log10_slack": f"{math.log10(self.slack):.6f}" if 0 < self.slack < math.inf else str(self.slack),
            "pass": self.passed,
        }


def _hnf_str(h) -> str:
    return ";".join(" ".join(map(str, r)) for r in h)


def certificates_csv(certs: Sequence[CountCertificate]) -> str:
    buf = io.StringIO()
    rows = [c.row() for c in certs]
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------- Fincke-Pohst


def _fincke_pohst(W: np.ndarray, center: np.ndarray, R: float, limit: int) -> np.ndarray:
    """All integer v with ||(v - center) W||^2 <= R (rows of W are the basis)."""
    n = W.shape[0]
    G = W @ W.T
    # G = U^T D U with U unit upper triangular: q[i][i] = D_i, q[i][j] = U_ij for j > i
    q = np.zeros((n, n))
    A = G.copy()
    for i in range(n):
        q[i, i] = A[i, i]
        for j in range(i + 1, n):
            q[i, j] = A[i, j] / A[i, i]
        for j in range(i + 1, n):
            for k in range(j, n):
                A[j, k] -= q[i, j] * q[i, k] * q[i, i]
                A[k, j] = A[j, k]
    out: list[np.ndarray] = []
    count = 0
    x = np.zeros(n)
    pad = 1e-9 * (1 + R)

    def rec(i: int, rem: float) -> None:
        nonlocal count
        c = center[i] - sum(q[i, j] * (x[j] - center[j]) for j in range(i + 1, n))
        half = math.sqrt(max(rem, 0.0) / q[i, i]) + 1e-9
        lo, hi = math.ceil(c - half), math.floor(c + half)
        if lo > hi:
            return
        if i == 0:
            vals = np.arange(lo, hi + 1)
            block = np.tile(x, (len(vals), 1))
            block[:, 0] = vals
            out.append(block)
            count += len(vals)
            if count > limit:
                raise ScaleLimitExceeded(f"enumeration exceeded {limit} candidate points")
            return
        for v in range(lo, hi + 1):
            x[i] = v
            rec(i - 1, rem - q[i, i] * (v - c) ** 2)
        x[i] = 0

    rec(n - 1, R + pad)
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    return np.rint(np.concatenate(out)).astype(np.int64)


def lattice_points_in_ellipsoid(
    F: FieldData, basis: Sequence[Sequence[int]], translation: Sequence[int] | None, scales: np.ndarray, R: float,
    limit: int = ENUM_POINT_LIMIT,
) -> np.ndarray:
    """O_K coordinates of t + v B with sum_k (y_k / s_k)^2 <= R, y the real embedding coordinates.

    ``scales`` has one entry per place; complex places use it for both real coordinates.
    """
    B = np.array(basis, dtype=np.int64)
    t = np.zeros(F.n, dtype=np.int64) if translation is None else np.array(translation, dtype=np.int64)
    s = np.concatenate([scales[: F.r1]] + [[scales[i], scales[i]] for i in range(F.r1, F.n_places)])
    W = real_embedding(F, B.astype(float)) / s[None, :]
    T = real_embedding(F, t[None, :].astype(float))[0] / s
    U = _lll(W).astype(np.int64)
    W2 = U @ W
    B2 = U @ B
    center = -np.linalg.solve(W2.T, T)
    vs = _fincke_pohst(W2, center, R, limit)
    return t[None, :] + vs @ B2


# ---------------------------------------------------------------------- enumeration


def enumerate_in_domain(
    Lat: IdealLattice, D: DomainSpec, tau_mem=DEFAULT_TAU_MEM, limit: int = ENUM_POINT_LIMIT
) -> EnumerationResult:
    """Exact count of lattice points in the slice, as an interval [lo, hi]."""
    F = Lat.field
    if D.X > DESK_X_LIMIT * max(1, Lat.ideal.norm):
        raise ScaleLimitExceeded(f"X = {float(D.X):.4g} beyond the desk-scale limit")
    walls = Lat.walls(D)
    Bnd = place_bounds(F, walls, D.X)
    pts = lattice_points_in_ellipsoid(F, Lat.ideal.hnf, Lat.translation, Bnd, float(F.n_places), limit)
    if len(pts) == 0:
        z = np.zeros((0, F.n), dtype=np.int64)
        return EnumerationResult(0, 0, z, z)
    status, _ = classify_batch(F, pts, walls, D.X, D.half, D.signs, tau_mem)
    inside = pts[status == 1]
    unc = pts[status == 2]
    return EnumerationResult(len(inside), len(inside) + len(unc), inside, unc)


def translated_lattice(F: FieldData, a: NfIdeal, f_ideal: NfIdeal, f_elem, twist: PartitionCell | None = None) -> IdealLattice:
    """The set {alpha in a : alpha = f mod f_ideal} as phi(a f) + phi(f')."""
    if not is_coprime(a, f_ideal):
        raise CoprimalityError("a and f must be coprime")
    af = ideal_mul(a, f_ideal)
    f_elem = f_elem.coords if isinstance(f_elem, NfElement) else tuple(f_elem)
    if f_ideal.is_unit_ideal():
        return IdealLattice(F, af, None, twist)
    fp = crt_lift(a, f_ideal, f_elem)
    return IdealLattice(F, af, None if not any(fp) else fp, twist)


def count_in_domain(Lat: IdealLattice, D: DomainSpec, tau_mem=DEFAULT_TAU_MEM) -> tuple[int, int]:
    return enumerate_in_domain(Lat, D, tau_mem).interval


# ---------------------------------------------------------------------- successive minima


def successive_minima(Lat: IdealLattice, i_max: int | None = None) -> list[float]:
    """lambda_1 <= ... <= lambda_{i_max} of the (untranslated, possibly twisted) lattice."""
    F = Lat.field
    n = F.n
    i_max = n if i_max is None else i_max
    B = np.array(Lat.ideal.hnf, dtype=np.int64)
    W = real_embedding(F, B.astype(float), Lat.cell_twist)
    U = _lll(W).astype(np.int64)
    W2, B2 = U @ W, U @ B
    R = float(np.max(np.sum(W2 * W2, axis=1))) * (1 + 1e-9)
    vs = _fincke_pohst(W2, np.zeros(n), R, ENUM_POINT_LIMIT)
    vs = vs[np.any(vs != 0, axis=1)]
    lens = np.sum((vs @ W2) ** 2, axis=1)
    order = np.argsort(lens, kind="stable")
    chosen: list[list[int]] = []
    minima: list[float] = []
    for idx in order:
        v = [int(c) for c in vs[idx] @ B2]
        if intlin.rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            minima.append(math.sqrt(lens[idx]))
            if len(minima) == i_max:
                break
    return minima


def minkowski_second_bound(F: FieldData, det) -> float:
    """(2^n / pi^{n/2}) Gamma(1 + n/2) det: an upper bound for lambda_1^n."""
    n = F.n
    return 2**n / math.pi ** (n / 2) * math.gamma(1 + n / 2) * float(det)


def widmer_error_bound(M: int, L: float, t: float, minima: Sequence[float], n: int) -> mpmath.mpf:
    """M n^{3n^2/2} max_{0 <= i < n} (L t)^i / (lambda_1 ... lambda_i)."""
    if not minima or any(m <= 0 for m in minima):
        raise ValueError("minima must be nonempty and positive")
    Lt = mpmath.mpf(L) * t
    best, prod = mpmath.mpf(1), mpmath.mpf(1)
    for i in range(1, n):
        prod *= minima[min(i - 1, len(minima) - 1)]
        best = max(best, Lt**i / prod)
    return M * mpmath.mpf(n) ** (mpmath.mpf(3) * n * n / 2) * best


# ---------------------------------------------------------------------- the certificate


def main_term(F: FieldData, norm_af: int, X) -> mpmath.mpf:
    """(2 pi)^{r2} Reg t^n / (sqrt|disc| N(a f)) with X = t^n."""
    with mp.workprec(F.precision):
        X = mpmath.mpf(as_fraction(X).numerator) / as_fraction(X).denominator
        return (2 * mpmath.pi) ** F.r2 * F.reg_convention * X / (mpmath.sqrt(abs(F.disc)) * norm_af)


def theorem3_error_bound(F: FieldData, norm_af: int, frakN, t, f_is_unit: bool) -> mpmath.mpf:
    n = F.n
    with mp.workprec(F.precision):
        t = mpmath.mpf(t)
        err = (
            mpmath.mpf(n) ** (mpmath.mpf(3) * n * n / 2)
            * mpmath.e ** (4 * n * n)
            * frakN
            * t ** (n - 1)
            / mpmath.mpf(norm_af) ** (mpmath.mpf(n - 1) / n)
        )
        if not f_is_unit:
            err += F.unit_product
        return err


def _t_to_X(t, n: int) -> Fraction:
    return as_fraction(t) ** n


def theorem3_certificate(
    F: FieldData,
    a: NfIdeal,
    f_ideal: NfIdeal,
    f_elem,
    eta: Sequence[int] | None,
    t,
    tau_mem=DEFAULT_TAU_MEM,
    X=None,
) -> CountCertificate:
    """Count alpha in a, alpha = f mod f, phi(alpha) in F_eta(t^n); compare with the main term.

    ``X`` may be given instead of ``t`` to fix t^n exactly (t is then X^{1/n}).
    """
    from .ideal_census import class_of, frak_N

    f_coords = f_elem.coords if isinstance(f_elem, NfElement) else tuple(f_elem)
    if not is_coprime(a, f_ideal):
        raise CoprimalityError("a and f must be coprime")
    if not f_ideal.is_unit_ideal() and not is_coprime(f_coords, f_ideal):
        raise CoprimalityError("f must be coprime to the modulus")
    n = F.n
    if X is None:
        X = _t_to_X(t, n)
        t_val = float(t)
    else:
        X = as_fraction(X)
        t_val = float(X) ** (1.0 / n)
    Lat = translated_lattice(F, a, f_ideal, f_coords)
    if X == 0:
        lo = hi = 0
    else:
        D = DomainSpec.full(F, X, False, eta)
        lo, hi = enumerate_in_domain(Lat, D, tau_mem).interval
    af = Lat.ideal
    # eta = None counts the union over all 2^{r1} sign patterns, each with its own main term and error
    patterns = 2**F.r1 if eta is None else 1
    main = patterns * main_term(F, af.norm, X)
    inv_class = class_of(F, inverse_class_ideal(af))
    fN = frak_N(F, inv_class)
    bound = patterns * theorem3_error_bound(F, af.norm, fN, t_val, f_ideal.is_unit_ideal())
    dev = max(abs(lo - main), abs(hi - main))
    passed = bool(dev <= bound)
    slack = float(bound / dev) if dev > 0 else math.inf
    return CountCertificate(
        F.name, a.hnf, f_ideal.hnf, f_coords, None if eta is None else tuple(eta), t_val,
        lo, hi, float(main), float(bound), slack, passed, float(dev), float(fN),
    )


# ---------------------------------------------------------------------- the identities


def schmidt_identity(Lat: IdealLattice, X, signs=None, tau_mem=DEFAULT_TAU_MEM) -> tuple[tuple[int, int], list[tuple[int, int]]]:
    """(count on the half slice F_{1/2, eta}(X), per-cell counts on the small half slice).

    The partition identity says the first equals the sum of the second.
    """
    F = Lat.field
    direct = enumerate_in_domain(Lat, DomainSpec.full(F, X, True, signs), tau_mem).interval
    small = DomainSpec.small_box(F, X, True, signs)
    per_cell = []
    for cell in partition_cells(F):
        tw = IdealLattice(F, Lat.ideal, Lat.translation, cell)
        per_cell.append(enumerate_in_domain(tw, small, tau_mem).interval)
    return direct, per_cell


def dyadic_identity(Lat: IdealLattice, X, signs=None, tau_mem=DEFAULT_TAU_MEM) -> tuple[tuple[int, int], list[tuple[int, int]]]:
    """(count on F(X), counts on the half slices F_{1/2}(X / 2^m), m = 0, 1, ... while X / 2^m >= 1)."""
    F = Lat.field
    X = as_fraction(X)
    direct = enumerate_in_domain(Lat, DomainSpec.full(F, X, False, signs), tau_mem).interval
    shells = []
    Y = X
    while Y >= 1:
        shells.append(enumerate_in_domain(Lat, DomainSpec.full(F, Y, True, signs), tau_mem).interval)
        Y = Y / 2
    return direct, shells


def interval_sum(parts: Sequence[tuple[int, int]]) -> tuple[int, int]:
    return sum(p[0] for p in parts), sum(p[1] for p in parts)
