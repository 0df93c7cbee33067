"""Minkowski space: log coordinates, fundamental-domain slices, partition cells, the cell integral.

A point x in R^{r1} x C^{r2} has norm N(x) = prod |x_i|^{e_i} and log coordinates (xi, xi_1..xi_r)
defined by

    log |x_i| = log(xi)/n + sum_j xi_j log |sigma_i(eps_j)|,

solved on the first r places. The slice F(a_1, b_1, ..., a_r, b_r; X) keeps 0 < xi <= X (or
X/2 < xi <= X for the half slice) and a_j <= xi_j < b_j; a sign vector eta restricts the real
coordinates.

Membership is decided in three stages. A float64 pass handles almost every point. Points whose
xi_j lie within ``FLOAT_GUARD`` of a wall are recomputed with mpmath at the field precision.
Points still within ``tau_mem`` of a wall get an exact test: when all xi_j are (numerically)
rationals P_j/Q, they are exactly those rationals iff gamma = alpha^{nQ} prod eps_j^{-n P_j}
has |sigma_i(gamma)| = N^Q at every place. With a real place that is gamma^2 = N^{2Q}; for a
totally complex field with a complex-conjugation automorphism c it is gamma c(gamma) = N^{2Q}. Anything that
survives all three stages is reported as boundary_uncertain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mp

from .errors import SingularSystem
from .field_data import Coords, FieldData

INSIDE, OUTSIDE, UNCERTAIN = "inside", "outside", "boundary_uncertain"
DEFAULT_TAU_MEM = mpmath.mpf(2) ** -80
FLOAT_GUARD = 1e-8

_STATUS_CODE = {OUTSIDE: 0, INSIDE: 1, UNCERTAIN: 2}


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, mpmath.mpf):
        return Fraction(mpmath.nstr(v, 45))
    return Fraction(v) if not isinstance(v, str) else Fraction(v)


@dataclass(frozen=True)
class MinkowskiPoint:
    """A point of R^{r1} x C^{r2}.

    ``source`` keeps the algebraic integer the point came from (if any) and ``shift`` records
    the change of the unit coordinates xi_j caused by partition-cell twists, so that exact
    wall tests stay available for twisted points.
    """

    coords: tuple
    e_weights: tuple[int, ...]
    source: Coords | None = None
    shift: tuple[Fraction, ...] = ()

    def norm(self) -> mpmath.mpf:
        out = mpmath.mpf(1)
        for z, e in zip(self.coords, self.e_weights):
            out *= abs(z) ** e
        return out

    def euclidean_norm(self) -> mpmath.mpf:
        return mpmath.sqrt(sum(abs(z) ** 2 for z in self.coords))

    @classmethod
    def from_element(cls, F: FieldData, a: Sequence[int]) -> "MinkowskiPoint":
        a = tuple(int(v) for v in a)
        return cls(tuple(F.embed_hp(a)[: F.n_places]), F.e_weights, a, (Fraction(0),) * F.r)


@dataclass(frozen=True)
class DomainSpec:
    """F_{eta}(a_1, b_1, ..., a_r, b_r; X), optionally the half slice X/2 < xi <= X."""

    box: tuple[tuple[Fraction, Fraction], ...]
    X: Fraction
    half: bool = False
    signs: tuple[int, ...] | None = None

    def __post_init__(self):
        box = tuple((as_fraction(a), as_fraction(b)) for a, b in self.box)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "X", as_fraction(self.X))
        for a, b in box:
            if not (0 <= a < b <= 1):
                raise ValueError(f"need 0 <= a < b <= 1, got [{a}, {b})")
        if self.X <= 0:
            raise ValueError("X must be positive")
        if self.signs is not None:
            object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
            if any(s not in (1, -1) for s in self.signs):
                raise ValueError("signs must be +1 / -1")

    @classmethod
    def full(cls, F: FieldData, X, half: bool = False, signs=None) -> "DomainSpec":
        return cls(tuple((Fraction(0), Fraction(1)) for _ in range(F.r)), X, half, signs)

    @classmethod
    def small_box(cls, F: FieldData, X, half: bool = False, signs=None) -> "DomainSpec":
        """F(0, 1/m_1, ..., 0, 1/m_r; X), the target slice of the partition identity."""
        return cls(tuple((Fraction(0), Fraction(1, m)) for m in F.unit_bounds), X, half, signs)

    def with_X(self, X, half: bool | None = None) -> "DomainSpec":
        return DomainSpec(self.box, X, self.half if half is None else half, self.signs)


@dataclass(frozen=True)
class PartitionCell:
    k: tuple[int, ...]
    beta: MinkowskiPoint

    def shift(self, F: FieldData) -> tuple[Fraction, ...]:
        return tuple(Fraction(-kj, m) for kj, m in zip(self.k, F.unit_bounds))


# ---------------------------------------------------------------------- log coordinates


def _unit_matrix_hp(F: FieldData) -> mpmath.matrix:
    key = ("unit_matrix_hp", F.precision)
    if key not in F._cache:
        with mp.workprec(F.precision):
            F._cache[key] = mpmath.matrix([[F.unit_logs[i][j] for j in range(F.r)] for i in range(F.r)])
    return F._cache[key]


def _unit_matrix_inv_float(F: FieldData) -> np.ndarray:
    if "unit_matrix_inv" not in F._cache:
        A = F.unit_logs_float[: F.r, :]
        if F.r and np.linalg.cond(A) > 1e12:
            raise SingularSystem(f"unit log matrix has condition number {np.linalg.cond(A):.3g}")
        F._cache["unit_matrix_inv"] = np.linalg.inv(A) if F.r else np.zeros((0, 0))
    return F._cache["unit_matrix_inv"]


def unit_matrix_condition(F: FieldData) -> float:
    return float(np.linalg.cond(F.unit_logs_float[: F.r, :])) if F.r else 1.0


def log_coords(F: FieldData, x: MinkowskiPoint) -> tuple[mpmath.mpf, tuple[mpmath.mpf, ...]]:
    """(xi, (xi_1, ..., xi_r)) of a point; shifts from cell twists are included."""
    with mp.workprec(F.precision):
        if any(z == 0 for z in x.coords):
            raise ValueError("log coordinates need all |x_i| > 0")
        xi = x.norm()
        if F.r == 0:
            return +xi, ()
        rhs = mpmath.matrix([mpmath.log(abs(x.coords[i])) - mpmath.log(xi) / F.n for i in range(F.r)])
        A = _unit_matrix_hp(F)
        try:
            sol = mpmath.lu_solve(A, rhs)
        except ZeroDivisionError as exc:
            raise SingularSystem("unit log matrix is singular") from exc
        # for twisted points the shift is already part of the coordinates
        return +xi, tuple(+sol[j] for j in range(F.r))


def exp_coords(F: FieldData, xi, xi_vec) -> list[mpmath.mpf]:
    """|x_i| from log coordinates (inverse of :func:`log_coords` up to arguments)."""
    with mp.workprec(F.precision):
        return [
            mpmath.exp(mpmath.log(xi) / F.n + sum(xi_vec[j] * F.unit_logs[i][j] for j in range(F.r)))
            for i in range(F.n_places)
        ]


# ---------------------------------------------------------------------- membership


def _exact_log_coords(F: FieldData, alpha: Coords, approx: Sequence, tau) -> tuple[Fraction, ...] | None:
    """Exact rational xi_j(alpha) if they are rational with small denominators, else None."""
    lcm = 1
    for m in F.unit_bounds:
        lcm = lcm * m // math.gcd(lcm, m)
    dmax = 24 * lcm * F.n
    snapped = []
    for v in approx:
        fr = as_fraction(v).limit_denominator(dmax)
        if abs(mpmath.mpf(fr.numerator) / fr.denominator - v) > tau:
            return None
        snapped.append(fr)
    Q = 1
    for fr in snapped:
        Q = Q * fr.denominator // math.gcd(Q, fr.denominator)
    N = abs(F.norm(alpha))
    if N == 0:
        return None
    gamma = F.power(alpha, F.n * Q)
    for fr, eps in zip(snapped, F.fundamental_units):
        P = fr.numerator * (Q // fr.denominator)
        gamma = F.mul(gamma, F.power(eps, -F.n * P))
    # |sigma_i(gamma)| = N^Q at every place is equivalent to the xi_j being these rationals
    target = F.scale(F.one(), N ** (2 * Q))
    if F.r1 > 0:
        # a real place is injective and sigma_1(gamma) = +-N^Q forces gamma = +-N^Q
        ok = F.mul(gamma, gamma) == target
    elif F.complex_conjugation is not None:
        ok = F.mul(gamma, F.conjugate(gamma)) == target
    else:
        return None
    return tuple(snapped) if ok else None


def _wall_status(vals: Sequence, walls: Sequence[tuple[Fraction, Fraction]], tau) -> str:
    """Compare coordinates against half-open intervals [a, b); UNCERTAIN if within tau of a wall."""
    status = INSIDE
    for v, (a, b) in zip(vals, walls):
        da = v - mpmath.mpf(a.numerator) / a.denominator
        db = v - mpmath.mpf(b.numerator) / b.denominator
        if abs(da) <= tau or abs(db) <= tau:
            status = UNCERTAIN
            continue
        if da < 0 or db > 0:
            return OUTSIDE
    return status


def _exact_wall_status(vals: Sequence[Fraction], walls) -> str:
    for v, (a, b) in zip(vals, walls):
        if not (a <= v < b):
            return OUTSIDE
    return INSIDE


def _norm_status(N: int, X: Fraction, half: bool) -> bool:
    if N <= 0 or N > X:
        return False
    return not (half and 2 * N <= X)


def in_domain(F: FieldData, x: MinkowskiPoint, D: DomainSpec, tau_mem=DEFAULT_TAU_MEM) -> str:
    """inside / outside / boundary_uncertain for a single point."""
    with mp.workprec(F.precision):
        if D.signs is not None:
            for i, s in enumerate(D.signs):
                re = mpmath.re(x.coords[i])
                if abs(re) <= tau_mem:
                    return UNCERTAIN
                if (re > 0) != (s > 0):
                    return OUTSIDE
        if x.source is not None:
            N = abs(F.norm(x.source))
            if not _norm_status(N, D.X, D.half):
                return OUTSIDE
        else:
            xi = x.norm()
            lo = D.X / 2 if D.half else Fraction(0)
            st = _wall_status([xi], [(lo, D.X)], tau_mem)
            # the norm interval is (lo, X]: flip the half-open convention
            if st == UNCERTAIN:
                return UNCERTAIN
            if not (mpmath.mpf(lo.numerator) / lo.denominator < xi <= mpmath.mpf(D.X.numerator) / D.X.denominator):
                return OUTSIDE
        if F.r == 0:
            return INSIDE
        _, vec = log_coords(F, x)
        st = _wall_status(vec, D.box, tau_mem)
        if st != UNCERTAIN or x.source is None:
            return st
        base = [v - mpmath.mpf(s.numerator) / s.denominator for v, s in zip(vec, x.shift or (0,) * F.r)]
        exact = _exact_log_coords(F, x.source, base, tau_mem)
        if exact is None:
            return UNCERTAIN
        shifted = [e + s for e, s in zip(exact, x.shift or (Fraction(0),) * F.r)]
        return _exact_wall_status(shifted, D.box)


def classify_batch(
    F: FieldData,
    elems: np.ndarray,
    walls: Sequence[tuple[Fraction, Fraction]],
    X: Fraction,
    half: bool,
    signs: Sequence[int] | None,
    tau_mem=DEFAULT_TAU_MEM,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised membership for integer coordinate rows ``elems`` (shape (N, n)).

    ``walls`` are the intervals for the unit coordinates of the elements themselves (a cell
    twist is applied by shifting the walls). Returns (status codes, exact |norms|).
    """
    elems = np.asarray(elems, dtype=np.int64).reshape(-1, F.n)
    m = elems.shape[0]
    status = np.zeros(m, dtype=np.int8)
    if m == 0:
        return status, np.zeros(0, dtype=np.int64)
    emb = F.float_embed(elems)
    absv = np.abs(emb)
    e = np.array(F.e_weights, dtype=float)
    with np.errstate(divide="ignore"):
        lognorm = np.log(absv) @ e
    normf = np.exp(lognorm)
    norms = np.rint(normf).astype(np.int64)
    bad = (np.abs(normf - norms) > 1e-6 * np.maximum(1.0, normf)) | ((norms == 0) & np.any(elems != 0, axis=1))
    for idx in np.nonzero(bad)[0]:
        norms[idx] = abs(F.norm(tuple(int(v) for v in elems[idx])))
    Xf = float(X)
    ok = (norms > 0) & (norms <= Xf + 1)
    # exact integer comparisons against the rational X
    keep = np.nonzero(ok)[0]
    ok[:] = False
    for idx in keep:
        ok[idx] = _norm_status(int(norms[idx]), X, half)
    if signs is not None and F.r1:
        sg = np.asarray(signs)[None, :]
        re = emb[:, : F.r1].real
        ok &= np.all(np.sign(re) == sg, axis=1)
    status[ok] = _STATUS_CODE[INSIDE]
    if F.r == 0:
        return status, norms
    cand = np.nonzero(ok)[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = np.log(absv[cand, : F.r]) - (np.log(norms[cand].astype(float)) / F.n)[:, None]
    xi = rhs @ _unit_matrix_inv_float(F).T
    lo = np.array([float(a) for a, _ in walls])
    hi = np.array([float(b) for _, b in walls])
    inside = np.all((xi >= lo) & (xi < hi), axis=1)
    near = np.any((np.abs(xi - lo) < FLOAT_GUARD) | (np.abs(xi - hi) < FLOAT_GUARD), axis=1)
    status[cand[~inside & ~near]] = _STATUS_CODE[OUTSIDE]
    for idx in cand[near]:
        status[idx] = _STATUS_CODE[_classify_hp(F, tuple(int(v) for v in elems[idx]), walls, tau_mem)]
    return status, norms


def _classify_hp(F: FieldData, alpha: Coords, walls, tau_mem) -> str:
    """Unit-coordinate wall test at the field precision, with the exact fallback."""
    with mp.workprec(F.precision):
        pt = MinkowskiPoint.from_element(F, alpha)
        _, vec = log_coords(F, pt)
        st = _wall_status(vec, walls, tau_mem)
        if st != UNCERTAIN:
            return st
        exact = _exact_log_coords(F, alpha, vec, tau_mem)
        if exact is None:
            return UNCERTAIN
        return _exact_wall_status(exact, walls)


def place_bounds(F: FieldData, walls: Sequence[tuple[Fraction, Fraction]], X) -> np.ndarray:
    """Upper bounds B_i on |x_i| over the slice with these unit-coordinate walls and norm cap X."""
    L = F.unit_logs_float
    base = float(X) ** (1.0 / F.n)
    out = np.empty(F.n_places)
    for i in range(F.n_places):
        s = sum(max(float(a) * L[i, j], float(b) * L[i, j]) for j, (a, b) in enumerate(walls))
        out[i] = base * math.exp(s)
    return out


def lemma4_bound(F: FieldData, N) -> float:
    """sqrt(r+1) e^r N^{1/n}: the Euclidean-norm bound on the small slice."""
    return math.sqrt(F.r + 1) * math.e**F.r * float(N) ** (1.0 / F.n)


# ---------------------------------------------------------------------- partition cells


def partition_cells(F: FieldData) -> list[PartitionCell]:
    """All prod m_j cells k with 0 <= k_j < m_j, with their norm-one twists beta_k."""
    cells = []
    with mp.workprec(F.precision):
        for k in itertools.product(*(range(m) for m in F.unit_bounds)):
            beta = tuple(
                mpmath.mpc(
                    mpmath.exp(-sum(mpmath.mpf(k[j]) / F.unit_bounds[j] * F.unit_logs[i][j] for j in range(F.r)))
                )
                for i in range(F.n_places)
            )
            cells.append(PartitionCell(tuple(k), MinkowskiPoint(beta, F.e_weights)))
    return cells


def apply_cell(F: FieldData, x: MinkowskiPoint, cell: PartitionCell) -> MinkowskiPoint:
    with mp.workprec(F.precision):
        coords = tuple(z * b for z, b in zip(x.coords, cell.beta.coords))
    base = x.shift or (Fraction(0),) * F.r
    return MinkowskiPoint(coords, x.e_weights, x.source, tuple(s + d for s, d in zip(base, cell.shift(F))))


def domain_volume(F: FieldData, D: DomainSpec) -> mpmath.mpf:
    """X prod (b_j - a_j) 2^{r1} pi^{r2} Reg (halved for the half slice, / 2^{r1} with fixed signs)."""
    with mp.workprec(F.precision):
        X = mpmath.mpf(D.X.numerator) / D.X.denominator
        if D.half:
            X /= 2
        width = mpmath.mpf(1)
        for a, b in D.box:
            width *= mpmath.mpf((b - a).numerator) / (b - a).denominator
        signs = 1 if D.signs is not None else 2**F.r1
        return X * width * signs * mpmath.pi**F.r2 * F.reg_convention


def monte_carlo_volume(F: FieldData, D: DomainSpec, samples: int, rng: np.random.Generator) -> float:
    """Hit-or-miss estimate of vol(D) in R^n (complex places as R^2)."""
    B = place_bounds(F, D.box, D.X)
    cols, box_vol = [], 1.0
    for i in range(F.n_places):
        if i < F.r1:
            if D.signs is None:
                cols.append(rng.uniform(-B[i], B[i], samples))
                box_vol *= 2 * B[i]
            else:
                cols.append(D.signs[i] * rng.uniform(0, B[i], samples))
                box_vol *= B[i]
        else:
            cols.append(rng.uniform(-B[i], B[i], samples) + 1j * rng.uniform(-B[i], B[i], samples))
            box_vol *= 4 * B[i] ** 2
    pts = np.abs(np.stack(cols, axis=1))
    e = np.array(F.e_weights, dtype=float)
    with np.errstate(divide="ignore"):
        lognorm = np.log(pts) @ e
    xi_norm = np.exp(lognorm)
    lo = float(D.X) / 2 if D.half else 0.0
    ok = (xi_norm > lo) & (xi_norm <= float(D.X))
    if F.r:
        rhs = np.log(pts[:, : F.r]) - (lognorm / F.n)[:, None]
        xi = rhs @ _unit_matrix_inv_float(F).T
        for j, (a, b) in enumerate(D.box):
            ok &= (xi[:, j] >= float(a)) & (xi[:, j] < float(b))
    return box_vol * ok.mean()


# ---------------------------------------------------------------------- constants and the cell integral


def lipschitz_constant(F_or_r) -> tuple[int, float]:
    """(M, L) = (2r + 2, (r + 2 pi)^{3/2} e^r) for the boundary of the small half slice."""
    r = F_or_r.r if isinstance(F_or_r, FieldData) else int(F_or_r)
    return 2 * r + 2, (r + 2 * math.pi) ** 1.5 * math.e**r


def partition_integral(F: FieldData, alpha_embeds: Sequence) -> mpmath.mpf:
    """Closed form |N(alpha)|^{-(n-1)/n} (m_1...m_r / Reg) (n/(n-1))^r of the cell integral."""
    n = F.n
    with mp.workprec(F.precision):
        N = mpmath.mpf(1)
        for v, e in zip(alpha_embeds, F.e_weights):
            N *= mpmath.mpf(abs(v)) ** e
        return (
            N ** (-mpmath.mpf(n - 1) / n)
            * F.unit_product
            / F.reg_convention
            * (mpmath.mpf(n) / (n - 1)) ** F.r
        )


def partition_integrand(F: FieldData, alpha_embeds: Sequence, x: Sequence[float]) -> float:
    """1 / max_i (prod_j |sigma_i(eps_j)|^{x_j/m_j} |sigma_i(alpha)|)^{n-1}."""
    L = F.unit_logs_float
    la = np.log(np.abs(np.asarray([complex(v) for v in alpha_embeds])))
    expo = la + L @ (np.asarray(x, dtype=float) / np.asarray(F.unit_bounds, dtype=float))
    return math.exp(-(F.n - 1) * float(np.max(expo)))


def partition_integral_quadrature(F: FieldData, alpha_embeds: Sequence, epsrel: float = 1e-10) -> float:
    """Adaptive quadrature of the cell integral over R^r (r = 1 or 2).

    The integrand is exp(-(n-1) * piecewise-linear), so the kinks (where two places tie) are
    passed as break points and the tails are integrated over semi-infinite ranges.
    """
    from scipy import integrate

    r = F.r
    if r == 0:
        return 1.0
    L = F.unit_logs_float
    la = np.log(np.abs(np.asarray([complex(v) for v in alpha_embeds])))
    m = np.asarray(F.unit_bounds, dtype=float)
    if r == 1:
        kinks = []
        for i in range(F.n_places):
            for k in range(i + 1, F.n_places):
                d = (L[i, 0] - L[k, 0]) / m[0]
                if abs(d) > 1e-15:
                    kinks.append((la[k] - la[i]) / d)
        kinks = sorted(kinks)
        f = lambda t: partition_integrand(F, alpha_embeds, [t])
        pts = [-math.inf] + kinks + [math.inf]
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            total += integrate.quad(f, a, b, epsabs=0, epsrel=epsrel, limit=200)[0]
        return total
    if r == 2:
        f = lambda y, x: partition_integrand(F, alpha_embeds, [x, y])
        return integrate.nquad(
            f, [[-math.inf, math.inf], [-math.inf, math.inf]], opts={"epsrel": 1e-7, "limit": 200}
        )[0]
    raise NotImplementedError("quadrature implemented for r <= 2")
