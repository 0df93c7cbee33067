"""Immutable number-field data: loading, validation, exact element arithmetic, unit reduction.

Field invariants (integral basis, units, regulator, class group, residue) are computed offline
and checked in under ``nfsieve/data/fields``. The loader re-verifies every invariant that can be
recomputed from the file itself, so a corrupted or inconsistent file never reaches the counting
code.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np
import sympy
from mpmath import mp

from . import intlin
from .errors import ParseError, ReductionFailure, ValidationError

FORMAT_NAME = "nfsieve-field"
FORMAT_VERSION = 1
DEFAULT_PRECISION = 128
DEFAULT_TAU_REG = mpmath.mpf("1e-20")

DATA_DIR = Path(__file__).parent / "data"

Coords = tuple[int, ...]


@dataclass(frozen=True)
class FieldData:
    """A number field K with its integral basis, embeddings, units and class group data.

    Elements are integer coordinate tuples over ``integral_basis``; the basis itself is given
    as rational combinations of powers of a root ``theta`` of ``defining_poly``.
    Embeddings follow the usual order: real ones first, then one representative of each
    complex pair (positive imaginary part), then the conjugates of those.
    """

    name: str
    defining_poly: tuple[int, ...]  # low degree first, monic
    integral_basis: tuple[tuple[Fraction, ...], ...]
    r1: int
    r2: int
    embeddings: tuple[mpmath.mpc, ...]
    disc: int
    fundamental_units: tuple[Coords, ...]
    unit_bounds: tuple[int, ...]
    regulator: mpmath.mpf
    class_number: int
    class_reps: tuple[tuple[Coords, ...], ...]
    residue: mpmath.mpf
    roots_of_unity: int
    torsion_generator: Coords
    precision: int = DEFAULT_PRECISION
    index_primes: tuple[tuple[int, tuple[tuple[tuple[Coords, ...], int, int], ...]], ...] = ()
    complex_conjugation: Coords | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # ------------------------------------------------------------------ basic shape
    @property
    def n(self) -> int:
        return len(self.defining_poly) - 1

    @property
    def r(self) -> int:
        return self.r1 + self.r2 - 1

    @property
    def n_places(self) -> int:
        return self.r1 + self.r2

    @property
    def e_weights(self) -> tuple[int, ...]:
        return (1,) * self.r1 + (2,) * self.r2

    @property
    def unit_product(self) -> int:
        """m_1 * ... * m_r (1 for r = 0)."""
        return math.prod(self.unit_bounds)

    @property
    def reg_convention(self) -> mpmath.mpf:
        """Regulator with the empty-determinant convention (1 when r = 0)."""
        return self.regulator if self.r > 0 else mpmath.mpf(1)

    def one(self) -> Coords:
        return self._one

    @cached_property
    def _one(self) -> Coords:
        return self.from_power_basis([1] + [0] * (self.n - 1))

    def zero(self) -> Coords:
        return (0,) * self.n

    def theta(self) -> Coords:
        return self.from_power_basis([0, 1] + [0] * (self.n - 2))

    # ------------------------------------------------------------------ basis changes
    @cached_property
    def _basis_matrix(self) -> list[list[Fraction]]:
        return [list(row) for row in self.integral_basis]

    @cached_property
    def index(self) -> int:
        """[O_K : Z[theta]]."""
        d = _frac_det(self._basis_matrix)
        inv = 1 / abs(d)
        if inv.denominator != 1:
            raise ValidationError("integral basis", "Z[theta] is not contained in the span of the basis")
        return int(inv)

    def to_power_basis(self, a: Sequence[int | Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * self.n
        for ai, row in zip(a, self.integral_basis):
            if ai:
                for k, c in enumerate(row):
                    out[k] += ai * c
        return out

    def from_power_basis_rational(self, coeffs: Sequence[int | Fraction]) -> list[Fraction]:
        return intlin.solve_rational(self._basis_matrix, list(coeffs))

    def from_power_basis(self, coeffs: Sequence[int | Fraction]) -> Coords:
        x = self.from_power_basis_rational(coeffs)
        if any(v.denominator != 1 for v in x):
            raise ValueError("element is not integral over the basis")
        return tuple(int(v) for v in x)

    # ------------------------------------------------------------------ exact arithmetic
    @cached_property
    def mult_table(self) -> list[list[Coords]]:
        """mult_table[i][j] = coordinates of w_i * w_j."""
        n = self.n
        table = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                prod = _poly_mulmod(self.integral_basis[i], self.integral_basis[j], self.defining_poly)
                x = self.from_power_basis_rational(prod)
                if any(v.denominator != 1 for v in x):
                    raise ValidationError("integral basis", "basis is not closed under multiplication")
                table[i][j] = table[j][i] = tuple(int(v) for v in x)
        return table

    def add(self, a: Coords, b: Coords) -> Coords:
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a: Coords, b: Coords) -> Coords:
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a: Coords) -> Coords:
        return tuple(-x for x in a)

    def scale(self, a: Coords, c: int) -> Coords:
        return tuple(c * x for x in a)

    def mul(self, a: Sequence, b: Sequence) -> tuple:
        n = self.n
        out = [0] * n
        T = self.mult_table
        for i in range(n):
            ai = a[i]
            if not ai:
                continue
            Ti = T[i]
            for j in range(n):
                c = ai * b[j]
                if c:
                    row = Ti[j]
                    for k in range(n):
                        if row[k]:
                            out[k] += c * row[k]
        return tuple(out)

    def power(self, a: Coords, k: int) -> Coords:
        if k < 0:
            return self.power(self.unit_inverse(a), -k)
        result, base = self.one(), a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def mult_matrix(self, a: Sequence[int]) -> list[list[int]]:
        """Row i = coordinates of w_i * a."""
        return [list(self.mul(tuple(int(i == j) for j in range(self.n)), a)) for i in range(self.n)]

    def norm(self, a: Sequence[int]) -> int:
        return intlin.det(self.mult_matrix(a))

    def trace(self, a: Sequence[int]) -> int:
        M = self.mult_matrix(a)
        return sum(M[i][i] for i in range(self.n))

    def inverse(self, a: Sequence[int]) -> list[Fraction]:
        return intlin.solve_rational(self.mult_matrix(a), self.one())

    def unit_inverse(self, a: Coords) -> Coords:
        x = self.inverse(a)
        if any(v.denominator != 1 for v in x):
            raise ValueError("not a unit")
        return tuple(int(v) for v in x)

    def conjugate(self, a: Coords) -> Coords:
        """Image under the complex-conjugation automorphism (CM fields that supply it)."""
        if self.complex_conjugation is None:
            raise ValueError(f"{self.name}: no complex conjugation automorphism in the data")
        # a = sum c_k theta^k  ->  sum c_k conj(theta)^k
        coeffs = self.to_power_basis(a)
        out = [Fraction(0)] * self.n
        pw = [Fraction(v) for v in self.one()]
        for c in coeffs:
            if c:
                out = [o + c * p for o, p in zip(out, pw)]
            pw = list(self.mul(pw, self.complex_conjugation))
        return tuple(int(v) for v in out)

    # ------------------------------------------------------------------ embeddings
    def embed(self, a: Sequence[int | Fraction]) -> list[mpmath.mpc]:
        """All n embeddings sigma_i(a) at the field precision (call under ``mp.workprec``)."""
        coeffs = self.to_power_basis(a)
        out = []
        for z in self.embeddings:
            acc = mpmath.mpc(0)
            for c in reversed(coeffs):
                acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
            out.append(acc)
        return out

    def embed_hp(self, a: Sequence[int | Fraction]) -> list[mpmath.mpc]:
        with mp.workprec(self.precision):
            return [+v for v in self.embed(a)]

    @cached_property
    def basis_embeddings(self) -> np.ndarray:
        """complex128 array E with E[k, i] = sigma_i(w_k), i over the r1 + r2 places."""
        with mp.workprec(self.precision):
            rows = [self.embed(tuple(int(i == k) for i in range(self.n)))[: self.n_places] for k in range(self.n)]
        return np.array([[complex(v) for v in row] for row in rows], dtype=np.complex128)

    @cached_property
    def basis_embeddings_hp(self) -> list[list[mpmath.mpc]]:
        with mp.workprec(self.precision):
            return [self.embed(tuple(int(i == k) for i in range(self.n)))[: self.n_places] for k in range(self.n)]

    @cached_property
    def unit_logs(self) -> list[list[mpmath.mpf]]:
        """unit_logs[i][j] = log |sigma_i(eps_j)| for i over the r1 + r2 places."""
        with mp.workprec(self.precision):
            cols = [[mpmath.log(abs(v)) for v in self.embed(u)[: self.n_places]] for u in self.fundamental_units]
        return [[cols[j][i] for j in range(self.r)] for i in range(self.n_places)]

    @cached_property
    def unit_logs_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.unit_logs], dtype=float).reshape(self.n_places, self.r)

    def float_embed(self, coords: np.ndarray) -> np.ndarray:
        """Vectorised embeddings of integer coordinate rows -> complex array (N, r1 + r2)."""
        return np.asarray(coords, dtype=float) @ self.basis_embeddings

    # ------------------------------------------------------------------ misc
    @cached_property
    def class_rep_ideals(self):
        from .nf_arith import NfIdeal

        return tuple(NfIdeal.from_hnf(self, h) for h in self.class_reps)

    def index_prime_table(self) -> dict[int, tuple]:
        return dict(self.index_primes)

    def with_units(self, units: Sequence[Coords]) -> "FieldData":
        units = tuple(tuple(u) for u in units)
        with mp.workprec(self.precision):
            bounds = tuple(_unit_bound(self, u) for u in units)
        return dataclasses.replace(self, fundamental_units=units, unit_bounds=bounds, _cache={})


# ---------------------------------------------------------------------- helpers


def _frac_det(M: list[list[Fraction]]) -> Fraction:
    n = len(M)
    A = [list(r) for r in M]
    d = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return d


def _poly_mulmod(a: Sequence, b: Sequence, f: Sequence[int]) -> list[Fraction]:
    n = len(f) - 1
    prod = [Fraction(0)] * (2 * n - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += Fraction(x) * Fraction(y)
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for t in range(n):
                prod[k - n + t] -= c * f[t]
            prod[k] = Fraction(0)
    return prod[:n]


def _unit_bound(F: FieldData, u: Coords) -> int:
    vals = [abs(v) for v in F.embed(u)[: F.n_places]]
    mx = max(vals)
    m = int(mpmath.ceil(mx))
    if abs(mx - mpmath.nint(mx)) < mpmath.mpf(2) ** (-F.precision // 2):
        # |sigma(eps)| integral would make eps rational: impossible for a non-torsion unit
        raise ValidationError("unit bounds", "max |sigma_i(eps)| numerically integral")
    return m


def _refine_root(poly: Sequence[int], z: mpmath.mpc, iterations: int = 12) -> mpmath.mpc:
    coeffs = [mpmath.mpf(c) for c in reversed(poly)]
    dcoeffs = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])]
    for _ in range(iterations):
        fz = mpmath.polyval(coeffs, z)
        dz = mpmath.polyval(dcoeffs, z)
        if dz == 0:
            break
        step = fz / dz
        z = z - step
        if abs(step) < mpmath.mpf(2) ** (-mp.prec):
            break
    return z


def _parse_rational(s) -> Fraction:
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r}") from exc


def _parse_int(s) -> int:
    try:
        v = Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad integer {s!r}") from exc
    if v.denominator != 1:
        raise ParseError(f"expected integer, got {s!r}")
    return int(v)


def _parse_coords(seq, n: int) -> Coords:
    if not isinstance(seq, list) or len(seq) != n:
        raise ParseError(f"expected {n} coordinates, got {seq!r}")
    return tuple(_parse_int(v) for v in seq)


# ---------------------------------------------------------------------- load / dump


def parse_field(doc: dict, precision: int = DEFAULT_PRECISION) -> FieldData:
    """Build an (unvalidated) FieldData from a decoded JSON document."""
    try:
        if doc.get("format") != FORMAT_NAME:
            raise ParseError(f"format must be {FORMAT_NAME!r}")
        if "version" not in doc:
            raise ParseError("missing format version")
        if int(doc["version"]) != FORMAT_VERSION:
            raise ParseError(f"unsupported version {doc['version']}")
        poly = tuple(_parse_int(c) for c in doc["defining_poly"])
        n = len(poly) - 1
        basis = tuple(tuple(_parse_rational(c) for c in row) for row in doc["integral_basis"])
        if len(basis) != n or any(len(row) != n for row in basis):
            raise ParseError("integral basis must be n x n")
        r1, r2 = (int(v) for v in doc["signature"])
        with mp.workprec(precision + 32):
            roots = []
            for e in doc["embeddings"]:
                z = mpmath.mpc(mpmath.mpf(str(e["re"])), mpmath.mpf(str(e.get("im", "0"))))
                roots.append(_refine_root(poly, z))
            roots = tuple(roots)
            regulator = mpmath.mpf(str(doc["regulator"]))
            residue = mpmath.mpf(str(doc["residue"]))
        units = tuple(_parse_coords(u, n) for u in doc["fundamental_units"])
        bounds = tuple(int(m) for m in doc["unit_bounds"])
        reps = tuple(tuple(_parse_coords(row, n) for row in rep) for rep in doc["class_reps"])
        tors = doc["torsion"]
        index_primes = []
        for p, entries in sorted(doc.get("index_primes", {}).items(), key=lambda kv: int(kv[0])):
            prs = []
            for ent in entries:
                gens = tuple(_parse_coords(g, n) for g in ent["generators"])
                prs.append((gens, int(ent["e"]), int(ent["f"])))
            index_primes.append((int(p), tuple(prs)))
        conj = doc.get("complex_conjugation")
        return FieldData(
            name=str(doc.get("name", "")),
            defining_poly=poly,
            integral_basis=basis,
            r1=r1,
            r2=r2,
            embeddings=roots,
            disc=_parse_int(doc["disc"]),
            fundamental_units=units,
            unit_bounds=bounds,
            regulator=regulator,
            class_number=int(doc["class_number"]),
            class_reps=reps,
            residue=residue,
            roots_of_unity=int(tors["order"]),
            torsion_generator=_parse_coords(tors["generator"], n),
            precision=precision,
            index_primes=tuple(index_primes),
            complex_conjugation=None if conj is None else _parse_coords(conj, n),
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed field document: {exc!r}") from exc


def load_field(path: str | Path, precision: int = DEFAULT_PRECISION, tau_reg=DEFAULT_TAU_REG) -> FieldData:
    """Read, parse and fully validate a field file.

    A bare name such as ``"q_sqrt2"`` or ``"fields/q_sqrt2.field"`` is also resolved against the
    bundled data directory.
    """
    path = resolve_data_path(path, "fields", ".field")
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    F = parse_field(doc, precision)
    validate_field(F, tau_reg)
    return F


def resolve_data_path(path: str | Path, kind: str, suffix: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    for cand in (DATA_DIR / p, DATA_DIR / kind / p.name, DATA_DIR / kind / (p.name + suffix)):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no {kind[:-1]} file {path} (not a path, nor a bundled name)")


def field_to_doc(F: FieldData) -> dict:
    digits = int(F.precision * math.log10(2)) + 8
    with mp.workprec(F.precision + 32):
        emb = [{"re": mpmath.nstr(z.real, digits), "im": mpmath.nstr(z.imag, digits)} for z in F.embeddings]
        reg = mpmath.nstr(F.regulator, digits)
        res = mpmath.nstr(F.residue, digits)
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": F.name,
        "defining_poly": [str(c) for c in F.defining_poly],
        "integral_basis": [[str(c) for c in row] for row in F.integral_basis],
        "signature": [F.r1, F.r2],
        "precision_bits": F.precision,
        "embeddings": emb,
        "disc": str(F.disc),
        "fundamental_units": [[str(c) for c in u] for u in F.fundamental_units],
        "unit_bounds": list(F.unit_bounds),
        "regulator": reg,
        "class_number": F.class_number,
        "class_reps": [[[str(c) for c in row] for row in rep] for rep in F.class_reps],
        "residue": res,
        "torsion": {"order": F.roots_of_unity, "generator": [str(c) for c in F.torsion_generator]},
        "index_primes": {
            str(p): [{"generators": [[str(c) for c in g] for g in gens], "e": e, "f": f} for gens, e, f in entries]
            for p, entries in F.index_primes
        },
        "complex_conjugation": None if F.complex_conjugation is None else [str(c) for c in F.complex_conjugation],
    }


def dumps_field(F: FieldData) -> str:
    return json.dumps(field_to_doc(F), indent=1)


# ---------------------------------------------------------------------- validation


def validate_field(F: FieldData, tau_reg=DEFAULT_TAU_REG, check_classes: bool = True) -> None:
    """Raise ValidationError naming the first failed invariant."""
    n = F.n
    if n < 2:
        raise ValidationError("degree", "need n >= 2")
    if F.defining_poly[-1] != 1:
        raise ValidationError("monic", "defining polynomial must be monic")
    x = sympy.Symbol("x")
    if not sympy.Poly(list(reversed(F.defining_poly)), x, domain="QQ").is_irreducible:
        raise ValidationError("irreducible", "defining polynomial is reducible over Q")
    if F.r1 + 2 * F.r2 != n or len(F.embeddings) != n:
        raise ValidationError("signature", "n != r1 + 2 r2 or wrong number of embeddings")
    guard = mpmath.mpf(2) ** (-(F.precision // 2))
    with mp.workprec(F.precision):
        for i, z in enumerate(F.embeddings):
            if abs(mpmath.polyval([mpmath.mpf(c) for c in reversed(F.defining_poly)], z)) > guard * (1 + abs(z)) ** n:
                raise ValidationError("embeddings", f"embedding {i} is not a root")
            is_real = abs(z.imag) < guard
            if (i < F.r1) != is_real:
                raise ValidationError("embeddings", "real embeddings must come first")
        for k in range(F.r2):
            a, b = F.embeddings[F.r1 + k], F.embeddings[F.r1 + F.r2 + k]
            if a.imag <= 0 or abs(a - mpmath.conj(b)) > guard:
                raise ValidationError("embeddings", "complex embeddings must be listed as z_1..z_r2, conj(z_1)..")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(F.embeddings[i] - F.embeddings[j]) < guard:
                    raise ValidationError("embeddings", "repeated root")
    _ = F.index
    _ = F.mult_table
    # discriminant: disc(K) = disc(poly) * det(B)^2 exactly
    dpoly = int(sympy.discriminant(sympy.Poly(list(reversed(F.defining_poly)), x)))
    dK = Fraction(dpoly) * _frac_det(F._basis_matrix) ** 2
    if dK != F.disc:
        raise ValidationError("discriminant", f"stored {F.disc}, recomputed {dK}")
    try:
        F.one()
    except ValueError as exc:
        raise ValidationError("integral basis", "1 is not in the span") from exc

    r = F.r
    if len(F.fundamental_units) != r or len(F.unit_bounds) != r:
        raise ValidationError("unit count", f"expected r = {r} fundamental units")
    for u in F.fundamental_units:
        if abs(F.norm(u)) != 1:
            raise ValidationError("unit norm", f"N({u}) = {F.norm(u)}")
    with mp.workprec(F.precision):
        for j, u in enumerate(F.fundamental_units):
            m = _unit_bound(F, u)
            if m != F.unit_bounds[j]:
                raise ValidationError("unit bounds", f"m_{j + 1} stored {F.unit_bounds[j]}, recomputed {m}")
        reg = regulator_of(F)
        if r == 0:
            if F.regulator != 1:
                raise ValidationError("regulator", "r = 0 requires the convention Reg = 1")
        elif abs(reg - F.regulator) > tau_reg * F.regulator:
            raise ValidationError("regulator", f"stored {F.regulator}, unit lattice gives {reg}")
        kappa = residue_formula(F)
        if abs(kappa - F.residue) > tau_reg * kappa:
            raise ValidationError("residue", f"stored {F.residue}, class number formula gives {kappa}")

    # torsion
    w = F.roots_of_unity
    z = F.torsion_generator
    if w < 2 or w % 2 or F.power(z, w) != F.one():
        raise ValidationError("roots of unity", "torsion generator has wrong order")
    for p in sympy.primefactors(w):
        if F.power(z, w // p) == F.one():
            raise ValidationError("roots of unity", "torsion generator is not primitive")
    if F.r1 > 0 and w != 2:
        raise ValidationError("roots of unity", "a field with a real embedding has w = 2")

    if F.complex_conjugation is not None:
        c = F.complex_conjugation
        if F.r1 != 0:
            raise ValidationError("complex conjugation", "only meaningful for totally complex fields")
        # conj(theta) must be a root of f, and sigma_i(conj theta) = conj(sigma_i theta) for every place
        acc = F.zero()
        pw = F.one()
        for cf in F.defining_poly:
            acc = F.add(acc, F.scale(pw, cf))
            pw = F.mul(pw, c)
        if any(acc):
            raise ValidationError("complex conjugation", "image of theta is not a root")
        with mp.workprec(F.precision):
            for zc, zt in zip(F.embed(c)[: F.n_places], F.embeddings[: F.n_places]):
                if abs(zc - mpmath.conj(zt)) > guard:
                    raise ValidationError("complex conjugation", "does not act as conjugation at every place")

    for p, entries in F.index_primes:
        if sum(e * f for _, e, f in entries) != n:
            raise ValidationError("index primes", f"sum e f != n at p = {p}")

    if len(F.class_reps) != F.class_number:
        raise ValidationError("class reps", "need one representative per class")
    if check_classes:
        from .ideal_census import classes_distinct

        if not classes_distinct(F):
            raise ValidationError("class reps", "two representatives lie in the same class")


def regulator_of(F: FieldData) -> mpmath.mpf:
    """|det(e_i log|sigma_i(eps_j)|)| over the first r places."""
    if F.r == 0:
        return mpmath.mpf(1)
    L = F.unit_logs
    M = mpmath.matrix([[F.e_weights[i] * L[i][j] for j in range(F.r)] for i in range(F.r)])
    return abs(mpmath.det(M))


def residue_formula(F: FieldData) -> mpmath.mpf:
    """2^r1 (2 pi)^r2 Reg h / (w sqrt|disc|)."""
    return (
        mpmath.mpf(2) ** F.r1
        * (2 * mpmath.pi) ** F.r2
        * F.reg_convention
        * F.class_number
        / (F.roots_of_unity * mpmath.sqrt(abs(F.disc)))
    )


# ---------------------------------------------------------------------- unit reduction


def lemma5_bounds(F: FieldData) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(lower, upper) bounds that a reduced choice of units must put around prod m_j."""
    r, n = F.r, F.n
    reg = F.regulator
    lo = reg / (mpmath.mpf(2) ** (r + 1) * mpmath.mpf(r + 1) ** (mpmath.mpf(r) / 2))
    hi = mpmath.mpf(2 * r * n) ** (2 * r) * reg
    return lo, hi


def _lll(B: np.ndarray, delta: float = 0.99) -> np.ndarray:
    """Textbook LLL on the rows of a real matrix; returns the integer transform U with U @ B reduced."""
    B = np.array(B, dtype=float)
    k_dim = B.shape[0]
    U = np.eye(k_dim, dtype=np.int64)

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((k_dim, k_dim))
        for i in range(k_dim):
            Bs[i] = B[i]
            for j in range(i):
                mu[i, j] = B[i] @ Bs[j] / (Bs[j] @ Bs[j])
                Bs[i] = Bs[i] - mu[i, j] * Bs[j]
        return Bs, mu

    k = 1
    Bs, mu = gso(B)
    while k < k_dim:
        for j in range(k - 1, -1, -1):
            q = int(round(mu[k, j]))
            if q:
                B[k] -= q * B[j]
                U[k] -= q * U[j]
                Bs, mu = gso(B)
        if Bs[k] @ Bs[k] >= (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1]):
            k += 1
        else:
            B[[k, k - 1]] = B[[k - 1, k]]
            U[[k, k - 1]] = U[[k - 1, k]]
            Bs, mu = gso(B)
            k = max(k - 1, 1)
    return U


def choose_reduced_units(F: FieldData, window: int | None = None) -> FieldData:
    """Pick fundamental units whose bounds m_j make prod m_j comparable to the regulator.

    The logarithmic unit lattice is LLL-reduced and then all unimodular changes of basis with
    entries in ``[-window, window]`` are scanned, keeping the basis with the smallest
    ``prod m_j`` (ties: smallest total squared log length, then the current basis). The scan is
    repeated from the winner until it is a fixed point, which makes the operation idempotent.
    """
    r = F.r
    if r == 0:
        return F
    if window is None:
        window = {1: 1, 2: 2}.get(r, 1)
    if r > 3:
        raise ReductionFailure("exhaustive unit reduction is only supported for r <= 3")
    with mp.workprec(F.precision):
        logs = np.array(
            [[float(F.e_weights[i] * F.unit_logs[i][j]) for i in range(F.n_places)] for j in range(r)], dtype=float
        )
        # exponent matrix relative to the stored units
        E = _lll(logs).astype(object)
        current = [list(row) for row in E]

        def key(expo):
            vecs = np.array(expo, dtype=float) @ logs
            prod_m = 1
            for j in range(r):
                mx = max(
                    mpmath.exp(sum(int(expo[j][k]) * F.unit_logs[i][k] for k in range(r))) for i in range(F.n_places)
                )
                prod_m *= int(mpmath.ceil(mx))
            return (prod_m, round(float(np.sum(vecs * vecs)), 9))

        best_key = key(current)
        rng = range(-window, window + 1)
        while True:
            improved = None
            for flat in itertools.product(rng, repeat=r * r):
                T = [list(flat[i * r : (i + 1) * r]) for i in range(r)]
                if abs(intlin.det(T)) != 1:
                    continue
                cand = [[sum(T[i][k] * current[k][j] for k in range(r)) for j in range(r)] for i in range(r)]
                kc = key(cand)
                if kc < best_key and (improved is None or kc < improved[0]):
                    improved = (kc, cand)
            if improved is None:
                break
            best_key, current = improved

    units = []
    for j in range(r):
        u = F.one()
        for k in range(r):
            u = F.mul(u, F.power(F.fundamental_units[k], int(current[j][k])))
        units.append(u)
    out = F.with_units(units)
    lo, hi = lemma5_bounds(out)
    if not (lo <= out.unit_product <= hi):
        raise ReductionFailure(f"prod m_j = {out.unit_product} outside [{lo}, {hi}]")
    return out
