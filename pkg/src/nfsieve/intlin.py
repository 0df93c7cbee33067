"""Small exact integer linear algebra: row-style Hermite normal forms, determinants, kernels.

Matrices are lists (or tuples) of integer rows. Everything here is desk scale (n <= 8),
so plain Python integers are used throughout.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hnf_with_transform(rows: Sequence[Sequence[int]], ncols: int) -> tuple[Matrix, Matrix]:
    """Lower-triangular row HNF of a full-column-rank integer matrix.

    Returns ``(H, U)`` with ``H`` square (``ncols`` rows) and ``U`` an integer
    matrix with ``H = U @ rows``. ``H`` has a positive diagonal and
    ``0 <= H[i][j] < H[j][j]`` for ``j < i``.
    """
    m = len(rows)
    work = [list(r) for r in rows]
    trans = [[int(i == j) for j in range(m)] for i in range(m)]
    active = list(range(m))
    pivots: dict[int, int] = {}
    for col in range(ncols - 1, -1, -1):
        nz = [i for i in active if work[i][col] != 0]
        if not nz:
            raise ValueError("matrix does not have full column rank")
        piv = nz[0]
        for i in nz[1:]:
            a, b = work[piv][col], work[i][col]
            g, x, y = _xgcd(a, b)
            ua, ub = a // g, b // g
            rp = [x * p + y * q for p, q in zip(work[piv], work[i])]
            ri = [ua * q - ub * p for p, q in zip(work[piv], work[i])]
            tp = [x * p + y * q for p, q in zip(trans[piv], trans[i])]
            ti = [ua * q - ub * p for p, q in zip(trans[piv], trans[i])]
            work[piv], work[i], trans[piv], trans[i] = rp, ri, tp, ti
        if work[piv][col] < 0:
            work[piv] = [-v for v in work[piv]]
            trans[piv] = [-v for v in trans[piv]]
        pivots[col] = piv
        active.remove(piv)
    H = [work[pivots[c]] for c in range(ncols)]
    U = [trans[pivots[c]] for c in range(ncols)]
    for i in range(ncols):
        for j in range(i - 1, -1, -1):
            q = H[i][j] // H[j][j]
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[j])]
                U[i] = [a - q * b for a, b in zip(U[i], U[j])]
    return H, U


def hnf(rows: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Lower-triangular row HNF (see :func:`hnf_with_transform`)."""
    return hnf_with_transform(rows, ncols)[0]


def det(M: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    n = len(M)
    A = [list(r) for r in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1


def solve_rational(M: Sequence[Sequence[Fraction | int]], b: Sequence[Fraction | int]) -> list[Fraction]:
    """Solve ``x @ M = b`` (row vector convention) exactly over the rationals."""
    n = len(M)
    # transpose so that we solve M^T x^T = b^T with Gaussian elimination
    A = [[Fraction(M[j][i]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [v * inv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [A[i][n] for i in range(n)]


def rank(rows: Sequence[Sequence[int]]) -> int:
    A = [[Fraction(v) for v in r] for r in rows]
    if not A:
        return 0
    ncols = len(A[0])
    rk = 0
    for c in range(ncols):
        p = next((r for r in range(rk, len(A)) if A[r][c] != 0), None)
        if p is None:
            continue
        A[rk], A[p] = A[p], A[rk]
        for r in range(len(A)):
            if r != rk and A[r][c] != 0:
                f = A[r][c] / A[rk][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rk])]
        rk += 1
    return rk


def reduce_mod_hnf(v: Sequence[int], H: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Canonical representative of ``v`` modulo the row lattice of ``H`` (lower-triangular HNF)."""
    w = list(v)
    for col in range(len(H) - 1, -1, -1):
        q = w[col] // H[col][col]
        if q:
            w = [a - q * b for a, b in zip(w, H[col])]
    return tuple(w)


def in_lattice(v: Sequence[int], H: Sequence[Sequence[int]]) -> bool:
    return not any(reduce_mod_hnf(v, H))


def kernel_mod(C: Sequence[Sequence[int]], modulus: int, n: int) -> Matrix:
    """HNF basis of ``{x in Z^n : x @ C == 0 (mod modulus)}`` where ``C`` is ``n x m``."""
    m = len(C[0]) if C else 0
    rows = [[int(i == j) for j in range(n)] + list(C[i]) for i in range(n)]
    rows += [[0] * n + [modulus * int(i == j) for j in range(m)] for i in range(m)]
    # eliminate the last m columns first; the leftover rows span the kernel
    work = [list(r) for r in rows]
    active = list(range(len(work)))
    for col in range(n + m - 1, n - 1, -1):
        nz = [i for i in active if work[i][col] != 0]
        if not nz:
            continue
        piv = nz[0]
        for i in nz[1:]:
            a, b = work[piv][col], work[i][col]
            g, x, y = _xgcd(a, b)
            ua, ub = a // g, b // g
            rp = [x * p + y * q for p, q in zip(work[piv], work[i])]
            ri = [ua * q - ub * p for p, q in zip(work[piv], work[i])]
            work[piv], work[i] = rp, ri
        active.remove(piv)
    rest = [work[i][:n] for i in active if any(work[i][:n])]
    return hnf(rest, n)
