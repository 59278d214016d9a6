"""Exact rational linear algebra, integer HNF, LLL and short-vector enumeration."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt, floor, ceil, sqrt

import numpy as np


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def frac_det(M) -> Fraction:
    A = [[Fraction(v) for v in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if A[r][i] != 0), None)
        if p is None:
            return Fraction(0)
        if p != i:
            A[i], A[p] = A[p], A[i]
            det = -det
        piv = A[i][i]
        det *= piv
        for r in range(i + 1, n):
            f = A[r][i] / piv
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[i])]
    return det


def frac_inv(M) -> list:
    n = len(M)
    A = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for i in range(n):
        p = next((r for r in range(i, n) if A[r][i] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        A[i], A[p] = A[p], A[i]
        piv = A[i][i]
        A[i] = [a / piv for a in A[i]]
        for r in range(n):
            if r != i and A[r][i]:
                f = A[r][i]
                A[r] = [a - f * b for a, b in zip(A[r], A[i])]
    return [row[n:] for row in A]


def frac_matmul(A, B) -> list:
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def vec_mat(v, M) -> list:
    """Row vector times matrix."""
    return [sum((a * b for a, b in zip(v, col)), Fraction(0)) for col in zip(*M)]


def charpoly(M) -> list:
    """Characteristic polynomial coefficients, monic, highest degree first (Faddeev-LeVerrier)."""
    n = len(M)
    A = [[Fraction(v) for v in row] for row in M]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        # Mk = A (M_{k-1} + c_{k-1} I)
        prev = [[Mk[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
        Mk = frac_matmul(A, prev)
        c = -sum(Mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def hnf(rows) -> tuple:
    """Row Hermite normal form of a full-column-rank integer matrix.

    Returns a square upper-triangular matrix with positive pivots and the
    entries above each pivot reduced into [0, pivot).
    """
    A = [list(map(int, r)) for r in rows if any(r)]
    if not A:
        raise ValueError("zero lattice")
    d = len(A[0])
    out = []
    for col in range(d):
        # gcd-eliminate column `col` among remaining rows
        piv_rows = [r for r in A if r[col] != 0]
        rest = [r for r in A if r[col] == 0]
        while len(piv_rows) > 1:
            piv_rows.sort(key=lambda r: abs(r[col]))
            p = piv_rows[0]
            new = [p]
            for r in piv_rows[1:]:
                q = r[col] // p[col]
                r2 = [a - q * b for a, b in zip(r, p)]
                if r2[col] != 0:
                    new.append(r2)
                elif any(r2):
                    rest.append(r2)
            piv_rows = new
        if not piv_rows:
            raise ValueError("lattice is not of full rank")
        p = piv_rows[0]
        if p[col] < 0:
            p = [-a for a in p]
        out.append(p)
        A = rest
    # reduce entries above the pivots
    for i in range(d):
        for r in range(i):
            q = out[r][i] // out[i][i]
            if q:
                out[r] = [a - q * b for a, b in zip(out[r], out[i])]
    return tuple(tuple(r) for r in out)


def hnf_contains(H, v) -> bool:
    """Is the integer vector v in the row span of the upper-triangular HNF H?"""
    v = list(v)
    for i in range(len(H)):
        if v[i] % H[i][i]:
            return False
        q = v[i] // H[i][i]
        if q:
            v = [a - q * b for a, b in zip(v, H[i])]
    return not any(v)


def hnf_coords(H, v) -> list:
    """Integer coordinates of v with respect to the rows of H (v must lie in the span)."""
    v = list(v)
    c = []
    for i in range(len(H)):
        q, r = divmod(v[i], H[i][i])
        if r:
            raise ValueError("vector not in lattice")
        c.append(q)
        if q:
            v = [a - q * b for a, b in zip(v, H[i])]
    return c


def rational_lattice(vectors) -> tuple:
    """Canonical (denominator, HNF) for the Z-span of rational vectors."""
    vecs = [[Fraction(x) for x in v] for v in vectors]
    den = 1
    for v in vecs:
        for x in v:
            den = lcm(den, x.denominator)
    rows = [[int(x * den) for x in v] for v in vecs]
    return den, hnf(rows)


def lll(B: np.ndarray, delta: float = 0.99):
    """Floating LLL on the rows of B. Returns (reduced basis, integer transform U) with B_red = U @ B."""
    B = np.array(B, dtype=float)
    n = B.shape[0]
    U = np.eye(n, dtype=np.int64)

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            v = B[i].copy()
            for j in range(i):
                mu[i, j] = B[i] @ Bs[j] / (Bs[j] @ Bs[j])
                v -= mu[i, j] * Bs[j]
            Bs[i] = v
        return Bs, mu

    Bs, mu = gso(B)
    k = 1
    it = 0
    while k < n:
        it += 1
        if it > 10000:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
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
    return B, U


def short_vectors(B: np.ndarray, bound: float, include_zero: bool = False) -> np.ndarray:
    """All integer coefficient vectors c with |c @ B|^2 <= bound (Fincke-Pohst).

    The innermost coordinate is enumerated as a numpy range, outer ones recursively.
    Returned coefficients refer to the rows of the original B.
    """
    B = np.atleast_2d(np.array(B, dtype=float))
    n = B.shape[0]
    Bred, U = lll(B)
    G = Bred @ Bred.T
    # q-form: Q(c) = sum_i q_ii (c_i + sum_{j>i} q_ij c_j)^2
    Q = np.array(G, dtype=float)
    for i in range(n):
        for j in range(i + 1, n):
            Q[j, i] = Q[i, j]
            Q[i, j] = Q[i, j] / Q[i, i]
        for k in range(i + 1, n):
            for l in range(k, n):
                Q[k, l] -= Q[k, i] * Q[i, l]
    qd = np.array([Q[i, i] for i in range(n)])
    bound = float(bound) * (1 + 1e-12) + 1e-12
    chunks = []
    c = [0] * n

    def rec(i, remaining):
        centre = -sum(Q[i, j] * c[j] for j in range(i + 1, n))
        r = sqrt(max(remaining, 0.0) / qd[i])
        lo, hi = ceil(centre - r - 1e-12), floor(centre + r + 1e-12)
        if i == 0:
            if hi < lo:
                return
            xs = np.arange(lo, hi + 1)
            vals = qd[0] * (xs - centre) ** 2
            xs = xs[vals <= remaining]
            if xs.size:
                block = np.empty((xs.size, n), dtype=np.int64)
                block[:, 0] = xs
                for j in range(1, n):
                    block[:, j] = c[j]
                chunks.append(block)
            return
        for x in range(lo, hi + 1):
            rem = remaining - qd[i] * (x - centre) ** 2
            if rem < -1e-12:
                continue
            c[i] = x
            rec(i - 1, rem)
        c[i] = 0

    rec(n - 1, bound)
    if not chunks:
        return np.zeros((0, n), dtype=np.int64)
    C = np.concatenate(chunks) @ U
    if not include_zero:
        C = C[np.any(C != 0, axis=1)]
    # exact final filter in the original basis
    norms = np.einsum("ij,ij->i", C @ B, C @ B)
    return C[norms <= bound]


def integer_kernel_mod(M, m: int) -> tuple:
    """HNF of the lattice {x in Z^d : x M = 0 mod m} for an integer d x k matrix M."""
    d = len(M)
    k = len(M[0]) if d else 0
    # lattice generated by solutions: use HNF of [M | I] stacked with [m I_k | 0]
    rows = []
    for i in range(d):
        rows.append(list(M[i]) + [int(i == j) for j in range(d)])
    for j in range(k):
        rows.append([m * int(j == l) for l in range(k)] + [0] * d)
    # triangularise on the first k columns; rows with zero there give kernel vectors
    H = _hnf_general(rows)
    ker = [r[k:] for r in H if not any(r[:k])]
    return hnf(ker)


def _hnf_general(rows) -> list:
    """Echelon form (not necessarily full rank) over Z, rows kept."""
    A = [list(r) for r in rows]
    ncol = len(A[0])
    out = []
    for col in range(ncol):
        piv_rows = [r for r in A if r[col] != 0]
        rest = [r for r in A if r[col] == 0]
        while len(piv_rows) > 1:
            piv_rows.sort(key=lambda r: abs(r[col]))
            p = piv_rows[0]
            new = [p]
            for r in piv_rows[1:]:
                q = r[col] // p[col]
                r2 = [a - q * b for a, b in zip(r, p)]
                if r2[col] != 0:
                    new.append(r2)
                else:
                    rest.append(r2)
            piv_rows = new
        if piv_rows:
            out.append(piv_rows[0])
        A = rest
    out.extend(r for r in A if any(r))
    return out


def isqrt_exact(n: int):
    r = isqrt(n)
    return r if r * r == n else None
