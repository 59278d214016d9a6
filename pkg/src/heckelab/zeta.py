"""Partial zeta functions (ideal sums and unit-orbit element sums) and relative partial zeta."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._lattice import short_vectors, lcm
from .arith import SmoothDirichletSeries, counts_table, kappa, _TLOCK
from .ideals import (
    BudgetExceeded, FractionalIdeal, IdealError, OFLattice, class_group, ideal_inv, ideal_mul,
    install_norm_classifier,
)
from .units import UnitError, _CELL_SHIFT, unit_group, unit_matrix_on_lattice


# ------------------------------------------------------------------ orbit enumeration

def _blocks(k):
    """Column blocks of the real embedding, one per place, and local degrees."""
    out = []
    col = 0
    for p in k.places:
        w = 2 if p.kind == "complex" else 1
        out.append(list(range(col, col + w)))
        col += w
    return out


def cell_enumerate(R, blocks, nsig, lam, torsion, Y, budget=20_000_000, delta=0.2):
    """Unit-orbit representatives of a lattice, bounded by P(x) = Π_σ q_σ(x)^{n_σ/2} <= Y.

    R: m x D real matrix (rows = Z-basis images); q_σ(x) = |x R restricted to block σ|^2.
    lam: unit log vector (n_σ log of the unit's scaling on block σ), or None for rank 0.
    torsion: integer m x m matrices of the torsion units acting on coefficient rows.
    Returns (integer coefficients, P values) of the representatives with θ in the unit cell.
    """
    R = np.asarray(R, dtype=float)
    nsig = np.asarray(nsig, dtype=float)
    d = float(nsig.sum())
    if lam is None:
        pieces = [(0.0, 0.0)]
    else:
        lam = np.asarray(lam, dtype=float)
        spread = float(np.max(np.abs(lam / nsig)))
        K = max(1, int(math.ceil(spread / (2 * delta))))
        lo = -0.5 + _CELL_SHIFT
        edges = lo + np.arange(K + 1) / K
        pieces = list(zip(edges[:-1], edges[1:]))
    coeffs, pvals = [], []
    total = 0
    for a, b in pieces:
        mid = (a + b) / 2
        half = (b - a) / 2
        if lam is None:
            rho = np.full(len(blocks), Y ** (1 / d))
            bound = d
        else:
            rho = Y ** (1 / d) * np.exp(mid * lam / nsig)
            bound = float(np.sum(nsig * np.exp(2 * half * np.abs(lam) / nsig)))
        S = R.copy()
        for sidx, cols in enumerate(blocks):
            S[:, cols] *= math.sqrt(nsig[sidx]) / rho[sidx]
        C = short_vectors(S, bound)
        total += len(C)
        if total > budget:
            raise BudgetExceeded("orbit enumeration exceeded its point budget")
        if not len(C):
            continue
        V = C @ R
        q = np.stack([np.sum(V[:, cols] ** 2, axis=1) for cols in blocks], axis=1)
        logq = np.log(q)
        P = np.exp(0.5 * logq @ nsig)
        m = P <= Y * (1 + 1e-12)
        if lam is not None:
            ell = 0.5 * logq * nsig
            ell0 = ell - np.outer(ell.sum(axis=1) / d, nsig)
            theta = ell0 @ lam / (lam @ lam)
            m &= (theta >= a) & (theta < b)
        C, P = C[m], P[m]
        if len(torsion) > 1 and len(C):
            keep = np.ones(len(C), dtype=bool)
            for T in torsion[1:]:
                keep &= _lex_ge(C, C @ T)
            C, P = C[keep], P[keep]
        coeffs.append(C)
        pvals.append(P)
    if not coeffs:
        return np.zeros((0, R.shape[0]), dtype=np.int64), np.zeros(0)
    return np.concatenate(coeffs), np.concatenate(pvals)


def _lex_ge(A, B):
    """Row-wise A >= B lexicographically."""
    diff = A - B
    nz = diff != 0
    first = np.argmax(nz, axis=1)
    any_nz = nz.any(axis=1)
    val = diff[np.arange(len(A)), first]
    return ~any_nz | (val > 0)


def _torsion_mats(ud, basis_rows):
    return [unit_matrix_on_lattice(z, basis_rows) for z in ud.torsion]


def element_orbits(k, I: FractionalIdeal, Y: float, budget=20_000_000):
    """Representatives x ∈ I / O_k^× with |N x| <= Y: (integer coefficients on I.basis, |N x|)."""
    ud = unit_group(k)
    if ud.rank > 1:
        raise UnitError("orbit enumeration is implemented for unit rank <= 1")
    rows = [[Fraction(v, I.den) for v in r] for r in I.hnf]
    R = k.real_basis_matrix(np.array([[float(v) for v in r] for r in rows]), weighted=False)
    lam = ud.log_lattice[0] if ud.rank else None
    tors = _torsion_mats(ud, rows)
    return cell_enumerate(R, _blocks(k), k.local_degrees, lam, tors, Y, budget)


# ------------------------------------------------------------------ partial zeta

@dataclass
class PartialZetaJob:
    field: object
    ideal: FractionalIdeal = None
    X: int = 100000
    mode: str = "ideal-sum"
    residue: str = "exact"  # "exact" (κ/h from the class number formula) or "empirical"

    def __post_init__(self):
        if self.ideal is None:
            self.ideal = FractionalIdeal.unit(self.field)
        if self.mode not in ("ideal-sum", "element-sum"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self._cache = {}

    def coefficients(self, X) -> np.ndarray:
        X = int(X)
        if X in self._cache:
            return self._cache[X]
        k = self.field
        if self.mode == "ideal-sum":
            c = class_group(k).class_of(self.ideal)
            out = counts_table(k, X)[:, c].copy()
        else:
            a = self.ideal
            inv = ideal_inv(a)
            Na = a.norm
            _, P = element_orbits(k, inv, X / float(Na) * (1 + 1e-9))
            norms = np.rint(P * float(Na)).astype(np.int64)
            norms = norms[norms <= X]
            out = np.bincount(norms, minlength=X + 1).astype(float)
        self._cache[X] = out
        return out

    def series(self, X=None) -> SmoothDirichletSeries:
        X = int(X or self.X)
        key = ("series", X)
        if key not in self._cache:
            if self.residue == "exact":
                r = kappa(self.field) / class_group(self.field).h
            else:
                r = "empirical"
            self._cache[key] = SmoothDirichletSeries(self.coefficients(X), r)
        return self._cache[key]


def partial_zeta(job: PartialZetaJob, s) -> tuple:
    """(ζ_k([𝔞], s), error estimate); smoothed sum with the pole correction."""
    s = complex(s)
    if s.real <= 0.5:
        raise ValueError("partial zeta evaluation needs Re s > 1/2")
    v = job.series().value(s)
    v2 = job.series(job.X // 2).value(s)
    return v, abs(v - v2) + 1e-15 * abs(v)


def partial_zeta_derivative(job: PartialZetaJob, s) -> complex:
    return job.series().derivative(s)


# ------------------------------------------------------------------ relative partial zeta

class RelativeData:
    """Transport between E and F^n through the basis w, and the lattice L ↔ 𝔄."""

    def __init__(self, ext, w, A: FractionalIdeal = None, L: OFLattice = None):
        self.ext = ext
        self.w = list(w)
        install_norm_classifier(ext)
        E, F = ext.E, ext.F
        self.A = A if A is not None else FractionalIdeal.unit(E)
        # rational matrix: E-coordinates -> stacked F-coordinates (n * d_F)
        rows = []
        for i in range(E.d):
            fc = ext.f_coordinates(E.basis(i), self.w)
            rows.append([c for f in fc for c in f.c])
        self.E_to_F = rows
        self.L = L if L is not None else self._lattice_from_A()

    def _lattice_from_A(self):
        """L = w^{-1}(𝔄) written as 𝔞_1 ⊕ ... ⊕ 𝔞_n (requires a split lattice)."""
        ext = self.ext
        F = ext.F
        n = ext.n
        dF = F.d
        pts = []
        for r in self.A.hnf:
            v = [Fraction(x, self.A.den) for x in r]
            fc = [sum((v[i] * self.E_to_F[i][j] for i in range(len(v))), Fraction(0))
                  for j in range(n * dF)]
            pts.append(fc)
        ideals = []
        for i in range(n):
            gens = []
            for p in pts:
                gens.append(p[i * dF:(i + 1) * dF])
            ideals.append(FractionalIdeal.from_z_basis(F, gens))
        L = OFLattice(tuple(ideals))
        # the projections span the components; check that L is the direct sum
        if _lattice_index(L, pts) != 1:
            raise IdealError("w^{-1}(𝔄) is not the direct sum of its coordinate projections; give L explicitly")
        return L

    def f_coords_int(self, C):
        """Stacked F-coordinates of the elements with integer coefficients C on 𝔄's basis, as
        (integer array, common denominator)."""
        B = [[Fraction(x, self.A.den) for x in r] for r in self.A.hnf]
        M = [[sum((B[a][i] * self.E_to_F[i][j] for i in range(len(B))), Fraction(0))
              for j in range(len(self.E_to_F[0]))] for a in range(len(B))]
        den = 1
        for r in M:
            for v in r:
                den = lcm(den, v.denominator)
        Mi = np.array([[int(v * den) for v in r] for r in M], dtype=np.int64)
        return C @ Mi, den


def _lattice_index(L, pts):
    """[L : span(pts)] as a rational covolume ratio."""
    from ._lattice import frac_det
    vol_pts = abs(frac_det(pts))
    vol_L = Fraction(1)
    for I in L.ideals:
        vol_L *= I.norm
    return vol_pts / vol_L


def content_classes(rel: RelativeData, C) -> np.ndarray:
    """Class in Cl_F of the content ideal 𝔞(x) = {α ∈ F : αx ∈ 𝔄} for each coefficient row of C."""
    F = rel.ext.F
    G = class_group(F)
    if G.h == 1:
        return np.zeros(len(C), dtype=np.int64)
    if F.d != 2 or G._genus is None:
        return _content_classes_slow(rel, C)
    X, den = rel.f_coords_int(C)
    return classes_from_fcoords(rel.L, X)


def classes_from_fcoords(L: OFLattice, X) -> np.ndarray:
    """Content classes for integer stacked F-coordinate rows X (any common denominator).

    Quadratic F with genus-detectable classes only: the content is read off from the norm of
    J = Σ x_i 𝔞_i^{-1}, computed as the gcd of 2x2 minors of its generators.
    """
    F = L.field
    G = class_group(F)
    X = np.asarray(X, dtype=np.int64)
    if G.h == 1:
        return np.zeros(len(X), dtype=np.int64)
    mats = []
    for i, I in enumerate(L.ideals):
        Iinv = ideal_inv(I)
        for r in Iinv.hnf:
            b = F.element([Fraction(v, Iinv.den) for v in r])
            mats.append((i, F.regular_matrix(b)))  # coords(y b) = coords(y) @ M
    D2 = 1
    for _, M in mats:
        for r in M:
            for v in r:
                D2 = lcm(D2, Fraction(v).denominator)
    gens = []
    for i, M in mats:
        Mi = np.array([[int(Fraction(v) * D2) for v in r] for r in M], dtype=np.int64)
        gens.append(X[:, 2 * i:2 * i + 2] @ Mi)
    g = np.zeros(len(X), dtype=np.int64)
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            minor = gens[a][:, 0] * gens[b][:, 1] - gens[a][:, 1] * gens[b][:, 0]
            g = np.gcd(g, np.abs(minor))
    # a scalar multiple of J is integral with norm g
    if np.any(g == 0):
        raise IdealError("degenerate content computation")
    cls_J = G._genus.classes_from_norms(g)
    inv = np.array([G.inverse(c) for c in range(G.h)])
    return inv[cls_J]


def _content_classes_slow(rel, C):
    from .ideals import content_ideal
    F = rel.ext.F
    G = class_group(F)
    X, den = rel.f_coords_int(C)
    out = []
    n = rel.ext.n
    for row in X:
        x = [F.element([Fraction(int(v), den) for v in row[i * F.d:(i + 1) * F.d]]) for i in range(n)]
        out.append(G.class_of(content_ideal(x, rel.L)))
    return np.array(out, dtype=np.int64)


@dataclass
class RelativeZetaJob:
    rel: RelativeData
    cls: int = 0
    X: int = 100000
    residue: str = "empirical"
    _cache: dict = field(default_factory=dict, repr=False)

    def class_counts(self, X=None) -> np.ndarray:
        """counts[m, 𝒜] = #{x ∈ 𝔄 / O_E^× : |N x| / N𝔄 = m, [𝔞(x)] = 𝒜}."""
        X = int(X or self.X)
        key = ("counts", X)
        if key in self._cache:
            return self._cache[key]
        rel = self.rel
        E = rel.ext.E
        NA = float(rel.A.norm)
        C, P = element_orbits(E, rel.A, X * NA * (1 + 1e-9))
        m = np.rint(P / NA).astype(np.int64)
        keep = m <= X
        C, m = C[keep], m[keep]
        cls = content_classes(rel, C)
        h = class_group(rel.ext.F).h
        out = np.zeros((X + 1, h))
        np.add.at(out, (m, cls), 1.0)
        self._cache[key] = out
        return out

    def series(self, X=None) -> SmoothDirichletSeries:
        X = int(X or self.X)
        key = ("series", X, self.cls)
        if key not in self._cache:
            if self.residue == "empirical":
                r = "empirical"
            else:
                r = float(self.residue)
            self._cache[key] = SmoothDirichletSeries(self.class_counts(X)[:, self.cls], r)
        return self._cache[key]


def relative_partial_zeta(job: RelativeZetaJob, s) -> tuple:
    """(ζ_{E/F,𝒜}(𝔄^{-1}, s), error estimate)."""
    s = complex(s)
    if s.real <= 1:
        raise ValueError("relative partial zeta needs Re s > 1")
    v = job.series().value(s)
    v2 = job.series(job.X // 2).value(s)
    return v, abs(v - v2) + 1e-15 * abs(v)


def relative_zeta_residue(job: RelativeZetaJob) -> tuple:
    """(residue at s = 1, error) of ζ_{E/F,𝒜}(𝔄^{-1}, s), estimated from the counts (X vs X/2)."""
    a = job.series().empirical_residue()
    b = job.series(job.X // 2).empirical_residue()
    return a, abs(a - b)


def relative_zeta_constant(job: RelativeZetaJob) -> tuple:
    """(constant term at s = 1, error) of ζ_{E/F,𝒜}(𝔄^{-1}, s) with the empirical residue."""
    a = job.series().constant_at_one()
    b = job.series(job.X // 2).constant_at_one()
    return a, abs(a - b)


# ------------------------------------------------------------------ residues and constants

def numeric_residue_and_constant(f, s0: float = 1.0, h0: float = 1 / 16, depth: int = 4):
    """(c_{-1}, c_0, err_{-1}, err_0) for f(s) ≈ c_{-1}/(s - s0) + c_0 + ... on the real axis.

    Symmetric samples at s0 ± h 2^{-j}; Richardson in h^2.
    """
    hs = [h0 / 2 ** j for j in range(depth + 1)]
    res, con = [], []
    for h in hs:
        a, b = complex(f(s0 + h)), complex(f(s0 - h))
        res.append(h * (a - b) / 2)
        con.append((a + b) / 2)

    def richardson(vals):
        table = [list(vals)]
        for lev in range(1, len(vals)):
            prev = table[-1]
            fac = 4 ** lev
            table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
        best = table[-1][0]
        err = abs(table[-1][0] - table[-2][-1]) if len(table) > 1 else abs(best)
        return best, err

    r, er = richardson(res)
    c, ec = richardson(con)
    if not (np.isfinite(r) and np.isfinite(c)):
        raise ArithmeticError("extrapolation did not converge")
    if abs(r) > 0 and er > 0.1 * abs(r):
        raise ArithmeticError("residue extrapolation unstable (pole order mismatch?)")
    return r, c, er, ec
