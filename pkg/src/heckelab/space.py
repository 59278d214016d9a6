"""The upper half space h^n_F, Iwasawa coordinates, Det, parabolic data, Γ_L and Heegner objects.

Conventions: group elements act on row vectors, x ↦ x g, and a point is the class
[g] ∈ GL_n(F_∞) / F_∞^× K.  At a complex place E_τ = C is identified with R² by
x + iy ↦ (y, x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._lattice import hnf, hnf_contains, short_vectors
from .ideals import FractionalIdeal, OFLattice, content_ideal, ideal_inv, ideal_mul
from .numfield import Extension, FieldElement, NumberField, f_det


class SpaceError(ValueError):
    pass


# ------------------------------------------------------------------ points

@dataclass(frozen=True)
class UHSPoint:
    """z = [XY] per place of F; X upper unipotent, Y = diag(y'_1, ..., y'_{n-1}, 1)."""

    field: NumberField
    X: np.ndarray  # (r_F, n, n), complex at complex places
    y: np.ndarray  # (r_F, n-1), y_i > 0

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def yprime(self) -> np.ndarray:
        """y'_i = y_i ... y_{n-1}, with y'_n = 1 appended."""
        r = self.X.shape[0]
        out = np.ones((r, self.n))
        for i in range(self.n - 2, -1, -1):
            out[:, i] = out[:, i + 1] * self.y[:, i]
        return out

    def x(self, i: int, j: int) -> np.ndarray:
        """x_{ij} per place (1-based indices, i < j)."""
        return self.X[:, i - 1, j - 1]

    def matrices(self) -> list:
        """Representatives g_σ = X_σ Y_σ."""
        yp = self.yprime
        out = []
        for s, p in enumerate(self.field.places):
            g = self.X[s] * yp[s][None, :]
            out.append(g.real.copy() if p.kind == "real" else g.copy())
        return out

    def nyk(self, k: int) -> float:
        """|N_{F/Q}(y_k)| = Π_σ y_{k,σ}^{n_σ}."""
        return float(np.prod(self.y[:, k - 1] ** self.field.local_degrees))

    @classmethod
    def from_coordinates(cls, F: NumberField, x, y) -> "UHSPoint":
        """n = 2 point with per-place x_{12} and y_1 (scalars are broadcast)."""
        r = F.num_places
        x = np.broadcast_to(np.asarray(x, dtype=complex), (r,))
        y = np.broadcast_to(np.asarray(y, dtype=float), (r,))
        if np.any(y <= 0):
            raise SpaceError("y must be positive")
        X = np.zeros((r, 2, 2), dtype=complex)
        X[:, 0, 0] = X[:, 1, 1] = 1
        for s, p in enumerate(F.places):
            X[s, 0, 1] = x[s].real if p.kind == "real" else x[s]
        return cls(F, X, y.reshape(r, 1).copy())

    @classmethod
    def from_complex(cls, z: complex) -> "UHSPoint":
        """The classical point z = x + iy of h for F = Q, n = 2."""
        from .numfield import rational_field
        z = complex(z)
        return cls.from_coordinates(rational_field(), z.real, z.imag)

    def as_complex(self) -> complex:
        if self.n != 2 or self.field.num_places != 1:
            raise SpaceError("as_complex needs F = Q and n = 2")
        return complex(self.X[0, 0, 1].real, self.y[0, 0])

    def distance(self, other: "UHSPoint") -> float:
        return float(max(np.max(np.abs(self.X - other.X)), np.max(np.abs(self.y - other.y))))


def iwasawa(F: NumberField, g) -> UHSPoint:
    """Iwasawa coordinates of [g] for g = (g_σ)_σ, one n×n matrix per place of F."""
    mats = [np.asarray(m) for m in g]
    if len(mats) != F.num_places:
        raise SpaceError("one matrix per place of F is required")
    n = mats[0].shape[0]
    r = F.num_places
    Xs = np.zeros((r, n, n), dtype=complex)
    ys = np.zeros((r, n - 1))
    for s, m in enumerate(mats):
        if m.shape != (n, n):
            raise SpaceError("matrices must be square of a common size")
        if abs(np.linalg.det(m)) < 1e-300:
            raise SpaceError("singular matrix")
        # scale rows for conditioning; Det and [g] do not see scalars
        sc = np.max(np.abs(m))
        mm = m / sc
        if F.places[s].kind == "real":
            mm = mm.real
        # g = T k with T upper triangular, from a QR of the flipped adjoint (backward stable,
        # unlike the Gram matrix route which squares the condition number)
        _, R1 = np.linalg.qr(mm[::-1, ::-1].conj().T)
        T = R1.conj().T[::-1, ::-1]
        d = np.diag(T).copy()
        Xs[s] = T / d[None, :]
        yp = np.abs(d) / abs(d[-1])
        for i in range(n - 1):
            ys[s, i] = yp[i] / yp[i + 1]
    return UHSPoint(F, Xs, ys)


def embed_matrix(F: NumberField, M) -> list:
    """Per-place images of a matrix with entries in F."""
    r = F.num_places
    n = len(M)
    out = [np.zeros((n, len(M[0])), dtype=complex) for _ in range(r)]
    for i, row in enumerate(M):
        for j, a in enumerate(row):
            if not isinstance(a, FieldElement):
                a = F.from_rational(a)
            v = F.embed(a)
            for s in range(r):
                out[s][i, j] = v[s]
    return [m.real if p.kind == "real" else m for m, p in zip(out, F.places)]


def act(gamma, z: UHSPoint) -> UHSPoint:
    """γ·z = [γ g] for γ ∈ GL_n(F)."""
    F = z.field
    G = embed_matrix(F, gamma)
    return iwasawa(F, [a @ g for a, g in zip(G, z.matrices())])


# ------------------------------------------------------------------ parabolic data

@dataclass(frozen=True)
class ParabolicData:
    """(𝔞 ⊂ L) with 1 ↦ e; requires e ∈ L_𝔞, i.e. the content of e is 𝔞."""

    L: OFLattice
    a: FractionalIdeal
    e: tuple

    def __post_init__(self):
        if len(self.e) != self.L.n:
            raise SpaceError("e has the wrong length")
        if not self.a.is_anti_integral():
            raise SpaceError("𝔞 must be anti-integral")
        if content_ideal(list(self.e), self.L) != self.a:
            raise SpaceError("e does not lie in L_𝔞")

    @classmethod
    def from_vector(cls, L: OFLattice, e) -> "ParabolicData":
        k = L.field
        e = tuple(x if isinstance(x, FieldElement) else k.from_rational(x) for x in e)
        return cls(L, content_ideal(list(e), L), e)

    def in_parabolic(self, gamma) -> bool:
        """γ ∈ P: γ ∈ Γ_L and 𝔞eγ = 𝔞e (equivalently eγ = u e with u ∈ O_F^×)."""
        if not gamma_L_member(gamma, self.L):
            return False
        k = self.L.field
        eg = _row_times(self.e, gamma, k)
        idx = next(i for i, c in enumerate(self.e) if not c.is_zero())
        u = eg[idx] / self.e[idx]
        if any(not (a - u * b).is_zero() for a, b in zip(eg, self.e)):
            return False
        return u.is_integral() and abs(k.norm(u)) == 1


def standard_parabolic(L: OFLattice, cls: int = 0, radius: float = 40.0) -> ParabolicData:
    """Some parabolic data (𝔞 ⊂ L) with [𝔞] the given class of Cl_F (short lattice vector search)."""
    from .ideals import class_group
    k = L.field
    G = class_group(k)
    basis = L.z_basis()
    rows = [np.concatenate([k.real_basis_matrix(np.array([[float(c) for c in e.c]]))[0] for e in v])
            for v in basis]
    C = short_vectors(np.array(rows), radius)
    best = None
    for c in sorted(C.tolist(), key=lambda c: (sum(abs(t) for t in c), c)):
        x = [sum((int(t) * v[i] for t, v in zip(c, basis)), k.zero) for i in range(L.n)]
        if all(e.is_zero() for e in x):
            continue
        a = content_ideal(x, L)
        if G.class_of(a) == cls:
            best = ParabolicData(L, a, tuple(x))
            break
    if best is None:
        raise SpaceError("no lattice vector with the requested content class in the search radius")
    return best


def det_function(p: ParabolicData, z: UHSPoint) -> float:
    """Det_{(𝔞⊂L)}(z) = Π_σ |det g_σ|^{n_σ} / ‖e g_σ‖^{n n_σ}."""
    F = z.field
    n = z.n
    ev = np.array([F.embed(c) for c in p.e])  # n x r
    out = 1.0
    for s, (g, pl) in enumerate(zip(z.matrices(), F.places)):
        v = ev[:, s] if pl.kind == "complex" else ev[:, s].real
        eg = v @ g
        nrm = float(np.linalg.norm(eg))
        if nrm == 0:
            raise SpaceError("e g_σ vanishes")
        out *= (abs(np.linalg.det(g)) / nrm ** n) ** pl.n
    return out


# ------------------------------------------------------------------ arithmetic group

def _row_times(x, gamma, k):
    n = len(gamma)
    out = []
    for j in range(n):
        acc = k.zero
        for i in range(n):
            g = gamma[i][j]
            if not isinstance(g, FieldElement):
                g = k.from_rational(g)
            acc = acc + x[i] * g
        out.append(acc)
    return out


def _lattice_hnf(L: OFLattice, vectors=None):
    k = L.field
    vecs = vectors if vectors is not None else L.z_basis()
    rows = [[c for e in v for c in e.c] for v in vecs]
    den = 1
    for r in rows:
        for v in r:
            den = den * v.denominator // math.gcd(den, v.denominator)
    H = hnf([[int(v * den) for v in r] for r in rows])
    return H, den


def _as_field_matrix(gamma, k):
    return [[g if isinstance(g, FieldElement) else k.from_rational(g) for g in row] for row in gamma]


def gamma_L_member(gamma, L: OFLattice) -> bool:
    """γ ∈ Γ_L = Stab_{SL_n(F)}(L): det γ = 1 and Lγ = L."""
    k = L.field
    n = L.n
    gamma = _as_field_matrix(gamma, k)
    if len(gamma) != n or any(len(r) != n for r in gamma):
        return False
    if f_det(gamma, k) != k.one:
        return False
    H, den = _lattice_hnf(L)
    images = [_row_times(v, gamma, k) for v in L.z_basis()]
    for v in images:
        flat = [c * den for e in v for c in e.c]
        if any(c.denominator != 1 for c in flat) or not hnf_contains(H, [int(c) for c in flat]):
            return False
    # det γ = 1 makes the index [L : Lγ] equal to 1; check the reverse inclusion explicitly.
    Hi, deni = _lattice_hnf(L, images)
    for v in L.z_basis():
        flat = [c * deni for e in v for c in e.c]
        if any(c.denominator != 1 for c in flat) or not hnf_contains(Hi, [int(c) for c in flat]):
            return False
    return True


def shear(L: OFLattice, i: int, j: int, alpha) -> list:
    """Elementary matrix I + α e_{ij}; it lies in Γ_L when α ∈ 𝔞_i^{-1}𝔞_j."""
    k = L.field
    n = L.n
    M = [[k.one if a == b else k.zero for b in range(n)] for a in range(n)]
    M[i][j] = alpha if isinstance(alpha, FieldElement) else k.from_rational(alpha)
    return M


def _matmul(A, B, k):
    n = len(A)
    return [[sum((A[i][t] * B[t][j] for t in range(n)), k.zero) for j in range(n)] for i in range(n)]


def random_shear_word(L: OFLattice, length: int, rng, coeff: int = 2) -> list:
    """A product of ``length`` upper/lower shears adapted to L (so a member of Γ_L)."""
    k = L.field
    n = L.n
    W = [[k.one if a == b else k.zero for b in range(n)] for a in range(n)]
    for _ in range(length):
        i, j = rng.choice(n, size=2, replace=False)
        I = ideal_mul(ideal_inv(L.ideals[i]), L.ideals[j])
        B = I.basis
        c = [int(rng.integers(-coeff, coeff + 1)) for _ in B]
        if not any(c):
            c[0] = 1
        alpha = k.element([sum((Fraction(ci) * Fraction(r[m]) for ci, r in zip(c, B)), Fraction(0))
                           for m in range(k.d)])
        W = _matmul(W, shear(L, int(i), int(j), alpha), k)
    return W


# ------------------------------------------------------------------ Heegner objects

def _sigma_columns(ext: Extension):
    """Per place σ of F: list of (τ, kind, conj) describing the columns of W_σ.

    kind "r" → one real coordinate; "c2" → the pair (Im, Re) of a complex τ over real σ;
    "c" → one complex coordinate at a complex σ, conjugated when τ restricts to σ̄.
    """
    E, F = ext.E, ext.F
    Fv = np.array([[float(v) for v in row] for row in ext.embedding]) @ E.V
    out = []
    for s, lst in enumerate(ext.place_map):
        sig = F.places[s]
        cols = []
        for t, _ in lst:
            tau = E.places[t]
            if sig.kind == "complex":
                conj = not np.allclose(Fv[:, t], np.array(sig.values), atol=1e-8)
                cols.append((t, "c", conj))
            elif tau.kind == "real":
                cols.append((t, "r", False))
            else:
                cols.append((t, "c2", False))
        out.append(cols)
    return out


def _iota_rows(ext, cols, vals):
    """ι-image in F_σ^n of E-elements with τ-values ``vals`` (k × r_E)."""
    parts = []
    for t, kind, conj in cols:
        v = vals[:, t]
        if kind == "r":
            parts.append(v.real[:, None])
        elif kind == "c2":
            parts.append(np.column_stack([v.imag, v.real]))
        else:
            parts.append((np.conj(v) if conj else v)[:, None])
    return np.hstack(parts)


@dataclass
class HeegnerObject:
    """The Heegner object of a basis w of E/F: ϖ(t) = [W I(t)]."""

    ext: Extension
    w: list
    W: list = field(init=False)
    Delta: Fraction = field(init=False)

    def __post_init__(self):
        ext = self.ext
        E, F = ext.E, ext.F
        if len(self.w) != ext.n:
            raise SpaceError("w must have n = [E:F] elements")
        self.place_map = ext.place_map
        self._cols = _sigma_columns(ext)
        vals = np.array([E.embed(x) for x in self.w])  # n x r_E
        self.W = []
        for s, cols in enumerate(self._cols):
            M = _iota_rows(ext, cols, vals)
            self.W.append(M.real.copy() if F.places[s].kind == "real" else M)
        # exact d_w from the relative trace form; ι changes |det| by 1/2 per complex τ over a real σ
        tr = [[_rel_trace(ext, a * b) for b in self.w] for a in self.w]
        d_tr = f_det(tr, F)
        if d_tr.is_zero():
            raise SpaceError("w is not a basis of E over F")
        self.d_trace = d_tr
        c = E.r2 - ext.n * F.r2
        self.Delta = abs(F.norm(d_tr)) / Fraction(4) ** c

    @property
    def abs_delta(self) -> float:
        return float(self.Delta)

    def delta_numeric(self) -> float:
        """Π_σ |det W_σ|^{2 n_σ}."""
        return float(np.prod([abs(np.linalg.det(M)) ** (2 * p.n) for M, p in zip(self.W, self.ext.F.places)]))

    def I_blocks(self, t) -> list:
        """Per σ the diagonal of I(t) in the column order of W_σ."""
        t = np.asarray(t, dtype=float)
        out = []
        for cols in self._cols:
            d = []
            for tau, kind, _ in cols:
                d.extend([t[tau]] * (2 if kind == "c2" else 1))
            out.append(np.array(d))
        return out

    def check_norm_one(self, t, tol: float = 1e-10):
        t = np.asarray(t, dtype=float)
        for lst in self.place_map:
            v = sum(m * math.log(t[tau]) for tau, m in lst)
            if abs(v) > tol:
                raise SpaceError("t is not in T_{E/F} (relative norm ≠ 1)")

    def matrices(self, t) -> list:
        return [M * d[None, :] for M, d in zip(self.W, self.I_blocks(t))]

    def rho(self, u: FieldElement) -> list:
        """Per-place images of ρ_w(u) (row i = F-coordinates of u w_i)."""
        return embed_matrix(self.ext.F, self.ext.regular_rep(u, self.w))

    def lemma_psi_residual(self, u: FieldElement) -> float:
        """max_σ ‖M M^* − 1‖ for M = W^{-1} ρ_w(u) W I(reg^×(u))^{-1}."""
        E = self.ext.E
        reg = np.abs(E.embed(u))
        res = 0.0
        for Wm, R, d in zip(self.W, self.rho(u), self.I_blocks(reg)):
            M = np.linalg.solve(Wm, R @ Wm) / d[None, :]
            res = max(res, float(np.max(np.abs(M @ M.conj().T - np.eye(len(d))))))
        return res

    def delta_identity(self, A: FractionalIdeal = None, L: OFLattice = None) -> tuple:
        """(|Δ_w|^{1/2}, 2^{n r2(F) − r2(E)} |d_E|^{1/2} N𝔄 / (|d_F|^{n/2} Π N𝔞_i))."""
        from .zeta import RelativeData
        ext = self.ext
        E, F = ext.E, ext.F
        A = A if A is not None else FractionalIdeal.unit(E)
        if L is None:
            L = RelativeData(ext, self.w, A).L
        prod = 1.0
        for I in L.ideals:
            prod *= float(I.norm)
        rhs = (2.0 ** (ext.n * F.r2 - E.r2) * math.sqrt(abs(E.discriminant)) * float(A.norm)
               / (abs(F.discriminant) ** (ext.n / 2) * prod))
        return math.sqrt(float(self.Delta)), rhs


def _rel_trace(ext: Extension, x: FieldElement) -> FieldElement:
    """Tr_{E/F}(x) as the trace of ρ_w(x) for the power basis."""
    rho = ext.regular_rep(x, ext.power_basis())
    acc = ext.F.zero
    for i in range(ext.n):
        acc = acc + rho[i][i]
    return acc


def heegner_point(h: HeegnerObject, t=None) -> UHSPoint:
    """ϖ(t) = [W I(t)] in Iwasawa coordinates."""
    E = h.ext.E
    if t is None:
        t = np.ones(E.num_places)
    h.check_norm_one(t)
    return iwasawa(h.ext.F, h.matrices(t))
