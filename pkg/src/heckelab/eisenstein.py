"""Eisenstein series on the upper half space of GL_n over F: direct sums, Fourier expansion
(n = 2), residue and Kronecker limit closed forms."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special as sp

from ._lattice import lcm, lll, short_vectors
from .arith import WEIGHT, LSeriesEvaluator, divisor_sum, euler_kronecker, hecke_L, kappa, mobius_class_sums
from .ideals import (
    FractionalIdeal, OFLattice, class_group, codifferent, ideal_inv, ideal_mul, principal_ideal,
)
from .numfield import FieldElement
from .space import UHSPoint, act, embed_matrix
from .special import bessel_k, digamma_k, gamma_k
from .units import unit_group
from .zeta import PartialZetaJob, cell_enumerate, classes_from_fcoords, partial_zeta


class EisensteinError(ValueError):
    pass


# ------------------------------------------------------------------ shared zeta / L caches

_LOCK = threading.Lock()
_ZETA = {}
_LEV = {}


def _zeta_job(F, cls, X, residue="exact"):
    key = (id(F), cls, int(X), residue)
    with _LOCK:
        hit = _ZETA.get(key)
    if hit is None:
        G = class_group(F)
        rep = G.representatives[cls] if G.h > 1 else FractionalIdeal.unit(F)
        job = PartialZetaJob(F, rep.integral_multiple()[1], X, residue=residue)
        with _LOCK:
            hit = _ZETA.setdefault(key, (F, job))
    return hit[1]


def zeta_partial(F, cls, s, X=100000, residue="exact"):
    """(ζ_F(𝒞, s), error) for the class 𝒞 of integral ideals."""
    return partial_zeta(_zeta_job(F, cls, X, residue), s)


def zeta_full(F, s, X=100000, residue="exact"):
    vals = [zeta_partial(F, c, s, X, residue) for c in range(class_group(F).h)]
    return sum(v for v, _ in vals), sum(e for _, e in vals)


def _evaluators(F, X, mode):
    key = (id(F), int(X), mode)
    with _LOCK:
        hit = _LEV.get(key)
    if hit is None:
        G = class_group(F)
        ev = [(chi, LSeriesEvaluator(F, None if chi.is_trivial else chi, int(X), mode))
              for chi in G.characters]
        with _LOCK:
            hit = _LEV.setdefault(key, (F, ev))
    return hit[1]


def anti_integral_rep(F, cls) -> FractionalIdeal:
    """An anti-integral ideal in the class cls."""
    G = class_group(F)
    if G.h == 1:
        return FractionalIdeal.unit(F)
    b = G.representatives[G.inverse(cls)].integral_multiple()[1]
    return ideal_inv(b)


# ------------------------------------------------------------------ series object

@dataclass
class EisensteinSeries:
    """E_{(𝔞⊂L)} (give ``a``), E_{L,𝒜} (give ``cls``) or E_L (neither).

    X: direct-path truncation (Ewald cutoff exp(-T) with T = 4 log X, or the norm bound of the
    literal sum); bessel_radius: cutoff Σ_σ 2π|σν|y_σ for the Fourier ν-sum; l_X, l_mode:
    truncation and mode of the L-series and partial zeta values.
    """

    L: OFLattice
    a: FractionalIdeal = None
    cls: int = None
    X: float = 1e4
    bessel_radius: float = 30.0
    l_X: int = 100000
    l_mode: str = "smooth"

    def __post_init__(self):
        if self.a is not None and self.cls is not None:
            raise EisensteinError("give either the ideal 𝔞 or the class 𝒜, not both")
        if self.a is not None and not self.a.is_anti_integral():
            raise EisensteinError("𝔞 must be anti-integral")
        if self.cls is not None and not 0 <= self.cls < class_group(self.field).h:
            raise EisensteinError("class index out of range")

    @property
    def field(self):
        return self.L.field

    @property
    def n(self) -> int:
        return self.L.n

    @property
    def kind(self) -> str:
        if self.a is not None:
            return "parabolic"
        return "class" if self.cls is not None else "full"

    def classes(self):
        if self.a is not None:
            return [class_group(self.field).class_of(self.a)]
        if self.cls is not None:
            return [self.cls]
        return list(range(class_group(self.field).h))

    def with_class(self, c) -> "EisensteinSeries":
        return EisensteinSeries(self.L, None, c, self.X, self.bessel_radius, self.l_X, self.l_mode)

    def with_ideal(self, a) -> "EisensteinSeries":
        return EisensteinSeries(self.L, a, None, self.X, self.bessel_radius, self.l_X, self.l_mode)


def _check_s(s):
    s = complex(s)
    if s.real <= 1:
        raise EisensteinError("direct summation needs Re s > 1")
    return s


def _det_factor(z: UHSPoint, s):
    """Π_σ |det g_σ|^{n_σ s} = |N y'_1 y'_2 ... |^s."""
    F = z.field
    out = 0.0
    for g, p in zip(z.matrices(), F.places):
        out += p.n * math.log(abs(np.linalg.det(g)))
    return np.exp(complex(s) * out)


def _lattice_rows(F, ideals, mats) -> np.ndarray:
    """Real images (per place, x g_σ, complex places as Re | Im) of the Z-basis of ⊕ 𝔟_i."""
    rows = []
    for i, I in enumerate(ideals):
        for r in I.basis:
            vals = F.embed(r)
            parts = []
            for sidx, (p, g) in enumerate(zip(F.places, mats)):
                v = vals[sidx] * np.asarray(g)[i, :]
                parts.append(v.real if p.kind == "real" else np.concatenate([v.real, v.imag]))
            rows.append(np.concatenate(parts))
    return np.array(rows, dtype=float)


def _csum(vals) -> complex:
    vals = np.asarray(vals)
    if not vals.size:
        return 0j
    return complex(math.fsum(vals.real.tolist()), math.fsum(np.imag(vals).tolist()))


# ------------------------------------------------------------------ Epstein / Ewald

def upper_gamma_scaled(a, x) -> np.ndarray:
    """G_a(x) = Γ(a, x) x^{-a} = ∫_1^∞ e^{-xt} t^{a-1} dt for x > 0."""
    x = np.asarray(x, dtype=float)
    a = complex(a)
    if a.imag:
        import mpmath
        return np.array([complex(mpmath.gammainc(a, float(t))) * float(t) ** (-a) for t in x.ravel()],
                        dtype=complex).reshape(x.shape)
    a = a.real
    if a > 0:
        return sp.gammaincc(a, x) * sp.gamma(a) * x ** (-a)
    out = np.empty_like(x)
    big = x >= 0.75
    if np.any(big):
        out[big] = _upper_gamma_cf(a, x[big])
    if np.any(~big):
        out[~big] = _upper_gamma_recurrence(a, x[~big])
    return out


def _upper_gamma_cf(a: float, x: np.ndarray) -> np.ndarray:
    """e^{-x} times the Legendre continued fraction for Γ(a, x) x^{-a} (modified Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 500):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return np.exp(-x) * h


def _upper_gamma_recurrence(a: float, x: np.ndarray) -> np.ndarray:
    # Γ(b, x) = (Γ(b + 1, x) - x^b e^{-x}) / b, stepping down from (0, 1]
    if abs(a - round(a)) < 1e-14:
        b = 0.0
        g = sp.exp1(x)
    else:
        b = a + math.ceil(-a)
        g = sp.gammaincc(b, x) * sp.gamma(b)
    while b - a > 0.5:
        b -= 1
        g = (g - x ** b * np.exp(-x)) / b
    return g * x ** (-a)


def epstein_zeta(B, sigma, T: float = 40.0) -> tuple:
    """(Z(σ), tail) for Z(σ) = Σ'_{v ∈ Z^m B} |v|^{-2σ}, B square, by theta splitting.

    π^{-σ}Γ(σ)Z = Σ' G_σ(π|v|^2) + Σ'_{dual} G_{m/2-σ}(π|u|^2) - 1/σ - 1/(m/2 - σ) at unit covolume.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    m = B.shape[0]
    sigma = complex(sigma)
    V = abs(np.linalg.det(B))
    c = V ** (1.0 / m)
    Bu, _ = lll(B / c)
    Bd = np.linalg.inv(Bu).T
    pad = 8.0

    def side(M, a):
        C = short_vectors(M, (T + pad) / math.pi)
        if not len(C):
            return 0j, 0.0
        r2 = np.sum((C @ M) ** 2, axis=1)
        keep = r2 > 0
        x = math.pi * r2[keep]
        order = np.argsort(x, kind="stable")
        x = x[order]
        vals = upper_gamma_scaled(a, x)
        inside = x <= T
        return _csum(vals[inside]), float(np.sum(np.abs(vals[~inside]))) * 2.0

    s1, t1 = side(Bu, sigma)
    s2, t2 = side(Bd, m / 2 - sigma)
    lam = s1 + s2 - 1 / sigma - 1 / (m / 2 - sigma)
    pref = np.exp(sigma * math.log(math.pi)) / complex(sp.gamma(sigma) if sigma.imag else sp.gamma(sigma.real))
    scale = np.exp(-2 * sigma * math.log(c))
    val = scale * pref * lam
    return complex(val), float(abs(scale * pref) * (t1 + t2) + 1e-15 * abs(val))


def _ewald_T(X) -> float:
    return max(30.0, 4.0 * math.log(float(X)))


def _lattice_sum_ewald(F, ideals, z, s, X) -> tuple:
    """S(M) = Σ'_{x ∈ M} Π_σ ‖x g_σ‖^{-n n_σ s}, unit rank 0 only (one place)."""
    if F.num_places != 1:
        raise EisensteinError("Ewald summation needs a single infinite place")
    n = len(ideals)
    B = _lattice_rows(F, ideals, z.matrices())
    sigma = n * F.places[0].n * complex(s) / 2
    return epstein_zeta(B, sigma, _ewald_T(X))


def _direct_parabolic_ewald(series, z, s) -> tuple:
    """E_{(𝔞⊂L)} by Möbius inversion over content: Σ_C S(𝔪_C 𝔞^{-1} L) N𝔪_C^{ns} M_C(ns)."""
    F = series.field
    G = class_group(F)
    n = series.n
    a_inv = ideal_inv(series.a)
    M = [ideal_mul(a_inv, I) for I in series.L.ideals]
    if G.h == 1:
        Zv, Ze = zeta_full(F, n * s, series.l_X)
        mob = [1 / Zv]
        mob_err = Ze / abs(Zv) ** 2
    else:
        mob = mobius_class_sums(F, n * s, series.l_X)
        mob_err = 1e-14 * sum(abs(v) for v in mob)
    total, err = 0j, 0.0
    for c in range(G.h):
        mC = G.representatives[c].integral_multiple()[1] if G.h > 1 else FractionalIdeal.unit(F)
        S, Se = _lattice_sum_ewald(F, [ideal_mul(mC, I) for I in M], z, s, series.X)
        w = np.exp(n * s * math.log(float(mC.norm)))
        total += S * w * mob[c]
        err += (Se * abs(mob[c]) + abs(S) * mob_err) * abs(w)
    wF = unit_group(F).torsion_order
    det = _det_factor(z, s)
    return det * total / wF, abs(det) * err / wF


# ------------------------------------------------------------------ literal smooth sum (unit rank 1)

def _rho_total(L, z) -> float:
    """Density of Π_σ ‖x g_σ‖^{n n_σ} over O_F^×\\L for real quadratic F."""
    F = L.field
    n = L.n
    if not (F.d == 2 and F.r1 == 2):
        raise EisensteinError("literal density is implemented for real quadratic F")
    A = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    R = unit_group(F).regulator
    covol = abs(F.discriminant) ** (n / 2) * float(np.prod([float(I.norm) for I in L.ideals]))
    det = float(np.prod([abs(np.linalg.det(g)) for g in z.matrices()]))
    return A ** 2 * R / (2 * n * covol * det)


def _fcoord_matrix(L):
    """Integer matrix (and denominator) mapping L.z_basis coefficients to stacked F-coordinates."""
    F = L.field
    rows = []
    for i, I in enumerate(L.ideals):
        for r in I.basis:
            row = [Fraction(0)] * (L.n * F.d)
            for t, v in enumerate(r):
                row[i * F.d + t] = Fraction(v)
            rows.append(row)
    den = 1
    for r in rows:
        for v in r:
            den = lcm(den, v.denominator)
    return np.array([[int(v * den) for v in r] for r in rows], dtype=np.int64)


_LIT_CACHE = {}


def _literal_points(L, z, Y):
    key = (id(L), z.X.tobytes(), z.y.tobytes(), float(Y))
    with _LOCK:
        hit = _LIT_CACHE.get(key)
    if hit is not None:
        return hit[1]
    F = L.field
    n = L.n
    ud = unit_group(F)
    R = _lattice_rows(F, L.ideals, z.matrices())
    blocks = [list(range(i * n, (i + 1) * n)) for i in range(F.num_places)]
    nsig = [n * p.n for p in F.places]
    lam = n * np.asarray(ud.log_lattice[0], dtype=float)
    m = R.shape[0]
    tors = [np.eye(m, dtype=np.int64), -np.eye(m, dtype=np.int64)]
    C, N = cell_enumerate(R, blocks, nsig, lam, tors, Y)
    cls = classes_from_fcoords(L, C @ _fcoord_matrix(L))
    out = (N, cls)
    with _LOCK:
        _LIT_CACHE[key] = (L, out)
        if len(_LIT_CACHE) > 64:
            _LIT_CACHE.pop(next(iter(_LIT_CACHE)))
    return out


def _smooth_sum(N, s, Y, rho):
    t = N / Y
    terms = WEIGHT(t) * np.exp(-s * np.log(N))
    order = np.argsort(N, kind="stable")
    val = _csum(terms[order])
    u = 1 - s
    return val - rho * complex(WEIGHT.mellin(u)) * np.exp(u * math.log(Y))


def _direct_class_literal(series, cls, z, s) -> tuple:
    """E_{L,𝒜} = Π|det g_σ|^{n_σ s} Σ_{[𝔞(x)] = 𝒜} N(x)^{-s} over O_F^×\\L, smoothed in N."""
    F = series.field
    n = series.n
    Y = float(series.X)
    N, cls_arr = _literal_points(series.L, z, Y)
    rho_t = _rho_total(series.L, z)
    zc, _ = zeta_partial(F, class_group(F).inverse(cls), n, series.l_X)
    zf, _ = zeta_full(F, n, series.l_X)
    rho = rho_t * zc / zf
    sel = N[cls_arr == cls]
    v1 = _smooth_sum(sel, s, Y, rho)
    v2 = _smooth_sum(sel[sel <= Y / 2], s, Y / 2, rho)
    det = _det_factor(z, s)
    return det * v1, abs(det) * abs(v1 - v2)


# ------------------------------------------------------------------ public direct path

def eisenstein_direct_err(series: EisensteinSeries, z: UHSPoint, s) -> tuple:
    """(value, truncation error estimate) of the direct sum."""
    s = _check_s(s)
    F = series.field
    n = series.n
    rank = unit_group(F).rank
    if series.kind == "full":
        parts = [eisenstein_direct_err(series.with_class(c), z, s) for c in series.classes()]
        return sum(v for v, _ in parts), sum(e for _, e in parts)
    if rank == 0:
        if series.kind == "parabolic":
            return _direct_parabolic_ewald(series, z, s)
        a = anti_integral_rep(F, series.cls)
        v, e = _direct_parabolic_ewald(series.with_ideal(a), z, s)
        zc, ze = zeta_partial(F, class_group(F).class_of(ideal_inv(a)), n * s, series.l_X)
        f = np.exp(-n * s * math.log(float(a.norm)))
        return zc * f * v, abs(f) * (abs(zc) * e + ze * abs(v))
    if rank == 1:
        if series.kind == "class":
            return _direct_class_literal(series, series.cls, z, s)
        a = series.a
        c = class_group(F).class_of(a)
        v, e = _direct_class_literal(series, c, z, s)
        zc, ze = zeta_partial(F, class_group(F).class_of(ideal_inv(a)), n * s, series.l_X)
        f = np.exp(n * s * math.log(float(a.norm)))
        return f * v / zc, abs(f) * (e / abs(zc) + abs(v) * ze / abs(zc) ** 2)
    raise EisensteinError("direct summation is implemented for unit rank <= 1")


def eisenstein_direct(series: EisensteinSeries, z: UHSPoint, s) -> complex:
    return eisenstein_direct_err(series, z, s)[0]


def scaling_law_check(L, a, alpha, z, s, **kw) -> tuple:
    """(E_{(α𝔞⊂L)}, |N α|^{ns} E_{(𝔞⊂L)}) for α ∈ F^× with α𝔞 anti-integral."""
    F = L.field
    alpha = alpha if isinstance(alpha, FieldElement) else F.from_rational(alpha)
    aa = ideal_mul(principal_ideal(alpha), a)
    lhs = eisenstein_direct(EisensteinSeries(L, aa, **kw), z, s)
    rhs = abs(float(F.norm(alpha))) ** (L.n * complex(s)) * eisenstein_direct(EisensteinSeries(L, a, **kw), z, s)
    return lhs, rhs


def automorphy_residual(series, gamma, z, s) -> tuple:
    """(|E(γz) - E(z)|, combined error estimates).

    The estimate includes the rounding of γz itself: a backward-stable Iwasawa step perturbs
    the coordinates by about eps·cond(γ g) relatively, which moves E by n|s| times that.
    """
    v1, e1 = eisenstein_direct_err(series, z, s)
    v2, e2 = eisenstein_direct_err(series, act(gamma, z), s)
    kap = max(np.linalg.cond(a @ g) for a, g in zip(embed_matrix(series.field, gamma), z.matrices()))
    rounding = np.finfo(float).eps * kap * series.n * abs(complex(s)) * max(abs(v1), abs(v2))
    return abs(v1 - v2), e1 + e2 + rounding


# ------------------------------------------------------------------ Fourier expansion (n = 2)

@dataclass
class FourierTermSet:
    """Φ_0, Φ_1, Ψ_0 at (z, s) for E_{L,[𝔞]} / ζ_F(𝔞^{-1}, 2s), with prefactors and tails."""

    c0: complex
    c1: complex
    d0: complex
    phi: list
    psi: list
    phi_err: float
    psi_tail: float
    nu_count: int
    zeta_factor: complex = None
    zeta_err: float = 0.0

    @property
    def reduced(self) -> complex:
        return sum(self.phi) + sum(self.psi)

    @property
    def error(self) -> float:
        return self.phi_err + self.psi_tail


def _require_n2(L):
    if L.n != 2:
        raise EisensteinError("the Fourier evaluator is implemented for n = 2")


def _log_norm_y(z):
    return float(np.sum(np.asarray(z.field.local_degrees) * np.log(z.y[:, 0])))


def _chi_eval(chi, c):
    return complex(chi.values[c])


def _fourier_c1(F, L, z, s):
    d = F.d
    lny = _log_norm_y(z)
    N1, N2 = float(L.ideals[0].norm), float(L.ideals[1].norm)
    return (2 ** F.r2 * math.pi ** (d / 2) / math.sqrt(abs(F.discriminant))
            * gamma_k(F, 2 * s - 1) / gamma_k(F, 2 * s)
            * np.exp((1 - 2 * s) * math.log(N1)) / N2 * np.exp((1 - s) * lny))


def phi_term(series: EisensteinSeries, j: int, z: UHSPoint, s, cls=None) -> tuple:
    """(Φ_j(z, s), error) for n = 2 and the class cls (default: the series' class)."""
    _require_n2(series.L)
    F = series.field
    L = series.L
    G = class_group(F)
    s = complex(s)
    c = series.classes()[0] if cls is None else cls
    lny = _log_norm_y(z)
    a1, a2 = L.ideals
    if j == 0:
        if G.class_of(a2) != c:
            return 0j, 0.0
        return np.exp(-2 * s * math.log(float(a2.norm)) + s * lny), 0.0
    if j != 1:
        raise EisensteinError("n = 2 has Φ_0 and Φ_1 only")
    c1 = _fourier_c1(F, L, z, s)
    A = G.compose(c, G.class_of(ideal_inv(a1)))  # [𝔞 𝔞_1^{-1}]
    total, err = 0j, 0.0
    for chi, ev in _evaluators(F, series.l_X, series.l_mode):
        num, en = hecke_L(ev, 2 * s - 1)
        den, ed = hecke_L(ev, 2 * s)
        t = _chi_eval(chi, G.inverse(A)) * num / den
        total += t
        err += abs(t) * (en / abs(num) + ed / abs(den))
    return c1 * total / G.h, abs(c1) * err / G.h


_SIGMA_CACHE = {}


def _nu_points(F, c_ideal, z, radius):
    """(coords, x_σ = 2π n_σ|σν|y_σ per place, σ(ν)) for ν ∈ 𝔠 - 0 with Σ_σ x_σ <= radius."""
    rows = np.array([[float(v) for v in r] for r in c_ideal.basis])
    vals = rows @ F.V  # basis images per place
    B = []
    for i in range(len(rows)):
        part = []
        for sidx, p in enumerate(F.places):
            w = 2 * math.pi * p.n * z.y[sidx, 0]
            v = vals[i, sidx] * w
            part.extend([v.real] if p.kind == "real" else [v.real, v.imag])
        B.append(part)
    B = np.array(B)
    C = short_vectors(B, radius ** 2)
    C = C[np.any(C != 0, axis=1)]
    sig = C @ vals
    # trace pairing: the frequency at a complex place has length 2|σν|
    deg = np.asarray(F.local_degrees, dtype=float)
    xs = 2 * math.pi * deg[None, :] * np.abs(sig) * z.y[:, 0][None, :]
    keep = xs.sum(axis=1) <= radius
    return C[keep], xs[keep], sig[keep]


def psi_term(series: EisensteinSeries, j: int, z: UHSPoint, s, cls=None) -> tuple:
    """(Ψ_0(z, s), tail estimate) for n = 2 by the ν-sum over 𝔠 = 𝔞_1𝔞_2^{-1}𝔡^{-1}."""
    _require_n2(series.L)
    if j != 0:
        raise EisensteinError("n = 2 has Ψ_0 only")
    F = series.field
    L = series.L
    G = class_group(F)
    s = complex(s)
    c = series.classes()[0] if cls is None else cls
    a1, a2 = L.ideals
    d = F.d
    t = 2 * s
    lny = _log_norm_y(z)
    c0 = np.exp(-t * math.log(float(a2.norm)) + s * lny)
    d0 = (2 ** d * np.exp(d * s * math.log(math.pi)) / (math.sqrt(abs(F.discriminant)) * gamma_k(F, t)) * c0)
    cc = ideal_mul(ideal_mul(a1, ideal_inv(a2)), codifferent(F))
    cc_inv = ideal_inv(cc)
    R = float(series.bessel_radius)
    C, xs, sig = _nu_points(F, cc, z, R + 10.0)
    if not len(C):
        return 0j, 0.0
    A = G.compose(c, G.class_of(ideal_inv(a1)))
    chis = _evaluators(F, series.l_X, series.l_mode)
    Ls = []
    for chi, ev in chis:
        Ls.append((chi, hecke_L(ev, t)))
    Nc = float(cc.norm)
    dF = abs(F.discriminant)
    # Z-factor per 𝔫 = ν 𝔠^{-1}
    zcache = {}
    lnN = np.log(np.abs(sig)) @ np.asarray(F.local_degrees, dtype=float)
    coeff = np.empty(len(C), dtype=complex)
    for k, row in enumerate(C):
        nu = sum((int(ci) * FieldElement(F, list(r)) for ci, r in zip(row, cc.basis)), F.zero)
        nn = ideal_mul(principal_ideal(nu), cc_inv)
        key = nn.hnf
        if key not in zcache:
            tot = 0j
            for chi, (Lv, _) in Ls:
                tot += _chi_eval(chi, G.inverse(A)) * divisor_sum(nn, 1 - t, None if chi.is_trivial else chi) / Lv
            zcache[key] = tot / G.h
        coeff[k] = zcache[key]
    # N(𝔫 𝔡^{-1}) = |N ν| / (N𝔠 d_F)
    lnn = lnN - math.log(Nc) - math.log(dF)
    bes = np.ones(len(C), dtype=complex)
    for sidx, p in enumerate(F.places):
        order = p.n * (t - 1) / 2
        x = xs[:, sidx]
        # K_{n_σ(2s-1)/2}(2π n_σ|σν|y_σ) (n_σ / |σν|y_σ)^{n_σ(2s-1)/2}
        bes = bes * bessel_k(order, x) * np.exp(order * np.log(2 * math.pi * p.n ** 2 / x))
    xv = z.x(1, 2)
    tr = np.zeros(len(C))
    for sidx, p in enumerate(F.places):
        v = sig[:, sidx] * xv[sidx]
        tr += v.real if p.kind == "real" else 2 * v.real
    terms = np.exp((t - 1) * lnn) * coeff * np.exp(2j * math.pi * tr) * bes
    shell = xs.sum(axis=1)
    order = np.argsort(shell, kind="stable")
    terms, shell = terms[order], shell[order]
    inside = shell <= R
    val = d0 * _csum(terms[inside])
    tail = abs(d0) * float(np.sum(np.abs(terms[~inside]))) * 2.0
    lerr = sum(abs(e) / abs(Lv) for _, (Lv, e) in Ls)
    return val, tail + abs(val) * lerr


def fourier_terms(series: EisensteinSeries, z: UHSPoint, s, cls=None) -> FourierTermSet:
    F = series.field
    s = complex(s)
    c = series.classes()[0] if cls is None else cls
    p0, e0 = phi_term(series, 0, z, s, c)
    p1, e1 = phi_term(series, 1, z, s, c)
    q0, t0 = psi_term(series, 0, z, s, c)
    lny = _log_norm_y(z)
    c0 = np.exp(-2 * s * math.log(float(series.L.ideals[1].norm)) + s * lny)
    return FourierTermSet(c0, _fourier_c1(F, series.L, z, s), None, [p0, p1], [q0], e0 + e1, t0, 0)


def eisenstein_fourier_err(series: EisensteinSeries, z: UHSPoint, s) -> tuple:
    """(value, error) of the series from its Fourier expansion; works off the poles for Re s > 1/2."""
    _require_n2(series.L)
    F = series.field
    s = complex(s)
    n = series.n
    G = class_group(F)
    if series.kind == "full":
        parts = [eisenstein_fourier_err(series.with_class(c), z, s) for c in series.classes()]
        return sum(v for v, _ in parts), sum(e for _, e in parts)
    ft = fourier_terms(series, z, s)
    red, err = ft.reduced, ft.error
    if series.kind == "parabolic":
        f = np.exp(n * s * math.log(float(series.a.norm)))
        return f * red, abs(f) * err
    zc, ze = zeta_partial(F, G.inverse(series.cls), n * s, series.l_X)
    return zc * red, abs(zc) * err + ze * abs(red)


def eisenstein_fourier(series: EisensteinSeries, z: UHSPoint, s) -> complex:
    return eisenstein_fourier_err(series, z, s)[0]


def constant_term_closed(series: EisensteinSeries, z: UHSPoint, s) -> complex:
    """The x_{12}-average of the series: the Φ-part of the expansion (scaled like the series)."""
    F = series.field
    s = complex(s)
    G = class_group(F)
    c = series.classes()[0]
    red = phi_term(series, 0, z, s, c)[0] + phi_term(series, 1, z, s, c)[0]
    if series.kind == "parabolic":
        return np.exp(2 * s * math.log(float(series.a.norm))) * red
    return zeta_partial(F, G.inverse(c), 2 * s, series.l_X)[0] * red


def eisenstein_class_relation_check(L, a, z, s, tol=None, **kw) -> tuple:
    """Check E_{L,[𝔞]} = ζ_F(𝔞^{-1}, ns) N𝔞^{-ns} E_{(𝔞⊂L)}.

    The left side comes from the Fourier expansion (n = 2) or, otherwise, the direct class sum;
    the right side from the direct parabolic sum. Returns (lhs, rhs, error); raises on failure.
    """
    F = L.field
    n = L.n
    s = complex(s)
    c = class_group(F).class_of(a)
    cls_series = EisensteinSeries(L, cls=c, **kw)
    if n == 2:
        lhs, el = eisenstein_fourier_err(cls_series, z, s)
    else:
        lhs, el = eisenstein_direct_err(cls_series, z, s)
    v, ev = eisenstein_direct_err(EisensteinSeries(L, a, **kw), z, s)
    zc, ze = zeta_partial(F, class_group(F).class_of(ideal_inv(a)), n * s, kw.get("l_X", 100000))
    f = np.exp(-n * s * math.log(float(a.norm)))
    rhs = zc * f * v
    er = abs(f) * (abs(zc) * ev + ze * abs(v))
    bound = el + er if tol is None else tol
    if not abs(lhs - rhs) <= max(bound, 1e-12 * abs(rhs)):
        raise AssertionError(f"class relation fails: |{lhs} - {rhs}| > {bound}")
    return lhs, rhs, el + er


# ------------------------------------------------------------------ residue and Kronecker limit

def residue_closed_form(L: OFLattice, cls: int, l_X: int = 100000) -> float:
    """Residue of E_{L,𝒜} at s = 1 (𝒜 = [𝔞])."""
    F = L.field
    n = L.n
    ud = unit_group(F)
    G = class_group(F)
    Nprod = float(np.prod([float(I.norm) for I in L.ideals]))
    zc, _ = zeta_partial(F, G.inverse(cls), n, l_X)
    zf, _ = zeta_full(F, n, l_X)
    val = ((2 ** F.r2 * math.pi ** (F.d / 2) / math.sqrt(abs(F.discriminant))) ** n
           * 2 ** F.r1 / gamma_k(F, n) * ud.regulator / (n * ud.torsion_order) * zc / zf / Nprod)
    return float(np.real(val))


@dataclass
class KroneckerLimit:
    value: complex
    H: complex
    H_star: complex
    parts: dict = field(default_factory=dict)
    error: float = 0.0


def _bold_c(F, L):
    return np.real(_fourier_c1(F, L, _unit_point(F), 1.0))


def _unit_point(F):
    return UHSPoint.from_coordinates(F, 0.0, 1.0)


def kronecker_limit_closed_form(L: OFLattice, cls: int, z: UHSPoint, bessel_radius: float = 30.0,
                                l_X: int = 100000) -> KroneckerLimit:
    """Constant term at s = 1 of E_{L,𝒜}(z, s), n = 2, with H and the automorphic H*."""
    _require_n2(L)
    F = L.field
    n = 2
    G = class_group(F)
    ser = EisensteinSeries(L, cls=cls, bessel_radius=bessel_radius, l_X=l_X)
    zc, ze = zeta_partial(F, G.inverse(cls), n, l_X)
    zf, zfe = zeta_full(F, n, l_X)
    p0, _ = phi_term(ser, 0, z, 1.0)
    q0, qt = psi_term(ser, 0, z, 1.0)
    H = zc * (p0 + q0)
    c = _bold_c(F, L)
    kap = kappa(F)
    A = G.compose(cls, G.class_of(ideal_inv(L.ideals[0])))  # [𝔞𝔞_1^{-1}]
    gam_part = 0j
    gerr = 0.0
    for chi, ev in _evaluators(F, l_X, "smooth"):
        Ln, _ = hecke_L(ev, n)
        gk, ge = euler_kronecker(ev)
        gam_part += _chi_eval(chi, G.inverse(A)) * zc / Ln * gk
        gerr += abs(zc / Ln) * ge
    gam_part *= c / G.h
    base = c * kap / G.h * zc / zf
    lny = _log_norm_y(z)
    log_part = base * (digamma_k(F, 1) - digamma_k(F, n) - math.log(float(L.ideals[0].norm)))
    y_part = -base * (n - 1) / n * lny
    dz_c = _zeta_job(F, G.inverse(cls), l_X).series().derivative(n)
    dz_f = sum(_zeta_job(F, k, l_X).series().derivative(n) for k in range(G.h))
    der_part = base * (dz_c / zc - dz_f / zf)
    value = H + gam_part + log_part + y_part + der_part
    parts = {"H": H, "gamma": gam_part, "psi_log": log_part, "y_log": y_part, "zeta_log_derivative": der_part}
    return KroneckerLimit(value, H, H + y_part, parts, abs(zc) * qt + abs(c) * gerr / G.h)


def hstar(L, cls, z, **kw) -> complex:
    return kronecker_limit_closed_form(L, cls, z, **kw).H_star


def hstar_automorphy_residual(L, cls, gamma, z, **kw) -> float:
    return abs(hstar(L, cls, act(gamma, z), **kw) - hstar(L, cls, z, **kw))


# ------------------------------------------------------------------ classical oracle

def eta(z: complex, terms: int = 400) -> complex:
    """Dedekind η(z) = q^{1/24} Π (1 - q^m), q = e^{2πiz}."""
    z = complex(z)
    q = np.exp(2j * math.pi * z)
    out = np.exp(2j * math.pi * z / 24)
    qm = 1 + 0j
    for _ in range(terms):
        qm *= q
        out *= 1 - qm
        if abs(qm) < 1e-18:
            break
    return complex(out)
