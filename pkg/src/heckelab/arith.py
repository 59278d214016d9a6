"""Arithmetic functions on ideals, smoothed Dirichlet series, Hecke L-functions and Z-sums."""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .ideals import (
    FractionalIdeal, IdealError, class_group, codifferent, divides, factor_ideal, ideal_counts,
    ideal_mul, ideal_pow, ideal_to_element, primes_above, _prime_norm_classes, _prime_factors,
)
from ._lattice import hnf, frac_inv, frac_matmul
from .units import unit_group


# ------------------------------------------------------------------ smoothing

class SmoothWeight:
    """w(t) = 1 on [0, a], a C^∞ step down to 0 on [a, 1]; Mellin transform W(u) = ∫ w(t) t^{u-1} dt."""

    def __init__(self, a: float = 0.25, nodes: int = 400):
        self.a = float(a)
        x, wts = np.polynomial.legendre.leggauss(nodes)
        self._t = self.a + (1 - self.a) * (x + 1) / 2
        self._wt = wts * (1 - self.a) / 2
        self._dw = -self.derivative(self._t)  # -w' >= 0, integrates to 1
        self._logt = np.log(self._t)
        self.M1 = float(self._wt @ (self._dw * self._logt))

    @staticmethod
    def _f(u):
        out = np.zeros_like(u)
        m = u > 0
        out[m] = np.exp(-1.0 / u[m])
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.clip((t - self.a) / (1 - self.a), 0.0, 1.0)
        f1, f0 = self._f(u), self._f(1 - u)
        return f0 / (f0 + f1)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        u = (t - self.a) / (1 - self.a)
        out = np.zeros_like(u)
        m = (u > 0) & (u < 1)
        um = u[m]
        f1 = np.exp(-1.0 / um)
        f0 = np.exp(-1.0 / (1 - um))
        d1 = f1 / um ** 2
        d0 = -f0 / (1 - um) ** 2
        out[m] = (d0 * f1 - f0 * d1) / (f0 + f1) ** 2 / (1 - self.a)
        return out

    def _J(self, u, k=0):
        """∫ (-w'(t)) t^u (log t)^k dt."""
        u = complex(u)
        return complex(self._wt @ (self._dw * np.exp(u * self._logt) * self._logt ** k))

    def mellin(self, u) -> complex:
        u = complex(u)
        if abs(u) < 1e-14:
            raise ZeroDivisionError("W has a pole at u = 0")
        return self._J(u) / u

    def mellin_derivative(self, u) -> complex:
        u = complex(u)
        return -self._J(u) / u ** 2 + self._J(u, 1) / u


WEIGHT = SmoothWeight()


def dyadic_tail(abs_terms: np.ndarray) -> float:
    """Tail estimate for Σ_{N>X} from the last two dyadic blocks of |terms| (index = N), inflated 2x."""
    X = len(abs_terms) - 1
    if X < 8:
        return float(np.sum(abs_terms))
    b1 = float(np.sum(abs_terms[X // 2 + 1:]))
    b0 = float(np.sum(abs_terms[X // 4 + 1:X // 2 + 1]))
    if b0 <= 0:
        return 2 * b1
    rho = min(b1 / b0, 0.95)
    return 2 * b1 * rho / (1 - rho)


class SmoothDirichletSeries:
    """D(s) = Σ c(N) N^{-s} evaluated as Σ c(N) N^{-s} w(N/X) - r W(1-s) X^{1-s}.

    ``residue`` is the residue r at s = 1 (0 for an entire series), or ``"empirical"`` to
    estimate r from the partial sums of c themselves.
    """

    def __init__(self, coeffs, residue=0.0, weight: SmoothWeight = WEIGHT):
        c = np.asarray(coeffs)
        self.X = len(c) - 1
        self.coeffs = c
        self.weight = weight
        N = np.arange(self.X + 1, dtype=float)
        N[0] = 1.0
        self._logN = np.log(N)
        wts = weight(np.arange(self.X + 1) / self.X)
        wts[0] = 0.0
        self._cw = c * wts
        if isinstance(residue, str):
            if residue != "empirical":
                raise ValueError(f"unknown residue mode {residue!r}")
            residue = self.empirical_residue()
        self.residue = complex(residue)

    def _smoothed_count(self, Y):
        idx = np.arange(1, int(Y) + 1)
        return complex(np.sum(self.coeffs[1:int(Y) + 1] * self.weight(idx / Y)))

    def empirical_residue(self) -> complex:
        """(S(X) - S(X/2)) / (W(1) X/2) with S(Y) = Σ c(N) w(N/Y); removes the constant D(0)."""
        X = self.X
        s1 = self._smoothed_count(X)
        s0 = self._smoothed_count(X / 2)
        return (s1 - s0) / (self.weight.mellin(1.0) * X / 2)

    def _raw(self, s, k=0):
        s = complex(s)
        return complex(np.sum(self._cw[1:] * np.exp(-s * self._logN[1:]) * (-self._logN[1:]) ** k))

    def value(self, s) -> complex:
        s = complex(s)
        out = self._raw(s)
        if self.residue:
            u = 1 - s
            if abs(u) < 1e-12:
                raise ZeroDivisionError("pole at s = 1")
            out -= self.residue * self.weight.mellin(u) * self.X ** u
        return out

    __call__ = value

    def derivative(self, s) -> complex:
        s = complex(s)
        out = self._raw(s, 1)
        if self.residue:
            u = 1 - s
            lx = math.log(self.X)
            out += self.residue * (self.weight.mellin_derivative(u) + self.weight.mellin(u) * lx) * self.X ** u
        return out

    def constant_at_one(self) -> complex:
        """lim_{s→1} (D(s) - r/(s-1))."""
        return self._raw(1.0) - self.residue * (self.weight.M1 + math.log(self.X))

    def truncated(self, s) -> complex:
        """Plain partial sum Σ_{N<=X} c(N) N^{-s}."""
        s = complex(s)
        return complex(np.sum(self.coeffs[1:] * np.exp(-s * self._logN[1:])))


def smooth_error(make, s, X: int) -> float:
    """|value(X) - value(X/2)| for a factory ``make(X) -> SmoothDirichletSeries``."""
    return abs(make(X).value(s) - make(X // 2).value(s))


# ------------------------------------------------------------------ multiplicative tables

def _local_primes(k, p):
    G = class_group(k)
    return [(P.norm, G.class_of(P.ideal), P) for P in primes_above(k, p)]


def multiplicative_table(k, X: int, local, special=(), dtype=float) -> np.ndarray:
    """A[N, c] = Σ_{N𝔪 = N, [𝔪] = c} f(𝔪) for multiplicative f with f(𝔭^e) = local(q, e, P).

    ``P`` is the PrimeIdeal for rational primes in ``special`` and None otherwise.
    """
    X = int(X)
    G = class_group(k)
    h = G.h
    special = set(int(p) for p in special)
    items = []
    for q, c in _prime_norm_classes(k, X, G):
        if _prime_factors(q)[0] not in special:
            items.append((q, c, None))
    for p in sorted(special):
        for q, c, P in _local_primes(k, p):
            if q <= X:
                items.append((q, c, P))
    A = np.zeros((X + 1, h), dtype=dtype)
    A[1, 0] = 1
    perm_cache = {}
    for q, c, P in items:
        new = A.copy()
        qk, ck, e = q, c, 1
        while qk <= X:
            val = local(q, e, P)
            if val:
                m = X // qk
                if ck not in perm_cache:
                    perm_cache[ck] = [G.table[j][ck] for j in range(h)]
                perm = perm_cache[ck]
                blk = np.zeros((m, h), dtype=dtype)
                blk[:, perm] = A[1:m + 1]
                new[qk::qk][:m] += val * blk
            qk *= q
            ck = G.table[ck][c]
            e += 1
        A = new
    return A


_TABLES: dict = {}
_TLOCK = threading.Lock()


def counts_table(k, X: int) -> np.ndarray:
    key = (id(k), int(X))
    with _TLOCK:
        if key in _TABLES:
            return _TABLES[key]
    T = ideal_counts(k, int(X)).astype(float)
    with _TLOCK:
        _TABLES[key] = T
    return T


# ------------------------------------------------------------------ arithmetic functions

def _check_integral(m):
    if not m.is_integral():
        raise IdealError("ideal must be integral")
    if m.norm == 0:
        raise IdealError("zero ideal")


def euler_phi(m: FractionalIdeal) -> int:
    """#(O/𝔪)^× = Π (N𝔭^e - N𝔭^{e-1})."""
    _check_integral(m)
    out = 1
    for P, e in factor_ideal(m):
        out *= P.norm ** e - P.norm ** (e - 1)
    return out


def divisors(m: FractionalIdeal) -> list:
    _check_integral(m)
    k = m.field
    out = [FractionalIdeal.unit(k)]
    for P, e in factor_ideal(m):
        new = []
        for d in out:
            Q = d
            for _ in range(e + 1):
                new.append(Q)
                Q = ideal_mul(Q, P.ideal)
        out = new
    return out


def divisor_sum(m: FractionalIdeal, s, chi=None) -> complex:
    """σ_s(𝔪, χ) = Σ_{𝔫 | 𝔪} χ(𝔫) N𝔫^s."""
    s = complex(s)
    out = 0j
    for d in divisors(m):
        val = 1.0 if chi is None else chi(d)
        out += val * float(d.norm) ** s
    return out


def _ramanujan_reps(m, b):
    """Z-coordinates (w.r.t. the basis of M = 𝔟𝔪^{-1}) of coset representatives of M/𝔟."""
    from .ideals import ideal_inv
    M = ideal_mul(b, ideal_inv(m))
    Mb = [[Fraction(v) for v in r] for r in M.basis]
    Minv = frac_inv(Mb)
    T = frac_matmul([[Fraction(v) for v in r] for r in b.basis], Minv)
    Ti = [[int(v) for v in r] for r in T]
    if any(v.denominator != 1 for r in T for v in r):
        raise IdealError("𝔟 is not contained in 𝔟𝔪^{-1}")
    H = hnf(Ti)
    return M, H


def ramanujan_sum(m: FractionalIdeal, b: FractionalIdeal) -> complex:
    """τ(𝔪, 𝔟) = Σ_{x ∈ (𝔟𝔪^{-1}/𝔟)^×} e^{2πi Tr x}, by coset enumeration."""
    import itertools
    _check_integral(m)
    k = m.field
    if not divides(codifferent(k), b):
        raise IdealError("𝔟 must be contained in the codifferent")
    M, H = _ramanujan_reps(m, b)
    primes = [P for P, _ in factor_ideal(m)]
    subs = [ideal_mul(M, P.ideal) for P in primes]
    d = k.d
    total = 0j
    for c in itertools.product(*[range(H[i][i]) for i in range(d)]):
        x = ideal_to_element(M, c)
        if any(S.contains(x) for S in subs):
            continue
        tr = k.trace(x) % 1
        total += cmath.exp(2j * math.pi * float(tr))
    if abs(total.imag) < 1e-9:
        total = complex(round(total.real, 9), 0)
    return total


def tau_local(q: int, e: int, v: int) -> int:
    """τ(𝔭^e, 𝔟) with v = v_𝔭(𝔟𝔡) (closed form; see ramanujan_sum for the direct route)."""
    if e <= v:
        return q ** e - q ** (e - 1)
    if e == v + 1:
        return -q ** v
    return 0


def ramanujan_partition_check(m: FractionalIdeal, b: FractionalIdeal, tol: float = 1e-10) -> tuple:
    """Checks Σ_{𝔞|𝔪} φ(𝔞) = N𝔪 and Σ_{𝔞|𝔪} τ(𝔞, 𝔟) = N𝔪·[𝔪 | 𝔟𝔡]; returns both sums."""
    k = m.field
    N = int(m.norm)
    ds = divisors(m)
    phi_sum = sum(euler_phi(a) for a in ds)
    tau_sum = sum(ramanujan_sum(a, b) for a in ds)
    bd = ideal_mul(b, _different(k))
    expect = N if divides(m, bd) else 0
    if phi_sum != N:
        raise AssertionError(f"Σ φ = {phi_sum} != N𝔪 = {N}")
    if abs(tau_sum - expect) > tol * max(1, N):
        raise AssertionError(f"Σ τ = {tau_sum} != {expect}")
    return phi_sum, tau_sum


def _different(k):
    from .ideals import different
    return different(k)


def valuation(P, a: FractionalIdeal) -> int:
    for Q, e in factor_ideal(a):
        if Q.ideal == P.ideal:
            return e
    return 0


# ------------------------------------------------------------------ class number formula

def kappa(k) -> float:
    """Residue of ζ_k at s = 1 from (h, R, w, d)."""
    G = class_group(k)
    U = unit_group(k)
    return (2 ** k.r1 * (2 * math.pi) ** k.r2 * G.h * U.regulator
            / (U.torsion_order * math.sqrt(abs(k.discriminant))))


# ------------------------------------------------------------------ L-series

@dataclass
class LSeriesEvaluator:
    """Hecke L(s, χ) for a class-group character χ (None = trivial) truncated at norm X.

    mode: "truncated" (plain partial sum, Re s > 1), "smooth" (smoothed with pole correction,
    κ from the class number formula) or "smooth-empirical" (residue estimated from the counts).
    """

    field: object
    chi: object = None
    X: int = 100000
    mode: str = "smooth"

    def __post_init__(self):
        if self.mode not in ("truncated", "smooth", "smooth-empirical"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self._series = {}

    @property
    def trivial(self) -> bool:
        return self.chi is None or self.chi.is_trivial

    def coefficients(self, X=None) -> np.ndarray:
        T = counts_table(self.field, X or self.X)
        if self.chi is None:
            return T.sum(axis=1)
        vals = np.array(self.chi.values, dtype=complex)
        c = T @ vals
        return c.real if np.allclose(c.imag, 0) else c

    def series(self, X=None) -> SmoothDirichletSeries:
        X = int(X or self.X)
        if X not in self._series:
            if not self.trivial or self.mode == "truncated":
                r = 0.0
            elif self.mode == "smooth":
                r = kappa(self.field)
            else:
                r = "empirical"
            self._series[X] = SmoothDirichletSeries(self.coefficients(X), r)
        return self._series[X]


def hecke_L(ev: LSeriesEvaluator, s) -> tuple:
    """(L(s, χ), tail estimate)."""
    s = complex(s)
    if ev.mode == "truncated":
        if s.real <= 1:
            raise ValueError("truncated mode needs Re s > 1")
        D = ev.series()
        val = D.truncated(s)
        c = np.abs(D.coeffs) * np.exp(-s.real * D._logN)
        c[0] = 0
        return val, dyadic_tail(c)
    if s.real <= 0.5:
        raise ValueError("smoothed evaluation needs Re s > 1/2")
    D = ev.series()
    val = D.value(s)
    err = abs(val - ev.series(ev.X // 2).value(s))
    return val, err


def hecke_L_derivative(ev: LSeriesEvaluator, s) -> complex:
    return ev.series().derivative(s)


def euler_kronecker(ev: LSeriesEvaluator) -> tuple:
    """γ_F(χ) = constant term of L(s, χ) at s = 1; (value, error estimate from X vs X/2)."""
    a = ev.series().constant_at_one()
    b = ev.series(ev.X // 2).constant_at_one()
    return a, abs(a - b)


# ------------------------------------------------------------------ Z-sums

def _phi_local(q, e, P):
    return q ** e - q ** (e - 1)


def _tau_factory(k, b):
    bd = ideal_mul(b, _different(k))
    m, A = bd.integral_multiple()
    if m != 1:
        raise IdealError("𝔟 must lie in the codifferent")
    specials = {}
    for P, e in factor_ideal(bd):
        specials[P.ideal] = e

    def local(q, e, P):
        v = specials.get(P.ideal, 0) if P is not None else 0
        return tau_local(q, e, v)

    primes = sorted({P.p for P, _ in factor_ideal(bd)})
    return local, primes


def _class_convolve(A, B, G):
    """Dirichlet convolution over N with class composition; both tables (X+1) x h."""
    X = A.shape[0] - 1
    h = G.h
    out = np.zeros((X + 1, h), dtype=np.result_type(A, B))
    for a in range(1, X + 1):
        row = A[a]
        if not np.any(row):
            continue
        m = X // a
        Bb = B[1:m + 1]
        blk = np.zeros((m, h), dtype=out.dtype)
        for c1 in range(h):
            if row[c1] == 0:
                continue
            perm = [G.table[c1][c2] for c2 in range(h)]
            blk[:, perm] += row[c1] * Bb
        out[a::a][:m] += blk
    return out


def z_tables(k, s_list, t_list, b_list, X: int):
    """Per-factor tables of f(𝔪) N𝔪^{-s} indexed [N, class]."""
    N = np.arange(X + 1, dtype=float)
    N[0] = 1
    tabs = []
    phi = None
    for s in s_list:
        if phi is None:
            phi = multiplicative_table(k, X, _phi_local)
        tabs.append(phi * (N ** (-complex(s)))[:, None])
    for t, b in zip(t_list, b_list):
        local, sp = _tau_factory(k, b)
        T = multiplicative_table(k, X, local, special=sp)
        tabs.append(T * (N ** (-complex(t)))[:, None])
    return tabs


def z_sum_direct(k, cls: int, s_list=(), t_list=(), b_list=(), X: int = 2000) -> tuple:
    """Truncated Z_𝒜(𝐬; 𝐭; 𝔟) over tuples with product norm <= X; (value, tail estimate)."""
    G = class_group(k)
    if len(t_list) != len(b_list):
        raise ValueError("t and b lists must have equal length")
    for z in list(s_list) + list(t_list):
        if complex(z).real <= 2:
            raise ValueError("direct Z-sum needs Re s_i, Re t_j > 2")
    if not s_list and not t_list:
        return (1.0 + 0j if cls == 0 else 0j), 0.0
    tabs = z_tables(k, s_list, t_list, b_list, X)
    acc = tabs[0]
    for T in tabs[1:]:
        acc = _class_convolve(acc, T, G)
    val = complex(acc[1:, cls].sum())
    # majorant for the tail: product of the absolute single-factor series
    mags = [np.abs(T).sum(axis=1) for T in tabs]
    maj = mags[0]
    for m in mags[1:]:
        maj = _class_convolve(maj[:, None], m[:, None], _TrivialGroup()).ravel()
    return val, dyadic_tail(maj)


class _TrivialGroup:
    h = 1
    table = [[0]]


def z_sum_characters(k, cls: int, s_list=(), t_list=(), b_list=(), X: int = 100000) -> tuple:
    """Z_𝒜 via (1/h) Σ_χ χ(𝒜^{-1}) Π L(s_i-1,χ)/L(s_i,χ) Π σ_{1-t_j}(𝔟_j𝔡, χ)/L(t_j,χ)."""
    G = class_group(k)
    inv = G.inverse(cls)
    total = 0j
    err = 0.0
    dk = _different(k)
    for chi in G.characters:
        ev = LSeriesEvaluator(k, None if chi.is_trivial else chi, X, "smooth")
        term = chi(inv)
        rel = 0.0
        for s in s_list:
            a, ea = hecke_L(ev, complex(s) - 1)
            b, eb = hecke_L(ev, s)
            term *= a / b
            rel += ea / abs(a) + eb / abs(b)
        for t, bb in zip(t_list, b_list):
            num = divisor_sum(ideal_mul(bb, dk), 1 - complex(t), None if chi.is_trivial else chi)
            b, eb = hecke_L(ev, t)
            term *= num / b
            rel += eb / abs(b)
        total += term
        err += abs(term) * rel
    return total / G.h, err / G.h + 1e-15 * abs(total)


def mobius_class_sums(k, s, X: int = 100000) -> list:
    """M_C(s) = Σ_{𝔪 ∈ C} μ(𝔪) N𝔪^{-s} = (1/h) Σ_χ χ(C)^{-1} / L(s, χ), one value per class."""
    G = class_group(k)
    out = []
    Ls = []
    for chi in G.characters:
        ev = LSeriesEvaluator(k, None if chi.is_trivial else chi, X, "smooth")
        Ls.append((chi, hecke_L(ev, s)[0]))
    for c in range(G.h):
        out.append(sum(chi(G.inverse(c)) / L for chi, L in Ls) / G.h)
    return out
