"""Gamma factors over number fields, digamma over k, K-Bessel functions and measure checks."""

from __future__ import annotations

import math
import threading

import numpy as np
from scipy import integrate, special as sp


class SingularityError(ArithmeticError):
    """Evaluation at (or numerically on top of) a pole."""


def _check_pole(z):
    z = complex(z)
    if z.real <= 0 and abs(z.imag) < 1e-14 and abs(z.real - round(z.real)) < 1e-14:
        raise SingularityError(f"Gamma has a pole at {z}")


def _gamma(z):
    _check_pole(z)
    z = complex(z)
    return complex(sp.gamma(z)) if z.imag else complex(sp.gamma(z.real))


def _digamma(z):
    _check_pole(z)
    z = complex(z)
    return complex(sp.digamma(z)) if z.imag else complex(sp.digamma(z.real))


class GammaFactorCache:
    """Thread-safe memo for Γ_k, Γ_{k'/k} and ψ_k keyed by (kind, object id, s)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._table = {}

    def get(self, key, fn):
        with self._lock:
            if key in self._table:
                return self._table[key]
        val = fn()
        with self._lock:
            self._table.setdefault(key, val)
            return self._table[key]

    def clear(self):
        with self._lock:
            self._table.clear()

    def __len__(self):
        return len(self._table)


CACHE = GammaFactorCache()


def _local_degrees(k):
    return [p.n for p in k.places]


def gamma_k(k, s, cache: bool = True) -> complex:
    """Γ_k(s) = Π_σ Γ(n_σ s / 2)."""
    s = complex(s)

    def f():
        out = 1 + 0j
        for n in _local_degrees(k):
            out *= _gamma(n * s / 2)
        return out

    return CACHE.get(("gamma_k", id(k), s), f) if cache else f()


def gamma_rel(ext, s, cache: bool = True) -> complex:
    """Relative gamma factor Γ_{E/F}(s) in closed form.

    ``ext`` is an Extension, or a NumberField k standing for k/Q.
    """
    s = complex(s)
    E, F, n, sigma_deg = _rel_data(ext)

    def f():
        num = 1 + 0j
        for p in E.places:
            num *= p.n / 2 * _gamma(p.n * s / 2)
        den = 1 + 0j
        for m in sigma_deg:
            den *= n * m / 2 * _gamma(n * m * s / 2)
        return num / den

    return CACHE.get(("gamma_rel", id(ext), s), f) if cache else f()


def _rel_data(ext):
    if hasattr(ext, "E"):
        return ext.E, ext.F, ext.n, _local_degrees(ext.F)
    return ext, None, ext.d, [1]


def digamma_k(k, s, cache: bool = True) -> complex:
    """ψ_k(s) = Σ_σ (n_σ/2) ψ(n_σ s / 2)."""
    s = complex(s)

    def f():
        return sum(n / 2 * _digamma(n * s / 2) for n in _local_degrees(k))

    return CACHE.get(("digamma_k", id(k), s), f) if cache else f()


# ------------------------------------------------------------------ quadrature checks

def _torus_layout(ext):
    """(groups, density): per F-place the list of (τ, n_{τ|σ}), first entry eliminated."""
    if hasattr(ext, "place_map"):
        groups = ext.place_map
        Fdeg = _local_degrees(ext.F)
        Edeg = _local_degrees(ext.E)
    else:
        groups = [[(t, p.n) for t, p in enumerate(ext.places)]]
        Fdeg = [1]
        Edeg = _local_degrees(ext)
    density = 1.0
    for s, lst in enumerate(groups):
        prod_c = 1.0
        for t, _ in lst:
            prod_c *= 2.0 if Edeg[t] == 2 else 1.0
        density *= prod_c / (lst[0][1] * (2.0 if Fdeg[s] == 2 else 1.0))
    return groups, Fdeg, density


def gamma_rel_quadrature(ext, s: float, limit: float = 60.0) -> float:
    """Γ_{E/F}(s) from its defining integral over T_{E/F} in log coordinates (real s)."""
    groups, Fdeg, density = _torus_layout(ext)
    n = sum(m for _, m in groups[0])
    free = [(g, i) for g, lst in enumerate(groups) for i in range(1, len(lst))]
    if not free:
        return float(density)

    def integrand(*ls):
        total = 0.0
        for g, lst in enumerate(groups):
            logs = [0.0] * len(lst)
            for (gg, i), l in zip(free, ls):
                if gg == g:
                    logs[i] = l
            logs[0] = -sum(m * logs[i] for i, (_, m) in enumerate(lst) if i) / lst[0][1]
            total += -n * Fdeg[g] * s / 2 * math.log(sum(math.exp(2 * x) for x in logs))
        return math.exp(total)

    rng = [(-limit, limit)] * len(free)
    if len(free) == 1:
        val, _ = integrate.quad(integrand, -limit, limit, epsabs=1e-14, epsrel=1e-12, limit=200)
    else:
        val, _ = integrate.nquad(integrand, rng, opts={"epsabs": 1e-13, "epsrel": 1e-11, "limit": 200})
    return density * val


def dtimes_identity_check(n_list, s: float, limit: float = 60.0):
    """(n Γ(ns) ∫_T (t_1 + ... + t_r)^{-ns} d^×t, Π n_i Γ(n_i s)) with the last t eliminated."""
    n_list = [int(m) for m in n_list]
    if len(n_list) < 2 or min(n_list) < 1:
        raise ValueError("need r >= 2 positive integers")
    s = float(s)
    if s <= 0:
        raise ValueError("Re s must be positive")
    n = sum(n_list)
    r = len(n_list)
    last = n_list[-1]
    weight = float(np.prod(n_list[:-1]))

    def integrand(*ls):
        l_last = -sum(m * l for m, l in zip(n_list, ls)) / last
        # log(Σ e^{l_i}) stably
        xs = list(ls) + [l_last]
        mx = max(xs)
        lse = mx + math.log(sum(math.exp(x - mx) for x in xs))
        return math.exp(-n * s * lse)

    if r == 2:
        val, err = integrate.quad(integrand, -limit, limit, epsabs=1e-14, epsrel=1e-12, limit=400)
    else:
        val, err = integrate.nquad(integrand, [(-limit, limit)] * (r - 1),
                                   opts={"epsabs": 1e-13, "epsrel": 1e-11, "limit": 200})
    if not np.isfinite(val):
        raise ArithmeticError("quadrature did not converge")
    lhs = n * math.gamma(n * s) * weight * val
    rhs = float(np.prod([m * math.gamma(m * s) for m in n_list]))
    return lhs, rhs


# ------------------------------------------------------------------ K-Bessel

def _bessel_grid(x, s):
    """Trapezoid step and cutoff for ∫_0^∞ e^{-x cosh t} cosh(st) dt at the smallest x."""
    sr = abs(s.real)
    xmin = float(np.min(x))
    xmax = float(np.max(x))
    h = min(0.1, 0.5 / math.sqrt(xmax), 1.0 / (abs(s.imag) + 1.0))
    # peak of -x cosh t + |Re s| t, then walk out until 40 below the peak (relative 1e-17)
    tpk = math.asinh(sr / xmin) if sr else 0.0
    fpk = -xmin * math.cosh(tpk) + sr * tpk
    t = max(tpk, 1.0)
    while -xmin * math.cosh(t) + sr * t > fpk - 42.0:
        t += 0.25
    return h, t


def bessel_k(s, x):
    """K_s(x) = ∫_0^∞ e^{-x cosh t} cosh(s t) dt by the trapezoid rule (exponentially convergent).

    ``x`` may be an array; the result has the same shape.
    """
    s = complex(s)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError("K-Bessel needs x > 0")
    shape = xa.shape
    xa = xa.reshape(-1)
    out = np.empty(xa.size, dtype=complex)
    if xa.size == 0:
        return out.reshape(shape)
    # group by decade so a shared grid stays efficient
    order = np.argsort(xa)
    groups = np.array_split(order, max(1, int(math.ceil(np.log10(xa.max() / xa.min() + 1) * 2))))
    for idx in groups:
        if not idx.size:
            continue
        xs = xa[idx]
        h, tmax = _bessel_grid(xs, s)
        t = np.arange(0.0, tmax + h, h)
        w = np.full(t.size, h)
        w[0] = h / 2
        ch = np.cosh(t)
        E = -np.outer(xs, ch)
        vals = 0.5 * (np.exp(E + s * t) + np.exp(E - s * t))
        out[idx] = vals @ w
    out = out.reshape(shape)
    if abs(s.imag) == 0:
        return out.real if out.ndim else complex(out).real
    return out if out.ndim else complex(out)


def bessel_K_field(k, s, x):
    """K_k(s, x) = Π_σ K_{n_σ s / 2}(x_σ) for per-place positive reals x (last axis = places)."""
    x = np.asarray(x, dtype=float)
    out = 1.0
    for i, n in enumerate(_local_degrees(k)):
        out = out * bessel_k(n * complex(s) / 2, x[..., i])
    return out


def bessel_tail_constant(nu, x0: float) -> float:
    """C with |K_ν(x)| ≤ C e^{-x}/√x for all x ≥ x0."""
    kv = float(np.real(bessel_k(complex(nu).real, x0)))
    return max(math.sqrt(math.pi / 2), math.sqrt(x0) * math.exp(x0) * kv)
