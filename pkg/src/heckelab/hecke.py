"""The relative Hecke integral formula: Eisenstein series integrated along a Heegner object
against the relative partial zeta function."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eisenstein import EisensteinSeries, anti_integral_rep, eisenstein_direct_err, zeta_partial
from .ideals import FractionalIdeal, class_group
from .space import HeegnerObject, heegner_point
from .special import gamma_rel
from .units import fundamental_domain_TEF, relative_unit_group, unit_group
from .zeta import RelativeData, RelativeZetaJob, relative_partial_zeta


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HECKELAB_THREADS", "1")))
    except ValueError:
        return 1


def c_factor(ext, s) -> complex:
    """c_{E/F}(s) = R_{E/F} (w_E / R_E) Γ_{E/Q}(s) / ((w_F / R_F) Γ_{F/Q}(ns))."""
    s = complex(s)
    E, F = ext.E, ext.F
    if E.d == F.d:
        return 1.0 + 0j
    rel = relative_unit_group(ext)
    uE, uF = unit_group(E), unit_group(F)
    num = rel.relative_regulator * uE.torsion_order / uE.regulator * gamma_rel(E, s)
    den = uF.torsion_order / uF.regulator * gamma_rel(F, ext.n * s)
    return num / den


@dataclass
class HeckeIntegralJob:
    """One instance of the integral formula: (E/F, w, 𝔄) and the class [𝔞] ∈ Cl_F at s."""

    ext: object
    w: list
    s: complex
    cls: int = 0
    A: FractionalIdeal = None
    nodes: int = 64
    X: float = 1e4
    l_X: int = 100000
    zeta_X: int = 100000
    heegner: HeegnerObject = field(init=False, repr=False)
    rel: RelativeData = field(init=False, repr=False)

    def __post_init__(self):
        self.s = complex(self.s)
        if self.s.real <= 1:
            raise ValueError("the integral formula is evaluated for Re s > 1")
        if self.A is None:
            self.A = FractionalIdeal.unit(self.ext.E)
        self.heegner = HeegnerObject(self.ext, self.w)
        self.rel = RelativeData(self.ext, self.w, self.A)
        if not 0 <= self.cls < class_group(self.ext.F).h:
            raise ValueError("class index out of range")

    @property
    def a(self) -> FractionalIdeal:
        return anti_integral_rep(self.ext.F, self.cls)

    @property
    def L(self):
        return self.rel.L

    def series(self) -> EisensteinSeries:
        return EisensteinSeries(self.L, self.a, X=self.X, l_X=self.l_X)

    def domain(self):
        return fundamental_domain_TEF(relative_unit_group(self.ext))


@dataclass
class Evaluation:
    value: complex
    error: float
    parts: dict = field(default_factory=dict)


def _node_values(job, fd, thetas, fn):
    def one(th):
        return fn(heegner_point(job.heegner, fd.torus_point(th)))

    k = thread_count()
    if k > 1 and len(thetas) > 1:
        with ThreadPoolExecutor(k) as pool:
            out = list(pool.map(one, thetas))
    else:
        out = [one(th) for th in thetas]
    return np.array([v for v, _ in out]), np.array([e for _, e in out])


def heegner_integral(job: HeckeIntegralJob, fn, fd=None) -> Evaluation:
    """∫_{T_{E/F}/U_{E/F}} fn(ϖ(t)) d^×t by the periodic trapezoid rule; fn(z) -> (value, error).

    Rank-0 domains give the point value at ϖ(1).
    """
    fd = fd or job.domain()
    m = fd.dimension
    if m == 0:
        v, e = fn(heegner_point(job.heegner))
        return Evaluation(v, e, {"nodes": 1, "quadrature_error": 0.0, "truncation_error": e, "volume": 1.0})
    k = int(job.nodes)
    if k < 2 or k % 2:
        raise ValueError("nodes must be an even integer >= 2")
    grid = np.arange(k) / k
    thetas = np.array(np.meshgrid(*[grid] * m, indexing="ij")).reshape(m, -1).T
    vals, errs = _node_values(job, fd, thetas, fn)
    V = vals.reshape((k,) * m)
    full = V.mean()
    coarse = V[(slice(None, None, 2),) * m].mean()
    vol = fd.volume
    q_err = abs(full - coarse) * vol
    t_err = float(errs.mean()) * vol
    return Evaluation(vol * full, q_err + t_err,
                      {"nodes": k ** m, "quadrature_error": q_err, "truncation_error": t_err, "volume": vol})


def integral_lhs(job: HeckeIntegralJob, fd=None) -> Evaluation:
    """∫_{T_{E/F}/U_{E/F}} E_{(𝔞⊂L)}(ϖ(t), s) d^×t."""
    ser = job.series()
    return heegner_integral(job, lambda z: eisenstein_direct_err(ser, z, job.s), fd)


def integral_rhs(job: HeckeIntegralJob) -> Evaluation:
    """|Δ_w|^{s/2} c_{E/F}(s) N𝔄^{-s} N𝔞^{ns} ζ_{E/F,[𝔞]}(𝔄^{-1}, s) / ζ_F(𝔞^{-1}, ns)."""
    s = job.s
    ext = job.ext
    F = ext.F
    n = ext.n
    G = class_group(F)
    a = job.a
    delta = float(job.heegner.Delta)
    c = c_factor(ext, s)
    zr, zre = relative_partial_zeta(RelativeZetaJob(job.rel, job.cls, job.zeta_X), s)
    zf, zfe = zeta_partial(F, G.inverse(job.cls), n * s, job.l_X)
    pref = (np.exp(s / 2 * math.log(delta)) * c * np.exp(-s * math.log(float(job.A.norm)))
            * np.exp(n * s * math.log(float(a.norm))))
    val = pref * zr / zf
    err = abs(pref) * (zre / abs(zf) + abs(zr) * zfe / abs(zf) ** 2)
    return Evaluation(val, err, {"delta_w": delta, "c_factor": c, "zeta_rel": zr, "zeta_F": zf,
                                 "zeta_rel_error": zre, "zeta_F_error": zfe})


@dataclass
class HeckeReport:
    ext_name: str
    cls: int
    s: complex
    lhs: Evaluation
    rhs: Evaluation
    tolerance: float = None

    @property
    def deviation(self) -> float:
        return abs(self.lhs.value - self.rhs.value)

    @property
    def relative_deviation(self) -> float:
        return self.deviation / abs(self.rhs.value)

    @property
    def combined_error(self) -> float:
        return self.lhs.error + self.rhs.error

    @property
    def passed(self) -> bool:
        if self.tolerance is not None:
            return self.relative_deviation < self.tolerance
        return self.deviation <= self.combined_error

    def row(self) -> dict:
        return {
            "ext": self.ext_name, "class": self.cls, "s_re": self.s.real, "s_im": self.s.imag,
            "lhs_re": self.lhs.value.real, "lhs_im": self.lhs.value.imag,
            "rhs_re": self.rhs.value.real, "rhs_im": self.rhs.value.imag,
            "deviation": self.deviation, "relative_deviation": self.relative_deviation,
            "lhs_error": self.lhs.error, "rhs_error": self.rhs.error,
            "quadrature_error": self.lhs.parts.get("quadrature_error", 0.0),
            "truncation_error": self.lhs.parts.get("truncation_error", 0.0),
            "zeta_rel_error": self.rhs.parts.get("zeta_rel_error", 0.0),
            "zeta_F_error": self.rhs.parts.get("zeta_F_error", 0.0),
            "status": "PASS" if self.passed else "FAIL",
        }


def verify_hecke(job: HeckeIntegralJob, tolerance: float = None, name: str = "") -> HeckeReport:
    """LHS against RHS; PASS iff the deviation is within the combined error estimates (or below
    ``tolerance`` relative, when given)."""
    lhs = integral_lhs(job)
    rhs = integral_rhs(job)
    return HeckeReport(name or getattr(job.ext, "name", ""), job.cls, job.s, lhs, rhs, tolerance)


def class_sum_rhs(ext, w, s, A=None, zeta_X: int = 100000) -> tuple:
    """(Σ_{[𝔞]} RHS_{[𝔞]}·ζ_F(𝔞^{-1},ns)/N𝔞^{ns}, |Δ_w|^{s/2} c N𝔄^{-s} ζ_E(𝔄^{-1}, s)).

    Both sides of the class-summed formula; the left from the relative partial zetas, the right
    from the full partial zeta of E.
    """
    from .zeta import PartialZetaJob, partial_zeta
    s = complex(s)
    F = ext.F
    h = class_group(F).h
    jobs = [HeckeIntegralJob(ext, w, s, c, A, zeta_X=zeta_X) for c in range(h)]
    total = 0j
    for j in jobs:
        zr, _ = relative_partial_zeta(RelativeZetaJob(j.rel, j.cls, zeta_X), s)
        total += zr
    j0 = jobs[0]
    pref = np.exp(s / 2 * math.log(float(j0.heegner.Delta))) * c_factor(ext, s) \
        * np.exp(-s * math.log(float(j0.A.norm)))
    Ainv = j0.A.inverse() if hasattr(j0.A, "inverse") else None
    zE, _ = partial_zeta(PartialZetaJob(ext.E, Ainv, zeta_X), s)
    return pref * total, pref * zE


def _log_derivative(f, s0: float, h: float = 1e-3) -> complex:
    # five-point stencil for f'/f
    v = [np.log(f(s0 + k * h)) for k in (-2, -1, 1, 2)]
    return (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h)


def relative_kronecker_limit(job: HeckeIntegralJob, bessel_radius: float = 30.0) -> Evaluation:
    """Constant term at s = 1 of ζ_{E/F,[𝔞]}(𝔄^{-1}, s) from the Kronecker limit of E_{L,[𝔞]}
    integrated along the Heegner object (n = 2).

    With ζ_{E/F,[𝔞]}(𝔄^{-1}, s) = G(s) ∫ E_{L,[𝔞]}(ϖ(t), s) d^×t and
    G(s) = N𝔄^s |Δ_w|^{-s/2} / c_{E/F}(s), the constant is G(1)∫E^{(0)} + G'(1) vol κ,
    κ being the (z-independent) residue of E_{L,[𝔞]}.
    """
    from .eisenstein import kronecker_limit_closed_form, residue_closed_form
    if job.ext.n != 2:
        raise ValueError("implemented for n = 2")
    L, cls = job.L, job.cls
    integ = heegner_integral(
        job, lambda z: (lambda r: (r.value, r.error))(
            kronecker_limit_closed_form(L, cls, z, bessel_radius, job.l_X)))
    vol = integ.parts["volume"]
    res = residue_closed_form(L, cls, job.l_X)
    delta = float(job.heegner.Delta)
    NA = float(job.A.norm)

    def G(s):
        return np.exp(s * math.log(NA) - s / 2 * math.log(delta)) / c_factor(job.ext, s)

    g1 = G(1.0)
    dlog = _log_derivative(G, 1.0)
    value = g1 * integ.value + g1 * dlog * vol * res
    return Evaluation(complex(value), abs(g1) * integ.error,
                      {"integral_E0": integ.value, "G": g1, "G_log_derivative": dlog, "residue": res})
