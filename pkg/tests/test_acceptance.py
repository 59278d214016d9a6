"""Acceptance suite: one check per criterion, each reported as a PASS/FAIL line.

Run under pytest (the lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from heckelab.arith import kappa, ramanujan_partition_check, z_sum_characters, z_sum_direct
from heckelab.config import bundled_configs, load_extension
from heckelab.eisenstein import (EisensteinSeries, automorphy_residual, eisenstein_direct_err,
                                 eisenstein_fourier, eisenstein_fourier_err, eta,
                                 kronecker_limit_closed_form, phi_term, psi_term, residue_closed_form,
                                 scaling_law_check, zeta_full, zeta_partial)
from heckelab.hecke import HeckeIntegralJob, verify_hecke
from heckelab.ideals import (FractionalIdeal, OFLattice, class_group, codifferent, enumerate_ideals,
                             ideal_mul)
from heckelab.numfield import field_from_spec
from heckelab.space import HeegnerObject, UHSPoint, gamma_L_member, random_shear_word
from heckelab.special import dtimes_identity_check, gamma_rel, gamma_rel_quadrature
from heckelab.units import regulator_lemma_check, relative_unit_group
from heckelab.zeta import (PartialZetaJob, RelativeData, RelativeZetaJob, numeric_residue_and_constant,
                           partial_zeta, relative_partial_zeta, relative_zeta_residue)

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    return ok


def _lattice(k, a=None):
    one = FractionalIdeal.unit(k)
    return OFLattice((a or one, one))


def _hecke(name, s_list, tol, limit):
    cfg = load_extension(name)
    t0 = time.perf_counter()
    worst = 0.0
    for s in s_list:
        for c in range(class_group(cfg.F).h):
            rep = verify_hecke(HeckeIntegralJob(cfg.ext, cfg.w, s, c, cfg.A))
            worst = max(worst, rep.relative_deviation)
    dt = time.perf_counter() - t0
    return worst < tol and dt < limit, worst, dt


def criterion_1():
    ok, worst, dt = _hecke("q_sqrt5_over_q", [1.5, 2.0, 3.0], 1e-6, 60)
    return ok, f"Q(√5)/Q s∈{{1.5,2,3}} max rel dev {worst:.2e} in {dt:.1f}s"


def criterion_2():
    ok_a, wa, _ = _hecke("q_sqrtm5_over_q", [1.5], 1e-6, math.inf)
    ok_b, wb, dt = _hecke("q_sqrt10_i_over_q_sqrt10", [2.0], 1e-4, 300)
    return ok_a and ok_b, f"Q(√-5)/Q {wa:.2e}; Q(√10,i)/Q(√10) both classes {wb:.2e} in {dt:.1f}s"


def criterion_3():
    Q = field_from_spec("Q")
    ser = EisensteinSeries(_lattice(Q), FractionalIdeal.unit(Q), X=1e4, bessel_radius=30)
    t0 = time.perf_counter()
    ok, worst = True, 0.0
    for z in (1j, 0.3 + 1.7j):
        zz = UHSPoint.from_complex(z)
        for s in (1.3, 1.8, 2.5):
            d, de = eisenstein_direct_err(ser, zz, s)
            f, fe = eisenstein_fourier_err(ser, zz, s)
            dev = abs(d - f)
            worst = max(worst, dev)
            ok &= dev <= de + fe and dev < 1e-8
    dt = time.perf_counter() - t0
    return ok and dt < 30, f"direct vs Fourier max dev {worst:.2e} in {dt:.1f}s"


def criterion_4():
    Q, K = field_from_spec("Q"), field_from_spec("Q(sqrt -5)")
    closed_Q = residue_closed_form(_lattice(Q), 0)
    ok = abs(closed_Q - math.pi / 2) < 1e-12
    prim = EisensteinSeries(_lattice(Q), FractionalIdeal.unit(Q))
    rq = []
    for z in (1j, 0.3 + 1.7j):
        zz = UHSPoint.from_complex(z)
        rq.append(numeric_residue_and_constant(lambda s: eisenstein_fourier(prim, zz, s))[0])
    dq = max(abs(r - 3 / math.pi) / (3 / math.pi) for r in rq)
    ok &= dq < 1e-5 and abs(rq[0] - rq[1]) < 2e-5
    dk = 0.0
    for c in range(2):
        ser = EisensteinSeries(_lattice(K), cls=c, l_mode="smooth-empirical")
        closed = residue_closed_form(_lattice(K), c)
        rk = []
        for x, y in ((0.2 + 0.1j, 1.1), (0.1, 0.9)):
            z = UHSPoint.from_coordinates(K, x, y)
            rk.append(numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, z, s))[0])
        dk = max(dk, *(abs(r - closed) / closed for r in rk))
        ok &= abs(rk[0] - rk[1]) < 2e-5 * closed
    ok &= dk < 1e-4
    return ok, f"Q primitive rel dev {dq:.2e}; Q(√-5) both classes {dk:.2e}"


def criterion_5():
    Q = field_from_spec("Q")
    ser = EisensteinSeries(_lattice(Q), cls=0)
    smooth = EisensteinSeries(_lattice(Q), cls=0, l_mode="smooth-empirical")
    eta_dev, full_dev = 0.0, 0.0
    for z in (1j, 0.3 + 1.7j):
        zz = UHSPoint.from_complex(z)
        v = phi_term(ser, 0, zz, 1.0)[0] + psi_term(ser, 0, zz, 1.0)[0]
        eta_dev = max(eta_dev, abs(v + 6 / math.pi * math.log(abs(eta(z)) ** 2)))
        _, c, _, _ = numeric_residue_and_constant(lambda s: eisenstein_fourier(smooth, zz, s))
        full_dev = max(full_dev, abs(kronecker_limit_closed_form(_lattice(Q), 0, zz).value - c))
    return eta_dev < 1e-8 and full_dev < 1e-5, f"η identity {eta_dev:.2e}; E^(0) vs numeric {full_dev:.2e}"


def criterion_6():
    cfg = load_extension("q_sqrt10_i_over_q_sqrt10")
    rel = RelativeData(cfg.ext, cfg.w, cfg.A)
    X = 100000
    total = sum(relative_partial_zeta(RelativeZetaJob(rel, c, X), 2.0)[0]
                for c in range(class_group(cfg.F).h))
    zE = partial_zeta(PartialZetaJob(cfg.E, cfg.A.inverse(), X), 2.0)[0]
    dev = abs(total - zE) / abs(zE)
    return dev < 1e-5, f"Σ over Cl_F vs ζ_E on Q(√10,i)/Q(√10) rel dev {dev:.2e}"


def criterion_7():
    worst = 0.0
    for name in ("q_sqrt5_over_q", "q_sqrtm5_over_q"):
        cfg = load_extension(name)
        F, E = cfg.F, cfg.E
        G = class_group(F)
        rel = RelativeData(cfg.ext, cfg.w, cfg.A)
        for c in range(G.h):
            r, _ = relative_zeta_residue(RelativeZetaJob(rel, c, 100000))
            closed = (kappa(E) / class_group(E).h * zeta_partial(F, G.inverse(c), cfg.ext.n)[0]
                      / zeta_full(F, cfg.ext.n)[0]).real
            worst = max(worst, abs(r - closed) / abs(closed))
    return worst < 1e-3, f"relative residue max rel dev {worst:.2e}"


def _micro_suites():
    out = {}
    ok = True
    for name in ("Q", "Q(sqrt -5)"):
        k = field_from_spec(name)
        ideals = enumerate_ideals(k, X=500)
        bs = [ideal_mul(c, codifferent(k)) for c in ideals[:3]]
        try:
            for m in ideals:
                for b in bs:
                    ramanujan_partition_check(m, b)
        except AssertionError:
            ok = False
    out["arith lemma"] = ok

    out["dtimes"] = all(abs((lambda a, b: (a - b) / b)(*dtimes_identity_check(nl, 1.5))) < 1e-8
                        for nl in ((1, 1), (2, 2), (1, 1, 1)))

    cfgs = [load_extension(c) for c in bundled_configs()]
    out["gamma quadrature"] = all(abs(gamma_rel_quadrature(c.ext, s) - gamma_rel(c.ext, s))
                                  < 1e-8 * abs(gamma_rel(c.ext, s)) for c in cfgs for s in (1.5, 2.0))
    out["regulator lemma"] = all(abs((lambda a, b: (a - b) / b)(*regulator_lemma_check(relative_unit_group(c.ext))))
                                 < 1e-8 for c in cfgs)

    ok = True
    for name in ("Q", "Q(sqrt -5)", "Q(sqrt 10)"):
        k = field_from_spec(name)
        one = FractionalIdeal.unit(k)
        for c in range(class_group(k).h):
            a, _ = z_sum_direct(k, c, [6.0], [5.5], [one], X=3000)
            b, _ = z_sum_characters(k, c, [6.0], [5.5], [one])
            ok &= abs(a - b) < 1e-8
    out["z_a corollary"] = ok

    ok = True
    for c in cfgs:
        h = HeegnerObject(c.ext, c.w)
        ok &= all(h.lemma_psi_residual(u) < 1e-8 for u in relative_unit_group(c.ext).relative_units)
    out["lemma psi"] = ok
    ok = True
    for c in cfgs:
        a, b = HeegnerObject(c.ext, c.w).delta_identity(c.A)
        ok &= abs(a - b) < 1e-8 * b
    out["Δ_w identity"] = ok

    Q = field_from_spec("Q")
    z = UHSPoint.from_complex(0.3 + 1.7j)
    half = FractionalIdeal.unit(Q).scale(Fraction(1, 2))
    out["scaling law"] = all(abs((lambda l, r: (l - r) / r)(*scaling_law_check(_lattice(Q), half, 2, z, s)))
                             < 1e-10 for s in (1.5, 2.5))

    ok = True
    for name, length, coeff in (("Q", 4, 2), ("Q(sqrt -5)", 4, 2), ("Q(sqrt 5)", 1, 1)):
        k = field_from_spec(name)
        L = _lattice(k)
        ser = EisensteinSeries(L, FractionalIdeal.unit(k))
        zz = UHSPoint.from_coordinates(k, 0.17, 1.3)
        rng = np.random.default_rng(2026)
        for _ in range(5):
            g = random_shear_word(L, length, rng, coeff)
            r, e = automorphy_residual(ser, g, zz, 2.0)
            ok &= gamma_L_member(g, L) and r <= e
    out["Γ_L automorphy"] = ok
    return out


def criterion_8():
    suites = _micro_suites()
    failed = [k for k, v in suites.items() if not v]
    detail = f"{len(suites) - len(failed)}/{len(suites)} micro-suites" + (f"; failed: {', '.join(failed)}" if failed else "")
    return not failed, detail


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def line(n):
    ok, detail = RESULTS[n]
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    record(n, ok, detail)
    print(line(n))
    assert ok, detail


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        record(n, *fn())
        print(line(n), flush=True)
