import pytest

from heckelab.hecke import (HeckeIntegralJob, c_factor, class_sum_rhs, heegner_integral,
                            integral_lhs, relative_kronecker_limit, verify_hecke)
from heckelab.ideals import class_group
from heckelab.numfield import Extension, field_from_spec
from heckelab.zeta import RelativeZetaJob, relative_zeta_constant


def _job(cfg, s, c=0, **kw):
    return HeckeIntegralJob(cfg.ext, cfg.w, s, c, cfg.A, **kw)


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0])
def test_real_quadratic_over_Q(ext_cfg, s):
    rep = verify_hecke(_job(ext_cfg("q_sqrt5_over_q"), s))
    assert rep.passed
    assert rep.relative_deviation < 1e-6


def test_complex_s(ext_cfg):
    rep = verify_hecke(_job(ext_cfg("q_sqrt5_over_q"), 2 + 0.7j))
    assert rep.passed
    assert rep.relative_deviation < 1e-6


def test_imaginary_quadratic_over_Q(ext_cfg):
    rep = verify_hecke(_job(ext_cfg("q_sqrtm5_over_q"), 1.5))
    assert rep.relative_deviation < 1e-6


@pytest.mark.parametrize("c", [0, 1])
def test_quartic_over_real_quadratic(ext_cfg, c):
    cfg = ext_cfg("q_sqrt10_i_over_q_sqrt10")
    assert class_group(cfg.F).h == 2
    rep = verify_hecke(_job(cfg, 2.0, c))
    assert rep.relative_deviation < 1e-4


def test_quadrature_refinement_stable(ext_cfg):
    cfg = ext_cfg("q_sqrt5_over_q")
    a = integral_lhs(_job(cfg, 2.0, nodes=32))
    b = integral_lhs(_job(cfg, 2.0, nodes=64))
    assert abs(a.value - b.value) <= a.error + b.error + 1e-13


def test_rank_zero_is_point_value(ext_cfg):
    cfg = ext_cfg("q_sqrtm5_over_q")
    ev = heegner_integral(_job(cfg, 2.0), lambda z: (1.0, 0.0))
    assert ev.value == 1.0
    assert ev.parts["nodes"] == 1


def test_volume_of_constant(ext_cfg):
    cfg = ext_cfg("q_sqrt5_over_q")
    job = _job(cfg, 2.0, nodes=8)
    ev = heegner_integral(job, lambda z: (1.0, 0.0))
    assert ev.value == pytest.approx(job.domain().volume, rel=1e-14)
    assert ev.parts["quadrature_error"] < 1e-14


def test_c_factor_trivial_extension(Q):
    K = field_from_spec("Q(sqrt 5)")
    assert c_factor(Extension(Q, Q), 2.0) == 1
    assert c_factor(Extension(K, K, [[1, 0], [0, 1]]), 2.0) == 1


def test_c_factor_real_for_real_s(ext_cfg):
    for name in ["q_sqrt5_over_q", "q_sqrtm5_over_q", "q_sqrt10_i_over_q_sqrt10"]:
        c = c_factor(ext_cfg(name).ext, 2.5)
        assert c.real > 0 and abs(c.imag) < 1e-14 * c.real


def test_job_validation(ext_cfg):
    cfg = ext_cfg("q_sqrt5_over_q")
    with pytest.raises(ValueError):
        _job(cfg, 1.0)
    with pytest.raises(ValueError):
        _job(cfg, 2.0, c=1)
    with pytest.raises(ValueError):
        integral_lhs(_job(cfg, 2.0, nodes=7))


def test_class_sum_matches_full_zeta(ext_cfg):
    cfg = ext_cfg("q_sqrt10_i_over_q_sqrt10")
    lhs, rhs = class_sum_rhs(cfg.ext, cfg.w, 2.0, cfg.A)
    assert abs(lhs - rhs) / abs(rhs) < 1e-5


@pytest.mark.parametrize("name", ["q_sqrt5_over_q", "q_sqrt2_over_q", "q_sqrtm5_over_q"])
def test_relative_kronecker_limit_matches_counting(ext_cfg, name):
    # constant term at s = 1: Kronecker-limit route against the lattice-count Laurent fit
    cfg = ext_cfg(name)
    job = _job(cfg, 2.0, nodes=32)
    kl = relative_kronecker_limit(job)
    num, en = relative_zeta_constant(RelativeZetaJob(job.rel, 0, job.zeta_X))
    assert abs(kl.value - num) < 1e-9 + kl.error + en
