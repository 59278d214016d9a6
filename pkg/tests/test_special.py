import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from heckelab.config import bundled_configs
from heckelab.numfield import field_from_spec
from heckelab.special import (bessel_k, digamma_k, dtimes_identity_check, gamma_k, gamma_rel,
                              gamma_rel_quadrature)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.05, 40.0))
def test_bessel_against_scipy(nu, x):
    ref = sp.kv(nu, x)
    assert abs(bessel_k(nu, x) - ref) <= 1e-12 * abs(ref) + 1e-300


def test_bessel_half_integer_closed_form():
    x = np.array([0.3, 1.0, 5.0, 30.0])
    assert np.allclose(bessel_k(0.5, x), np.sqrt(np.pi / (2 * x)) * np.exp(-x), rtol=1e-13, atol=0)


def test_bessel_rejects_nonpositive():
    with pytest.raises(ValueError):
        bessel_k(1.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0))
def test_gamma_k_recursions(s):
    Q = field_from_spec("Q")
    K = field_from_spec("Q(sqrt -5)")
    assert abs(gamma_k(Q, s + 2) - s / 2 * gamma_k(Q, s)) < 1e-12 * abs(gamma_k(Q, s + 2))
    assert abs(gamma_k(K, s + 1) - s * gamma_k(K, s)) < 1e-12 * abs(gamma_k(K, s + 1))


def test_digamma_k_is_log_derivative(R10):
    s, h = 1.7, 1e-5
    fd = (np.log(gamma_k(R10, s + h)) - np.log(gamma_k(R10, s - h))) / (2 * h)
    assert abs(digamma_k(R10, s) - fd) < 1e-8


@pytest.mark.parametrize("nl", [(1, 1), (2, 2), (1, 1, 1)])
def test_dtimes_identity(nl):
    lhs, rhs = dtimes_identity_check(nl, 1.5)
    assert abs(lhs - rhs) < 1e-8 * abs(rhs)


@pytest.mark.parametrize("cfg", bundled_configs())
def test_gamma_rel_quadrature(cfg, ext_cfg):
    ext = ext_cfg(cfg).ext
    for s in (1.5, 2.0):
        q = gamma_rel_quadrature(ext, s)
        c = gamma_rel(ext, s)
        assert abs(q - c) < 1e-8 * abs(c)
