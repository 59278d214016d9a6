import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckelab.config import bundled_configs
from heckelab.ideals import FractionalIdeal, OFLattice
from heckelab.numfield import field_from_spec
from heckelab.space import (HeegnerObject, ParabolicData, SpaceError, UHSPoint, act, det_function,
                            embed_matrix, gamma_L_member, heegner_point, iwasawa,
                            random_shear_word, shear, standard_parabolic)
from heckelab.units import relative_unit_group

coords = st.tuples(st.floats(-2, 2), st.floats(0.2, 3.0))


def _unimodular(k, a, b, c):
    # (1 a; 0 1)(1 0; b 1)(1 c; 0 1)
    one, zero = k.one, k.zero
    M1 = [[one, k.from_rational(a)], [zero, one]]
    M2 = [[one, zero], [k.from_rational(b), one]]
    M3 = [[one, k.from_rational(c)], [zero, one]]

    def mul(A, B):
        return [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)]

    return mul(mul(M1, M2), M3)


@pytest.mark.parametrize("g", [((1, 2), (0, 1)), ((1, 0), (3, 1)), ((2, 1), (1, 1)), ((0, -1), (1, 0))])
def test_classical_action(g):
    # γ·z = [γ g] is the Möbius action z ↦ (az + b)/(cz + d) for F = Q
    Q = field_from_spec("Q")
    zz = 0.3 + 1.7j
    gamma = [[Q.from_rational(x) for x in row] for row in g]
    (a, b), (c, d) = g
    assert abs(act(gamma, UHSPoint.from_complex(zz)).as_complex() - (a * zz + b) / (c * zz + d)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(coords, st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3))
def test_action_is_a_left_action(p, a, b, c):
    k = field_from_spec("Q(sqrt -5)")
    z = UHSPoint.from_coordinates(k, p[0] + 0.5j * p[0], p[1])
    g = _unimodular(k, a, b, c)
    h = _unimodular(k, b, c, a)
    gh = [[g[i][0] * h[0][j] + g[i][1] * h[1][j] for j in range(2)] for i in range(2)]
    assert act(g, act(h, z)).distance(act(gh, z)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(coords)
def test_iwasawa_round_trip(p):
    k = field_from_spec("Q(sqrt 10)")
    z = UHSPoint.from_coordinates(k, [p[0], -p[0] / 2], [p[1], 1 / p[1]])
    assert iwasawa(k, z.matrices()).distance(z) < 1e-12
    # K and scalars do not move the point
    th = 0.7
    K = np.array([[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]])
    assert iwasawa(k, [3.0 * m @ K for m in z.matrices()]).distance(z) < 1e-12


def test_iwasawa_rejects_wrong_place_count(K5):
    with pytest.raises(SpaceError):
        iwasawa(K5, [np.eye(2), np.eye(2)])


def test_shear_membership(K5):
    P = FractionalIdeal.from_generators(K5, [K5.from_rational(2), K5.element([1, 1])])
    L = OFLattice((P, FractionalIdeal.unit(K5)))
    assert gamma_L_member(shear(L, 0, 1, K5.from_rational(2)), L)
    assert not gamma_L_member(shear(L, 1, 0, K5.one), L)
    rng = np.random.default_rng(3)
    for _ in range(5):
        assert gamma_L_member(random_shear_word(L, 4, rng), L)


def test_det_function_invariances(K5, rng):
    L = OFLattice((FractionalIdeal.unit(K5), FractionalIdeal.unit(K5)))
    p = standard_parabolic(L, 0)
    z = UHSPoint.from_coordinates(K5, 0.2 + 0.1j, 1.1)
    base = det_function(p, z)
    for _ in range(4):
        th = rng.uniform(0, 2 * math.pi)
        U = np.array([[math.cos(th), 1j * math.sin(th)], [1j * math.sin(th), math.cos(th)]])
        g = [rng.uniform(0.5, 2) * np.exp(1j * rng.uniform(0, 6)) * m @ U for m in z.matrices()]
        assert abs(det_function(p, iwasawa(K5, g)) - base) < 1e-10 * base


def test_parabolic_data_validation(Q):
    L = OFLattice((FractionalIdeal.unit(Q), FractionalIdeal.unit(Q)))
    p = ParabolicData.from_vector(L, (0, 2))
    assert p.a.norm == Fraction_half()
    assert p.in_parabolic([[Q.one, Q.from_rational(3)], [Q.zero, Q.one]])
    assert not p.in_parabolic([[Q.one, Q.zero], [Q.one, Q.one]])


def Fraction_half():
    from fractions import Fraction
    return Fraction(1, 2)


@pytest.mark.parametrize("cfg", bundled_configs())
def test_lemma_psi(cfg, ext_cfg):
    c = ext_cfg(cfg)
    h = HeegnerObject(c.ext, c.w)
    for u in relative_unit_group(c.ext).relative_units:
        assert h.lemma_psi_residual(u) < 1e-8


@pytest.mark.parametrize("cfg", bundled_configs())
def test_delta_identity(cfg, ext_cfg):
    c = ext_cfg(cfg)
    h = HeegnerObject(c.ext, c.w)
    a, b = h.delta_identity(c.A)
    assert abs(a - b) < 1e-8 * b
    assert abs(h.delta_numeric() - float(h.Delta)) < 1e-8 * float(h.Delta)


def test_heegner_point_classical(ext_cfg):
    # w = (ω, 1) for Q(√5) gives the root of the associated quadratic form
    c = ext_cfg("q_sqrt5_over_q")
    z = heegner_point(HeegnerObject(c.ext, c.w)).as_complex()
    assert z.imag > 0


@pytest.mark.parametrize("cfg", ["q_sqrt5_over_q", "q_sqrt10_over_q", "q_sqrt2_over_q"])
def test_heegner_periodicity(cfg, ext_cfg):
    # ϖ(|u| t) = ρ_w(u)·ϖ(t) for a relative unit u, and ρ_w(u) ∈ Γ_L
    from heckelab.zeta import RelativeData
    c = ext_cfg(cfg)
    h = HeegnerObject(c.ext, c.w)
    u = relative_unit_group(c.ext).relative_units[0]
    R = c.ext.regular_rep(u, c.w)
    t = np.abs(c.E.embed(u))
    assert act(R, heegner_point(h)).distance(heegner_point(h, t)) < 1e-10
    assert gamma_L_member(R, RelativeData(c.ext, c.w, c.A).L)
