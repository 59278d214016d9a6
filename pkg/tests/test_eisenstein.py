import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckelab.eisenstein import (EisensteinError, EisensteinSeries, anti_integral_rep,
                                 automorphy_residual, constant_term_closed, eisenstein_class_relation_check,
                                 eisenstein_direct, eisenstein_direct_err, eisenstein_fourier,
                                 eisenstein_fourier_err, epstein_zeta, eta, fourier_terms,
                                 kronecker_limit_closed_form, phi_term, psi_term, residue_closed_form,
                                 scaling_law_check, upper_gamma_scaled, zeta_partial)
from heckelab.ideals import FractionalIdeal, OFLattice, class_group
from heckelab.numfield import field_from_spec
from heckelab.space import UHSPoint, gamma_L_member, random_shear_word
from heckelab.zeta import numeric_residue_and_constant

CATALAN = 0.915965594177219
EULER_GAMMA = 0.5772156649015329


def lattice(k, a=None):
    one = FractionalIdeal.unit(k)
    return OFLattice((a or one, one))


def test_epstein_square_lattice():
    # Σ' (m^2 + n^2)^{-s} = 4 ζ(s) β(s); at s = 2: 4 ζ(2) G
    v, err = epstein_zeta(np.eye(2), 2.0)
    assert abs(v - 4 * math.pi ** 2 / 6 * CATALAN) < 1e-12
    assert err < 1e-10


def test_epstein_brute_force_skewed():
    B = np.array([[1.0, 0.0], [0.37, 1.9]])
    v, _ = epstein_zeta(B, 2.5)
    m = np.arange(-400, 401)
    M, N = np.meshgrid(m, m)
    P = np.stack([M.ravel(), N.ravel()], 1) @ B
    r2 = np.sum(P ** 2, 1)
    r2 = r2[r2 > 0]
    brute = np.sum(r2 ** -2.5)
    # the box misses |v| beyond roughly 370; that tail is about 2π/(3·1.9·370^3) ≈ 2e-8
    assert 0 < (v - brute).real < 5e-8 and abs(v.imag) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-3.5, 3.5), st.floats(0.05, 30.0))
def test_upper_gamma_recurrence(a, x):
    # G_a(x) = ∫_1^∞ e^{-xt} t^{a-1} dt satisfies a G_a = x G_{a+1} - e^{-x}
    lhs = a * upper_gamma_scaled(a, np.array([x]))[0]
    rhs = x * upper_gamma_scaled(a + 1, np.array([x]))[0] - math.exp(-x)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs), math.exp(-x) * 10)


def test_classical_value_at_i(Q):
    # E_{(Z ⊂ Z^2)}(i, 2) = (1/2) Σ'_{gcd=1} y^2/|mz+n|^4 = 4 ζ(2) β(2) / (2 ζ(4))
    ser = EisensteinSeries(lattice(Q), FractionalIdeal.unit(Q))
    v = eisenstein_direct(ser, UHSPoint.from_complex(1j), 2.0)
    expect = 4 * (math.pi ** 2 / 6) * CATALAN / 2 / (math.pi ** 4 / 90)
    assert abs(v - expect) < 1e-11


@pytest.mark.parametrize("z", [1j, 0.3 + 1.7j])
@pytest.mark.parametrize("s", [1.3, 1.8, 2.5])
def test_two_paths_over_Q(Q, z, s):
    ser = EisensteinSeries(lattice(Q), FractionalIdeal.unit(Q), X=1e4, bessel_radius=30)
    zz = UHSPoint.from_complex(z)
    d, de = eisenstein_direct_err(ser, zz, s)
    f, fe = eisenstein_fourier_err(ser, zz, s)
    assert abs(d - f) <= de + fe
    assert abs(d - f) < 1e-8


@settings(max_examples=12, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.8, 2.5), st.floats(1.2, 3.0))
def test_two_paths_over_Q_random(x, y, s):
    Q = field_from_spec("Q")
    ser = EisensteinSeries(lattice(Q), FractionalIdeal.unit(Q))
    z = UHSPoint.from_complex(complex(x, y))
    d, de = eisenstein_direct_err(ser, z, s)
    f, fe = eisenstein_fourier_err(ser, z, s)
    assert abs(d - f) <= de + fe + 1e-12 * abs(d)


def test_two_paths_imaginary_quadratic_both_classes(K5):
    G = class_group(K5)
    P = G.representatives[1]
    z = UHSPoint.from_coordinates(K5, 0.2 + 0.1j, 1.1)
    for L in (lattice(K5), lattice(K5, P)):
        for c in range(G.h):
            ser = EisensteinSeries(L, anti_integral_rep(K5, c))
            d, de = eisenstein_direct_err(ser, z, 1.7)
            f, fe = eisenstein_fourier_err(ser, z, 1.7)
            assert abs(d - f) <= de + fe and abs(d - f) < 1e-9


@pytest.mark.parametrize("name", ["Q(sqrt 5)", "Q(sqrt 10)"])
def test_two_paths_real_quadratic(name):
    k = field_from_spec(name)
    z = UHSPoint.from_coordinates(k, [0.1, -0.2], [1.2, 0.9])
    for c in range(class_group(k).h):
        ser = EisensteinSeries(lattice(k), cls=c)
        d, de = eisenstein_direct_err(ser, z, 2.0)
        f, fe = eisenstein_fourier_err(ser, z, 2.0)
        assert abs(d - f) <= de + fe


def test_class_relation(K5):
    z = UHSPoint.from_coordinates(K5, 0.2 + 0.1j, 1.1)
    for c in range(2):
        f, d, tol = eisenstein_class_relation_check(lattice(K5), anti_integral_rep(K5, c), z, 2.0)
        assert abs(f - d) <= tol


def test_constant_term_is_average_over_x(Q):
    ser = EisensteinSeries(lattice(Q), cls=0)
    y, s, M = 1.3, 2.0, 64
    avg = np.mean([eisenstein_direct(ser, UHSPoint.from_complex(complex(j / M, y)), s) for j in range(M)])
    assert abs(avg - constant_term_closed(ser, UHSPoint.from_complex(complex(0, y)), s)) < 1e-10


def test_scaling_law(Q):
    z = UHSPoint.from_complex(0.3 + 1.7j)
    half = FractionalIdeal.unit(Q).scale(Fraction(1, 2))
    for s in (1.5, 2.5):
        lhs, rhs = scaling_law_check(lattice(Q), half, 2, z, s)
        assert abs(lhs - rhs) < 1e-10 * abs(rhs)


def test_scaling_requires_anti_integral(Q):
    with pytest.raises(EisensteinError):
        EisensteinSeries(lattice(Q), FractionalIdeal.unit(Q).scale(2))


def test_rejects_divergent_direct(Q):
    ser = EisensteinSeries(lattice(Q), FractionalIdeal.unit(Q))
    with pytest.raises(Exception):
        eisenstein_direct(ser, UHSPoint.from_complex(1j), 0.9)


@pytest.mark.parametrize("name,length,coeff", [("Q", 4, 2), ("Q(sqrt -5)", 4, 2),
                                                ("Q(sqrt 5)", 1, 1), ("Q(sqrt 10)", 1, 1)])
def test_gamma_L_automorphy(name, length, coeff):
    k = field_from_spec(name)
    L = lattice(k)
    ser = EisensteinSeries(L, FractionalIdeal.unit(k))
    z = UHSPoint.from_coordinates(k, 0.17, 1.3)
    rng = np.random.default_rng(2026)
    for _ in range(5):
        g = random_shear_word(L, length, rng, coeff)
        assert gamma_L_member(g, L)
        r, e = automorphy_residual(ser, g, z, 2.0)
        assert r <= e


def test_residue_over_Q(Q):
    # E_{L,[Z]} = (1/2) Σ'_{(m,n)} y^s/|mz+n|^{2s} has residue π/2 at s = 1; dividing by ζ(2s)
    # for the primitive series gives 3/π
    assert abs(residue_closed_form(lattice(Q), 0) - math.pi / 2) < 1e-12
    ser = EisensteinSeries(lattice(Q), FractionalIdeal.unit(Q))
    vals = []
    for z in (1j, 0.3 + 1.7j):
        zz = UHSPoint.from_complex(z)
        r, _, er, _ = numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, zz, s))
        vals.append(r)
        assert abs(r - 3 / math.pi) < 1e-5 * 3 / math.pi
    assert abs(vals[0] - vals[1]) < 2e-5


def test_residue_imaginary_quadratic(K5):
    for c in range(2):
        ser = EisensteinSeries(lattice(K5), cls=c, l_mode="smooth-empirical")
        closed = residue_closed_form(lattice(K5), c)
        vals = []
        for x, y in ((0.2 + 0.1j, 1.1), (0.1, 0.9)):
            z = UHSPoint.from_coordinates(K5, x, y)
            r, _, _, _ = numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, z, s))
            vals.append(r)
            assert abs(r - closed) < 1e-4 * closed
        assert abs(vals[0] - vals[1]) < 2e-5 * closed


@pytest.mark.parametrize("z", [1j, 0.3 + 1.7j, -0.45 + 0.95j])
def test_kronecker_limit_eta(Q, z):
    ser = EisensteinSeries(lattice(Q), cls=0)
    zz = UHSPoint.from_complex(z)
    p0, _ = phi_term(ser, 0, zz, 1.0)
    q0, _ = psi_term(ser, 0, zz, 1.0)
    y = z.imag
    # the j = 0 Fourier pieces at s = 1 reproduce -(6/π) log|η(z)|^2
    val = p0 + q0
    assert abs(val - (-(6 / math.pi) * math.log(abs(eta(z)) ** 2))) < 1e-8


def test_eta_modular(Q):
    z = 0.3 + 1.7j
    # |η(-1/z)|^2 = |z| |η(z)|^2
    assert abs(abs(eta(-1 / z)) ** 2 - abs(z) * abs(eta(z)) ** 2) < 1e-14


@pytest.mark.parametrize("z", [1j, 0.3 + 1.7j])
def test_kronecker_limit_full(Q, z):
    ser = EisensteinSeries(lattice(Q), cls=0, l_mode="smooth-empirical")
    zz = UHSPoint.from_complex(z)
    _, c, _, ec = numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, zz, s))
    kl = kronecker_limit_closed_form(lattice(Q), 0, zz)
    assert abs(kl.value - c) < 1e-5
    # classical first limit formula, halved: -π log|η|^2 + π(γ - log 2 - log √y)
    y = z.imag
    classical = -math.pi * math.log(abs(eta(z)) ** 2) + math.pi * (EULER_GAMMA - math.log(2) - math.log(math.sqrt(y)))
    assert abs(kl.value - classical) < 1e-10


def test_kronecker_limit_imaginary_quadratic(K5):
    for c in range(2):
        ser = EisensteinSeries(lattice(K5), cls=c, l_mode="smooth-empirical")
        z = UHSPoint.from_coordinates(K5, 0.2 + 0.1j, 1.1)
        _, num, _, _ = numeric_residue_and_constant(lambda s: eisenstein_fourier(ser, z, s))
        kl = kronecker_limit_closed_form(lattice(K5), c, z)
        assert abs(kl.value - num) < 1e-5
