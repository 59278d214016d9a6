import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heckelab.numfield import FieldError, field_from_spec, parse_vectors

ints = st.integers(-20, 20)


def test_quadratic_discriminants():
    assert field_from_spec("Q(sqrt 5)").discriminant == 5
    assert field_from_spec("Q(sqrt -5)").discriminant == -20
    assert field_from_spec("Q(sqrt 10)").discriminant == 40
    assert field_from_spec("Q(sqrt 2)").discriminant == 8


def test_signatures():
    assert field_from_spec("Q(sqrt 5)").signature == (2, 0)
    assert field_from_spec("Q(sqrt -5)").signature == (0, 1)
    assert field_from_spec("Q").num_places == 1


def test_bad_shorthand():
    with pytest.raises(FieldError):
        field_from_spec("Q(cbrt 2)")


def test_parse_vectors():
    assert parse_vectors("0 1; 1 0") == [[0, 1], [1, 0]]


def test_golden_ratio_norm_and_trace():
    k = field_from_spec("Q(sqrt 5)")
    w = k.element([0, 1]) if k.norm(k.element([0, 1])) == -1 else None
    # ω = (1 + √5)/2 in the integral basis (1, ω): N ω = -1, Tr ω = 1
    assert w is not None
    assert k.trace(w) == 1


@settings(max_examples=40, deadline=None)
@given(ints, ints, ints, ints)
def test_norm_multiplicative(a, b, c, d):
    k = field_from_spec("Q(sqrt -5)")
    x, y = k.element([a, b]), k.element([c, d])
    assert k.norm(x * y) == k.norm(x) * k.norm(y)


@settings(max_examples=40, deadline=None)
@given(ints, ints)
def test_inverse(a, b):
    k = field_from_spec("Q(sqrt 10)")
    x = k.element([a, b])
    if x.is_zero():
        return
    assert (x * x.inverse()) == k.one


@settings(max_examples=30, deadline=None)
@given(ints, ints)
def test_embedding_is_a_ring_map(a, b):
    k = field_from_spec("Q(sqrt 2)")
    x = k.element([a, b])
    y = k.element([b, 1])
    ex, ey, exy = k.embed(x), k.embed(y), k.embed(x * y)
    assert max(abs(exy - ex * ey)) < 1e-9 * (1 + max(abs(ex * ey)))
    assert math.isclose(float(k.norm(x)), float(abs(ex[0] * ex[1]) * (1 if k.norm(x) >= 0 else -1)),
                        rel_tol=1e-12, abs_tol=1e-12)
