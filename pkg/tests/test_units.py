import math

import numpy as np
import pytest

from heckelab.config import bundled_configs
from heckelab.numfield import field_from_spec
from heckelab.units import (fundamental_domain_TEF, log_vector, regulator_lemma_check,
                            relative_unit_group, unit_group)

# regulators log ε of the fundamental units: φ, 1 + √2, 3 + √10
REGULATORS = {"Q(sqrt 5)": math.log((1 + math.sqrt(5)) / 2), "Q(sqrt 2)": math.log(1 + math.sqrt(2)),
              "Q(sqrt 10)": math.log(3 + math.sqrt(10))}


@pytest.mark.parametrize("name", sorted(REGULATORS))
def test_real_quadratic_regulator(name):
    ud = unit_group(field_from_spec(name))
    assert ud.rank == 1
    assert abs(ud.regulator - REGULATORS[name]) < 1e-12


def test_imaginary_quadratic_units(K5):
    ud = unit_group(K5)
    assert ud.rank == 0 and ud.torsion_order == 2 and ud.regulator == 1.0


def test_unit_log_vectors_sum_to_zero(R10):
    ud = unit_group(R10)
    for u in ud.fundamental_units:
        assert abs(R10.norm(u)) == 1
        assert abs(float(np.sum(log_vector(R10, u)))) < 1e-12


@pytest.mark.parametrize("cfg", bundled_configs())
def test_regulator_lemma(cfg, ext_cfg):
    rel = relative_unit_group(ext_cfg(cfg).ext)
    a, b = regulator_lemma_check(rel)
    assert abs(a - b) <= 1e-8 * abs(b)


@pytest.mark.parametrize("cfg", bundled_configs())
def test_relative_units_have_norm_one(cfg, ext_cfg):
    ext = ext_cfg(cfg).ext
    rel = relative_unit_group(ext)
    for u in rel.relative_units:
        assert ext.rel_norm(u) == ext.F.one


def test_domain_dimension_and_volume(ext_cfg):
    rel = relative_unit_group(ext_cfg("q_sqrt5_over_q").ext)
    fd = fundamental_domain_TEF(rel)
    assert fd.dimension == 1
    assert abs(fd.volume - rel.relative_regulator) < 1e-12
    rel0 = relative_unit_group(ext_cfg("q_sqrtm5_over_q").ext)
    assert fundamental_domain_TEF(rel0).dimension == 0
