"""Unit groups, regulators, relative units and fundamental domains of T_{E/F}/U_{E/F}."""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._lattice import short_vectors, isqrt_exact
from .numfield import Extension, FieldElement, NumberField


class UnitError(ValueError):
    pass


# shift of the rounding cell so that balanced elements do not sit on a cell boundary
_CELL_SHIFT = 0.1234567


def log_vector(k: NumberField, x) -> np.ndarray:
    """(n_σ log|σ(x)|)_σ, repairing one cancelled conjugate from the exact norm."""
    vals = k.embed(x)
    scale = np.abs(np.array([float(c) for c in x.c])) @ np.abs(k.V)
    out = k.local_degrees * np.log(np.abs(vals))
    bad = np.abs(vals) < 1e-7 * scale
    if bad.sum() == 1:
        i = int(np.argmax(bad))
        N = abs(k.norm(x))
        lognorm = math.log(N.numerator) - math.log(N.denominator)
        out[i] = lognorm - (out.sum() - out[i])
    return out


def log_vectors(k: NumberField, C) -> np.ndarray:
    """Row-wise log vectors for integer/float coordinate arrays."""
    return k.local_degrees * np.log(np.abs(k.embed_many(C)))


@dataclass
class UnitData:
    field: NumberField
    torsion_order: int
    torsion_generator: FieldElement
    fundamental_units: list
    log_lattice: np.ndarray  # rank x r_k
    regulator: float

    @property
    def rank(self) -> int:
        return len(self.fundamental_units)

    @property
    def torsion(self) -> list:
        out = [self.field.one]
        for _ in range(self.torsion_order - 1):
            out.append(out[-1] * self.torsion_generator)
        return out

    def coefficients(self, logs: np.ndarray) -> np.ndarray:
        """Real coordinates of trace-zero log vectors in the fundamental log basis (rows)."""
        if not self.rank:
            return np.zeros((len(logs), 0))
        A = self.log_lattice[:, :-1]
        return np.linalg.solve(A.T, logs[:, :-1].T).T


def _roots_of_unity(k: NumberField):
    """All roots of unity in O_k (elements with |σ(x)| = 1 at every place)."""
    M = k.real_basis_matrix()
    C = short_vectors(M, float(k.d) * (1 + 1e-9))
    out = []
    for c in C:
        x = FieldElement(k, [int(v) for v in c])
        if np.allclose(np.abs(k.embed(x)), 1.0, atol=1e-9):
            out.append(x)
    return out


def _element_order(x, limit=64):
    y = x
    for m in range(1, limit + 1):
        if y == x.field.one:
            return m
        y = y * x
    raise UnitError("torsion element of unexpected order")


def _torsion(k):
    roots = _roots_of_unity(k)
    w = len(roots)
    gen = max(roots, key=lambda z: (_element_order(z), tuple(z.c)))
    if _element_order(gen) != w:
        raise UnitError("torsion group is not cyclic?")
    return w, gen


def _real_quadratic_unit(k: NumberField):
    """Fundamental unit of a real quadratic field by the continued fraction of ω."""
    D = k.discriminant if k.discriminant % 4 else k.discriminant // 4
    one_mod4 = k.discriminant % 4 == 1
    if one_mod4:
        m = (D - 1) // 4  # ω^2 = ω + m
        # ω = (1 + √D)/2 = (P + √D)/Q with P = 1, Q = 2
        P, Q = 1, 2
    else:
        P, Q = 0, 1
    s = math.isqrt(D)
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for _ in range(10000):
        a = (P + s) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        # convergent p/q of ω; candidate unit p - q ω̄
        if one_mod4:
            nrm = p * p - p * q - m * q * q
            u = FieldElement(k, [p - q, q])
        else:
            nrm = p * p - D * q * q
            u = FieldElement(k, [p, q])
        if abs(nrm) == 1:
            assert k.norm(u) == nrm
            if float(k.embed(u)[0].real) < 1:
                u = u.inverse()
            return u
        P = a * Q - P
        Q = (D - P * P) // Q
    raise UnitError("continued fraction did not produce a unit")


def _is_unit(x) -> bool:
    return x.is_integral() and abs(x.field.norm(x)) == 1


def _promote_rank_one(k, u):
    """Replace u by a generator of the free part if a unit of smaller height exists."""
    M = k.real_basis_matrix()
    t2 = float(np.sum(k.local_degrees * np.abs(k.embed(u)) ** 2))
    if t2 > 1e7:
        return u
    C = short_vectors(M, t2 * (1 + 1e-9))
    best, best_len = u, float(np.max(np.abs(log_vector(k, u))))
    for c in C:
        x = FieldElement(k, [int(v) for v in c])
        lv = np.max(np.abs(log_vector(k, x)))
        if 1e-8 < lv < best_len - 1e-9 and abs(k.norm(x)) == 1:
            best, best_len = x, lv
    return best


_UG_CACHE = {}
_UG_LOCK = threading.Lock()


def unit_group(k: NumberField, hints=None) -> UnitData:
    key = id(k)
    if hints is None:
        with _UG_LOCK:
            if key in _UG_CACHE:
                return _UG_CACHE[key]
        hints = getattr(k, "unit_hints", None)
    r = k.num_places
    rank = r - 1
    w, zeta = _torsion(k)
    if rank == 0:
        units = []
    elif k.d == 2:
        units = [_real_quadratic_unit(k)]
    else:
        if not hints or len(hints) != rank:
            raise UnitError(f"{k.name}: {rank} fundamental unit hint(s) required for degree {k.d}")
        units = []
        for h in hints:
            x = h if isinstance(h, FieldElement) else FieldElement(k, h)
            if not _is_unit(x):
                raise UnitError(f"hint {x} is not a unit")
            units.append(x)
        if rank == 1:
            units = [_promote_rank_one(k, units[0])]
    # normalize: first coordinate of the log vector positive
    fixed = []
    for u in units:
        if log_vector(k, u)[0] < 0:
            u = u.inverse()
        fixed.append(u)
    units = fixed
    logs = np.array([log_vector(k, u) for u in units]) if units else np.zeros((0, r))
    if rank:
        if np.max(np.abs(logs.sum(axis=1))) > 1e-8:
            raise UnitError("log vectors do not lie in the trace-zero hyperplane")
        reg = abs(float(np.linalg.det(logs[:, :-1])))
        if reg < 1e-8:
            raise UnitError("unit hints are not independent")
    else:
        reg = 1.0
    ud = UnitData(k, w, zeta, units, logs, reg)
    if hints is getattr(k, "unit_hints", None):
        with _UG_LOCK:
            _UG_CACHE[key] = ud
    return ud


def _unit_power(u, e):
    return u ** e


def reduce_mod_units(x: FieldElement, ud: UnitData | None = None) -> FieldElement:
    """Canonical representative of the orbit x * O_k^×."""
    if x.is_zero():
        raise UnitError("cannot reduce zero")
    k = x.field
    if ud is None:
        ud = unit_group(k)
    y = x
    for _ in range(3):
        if not ud.rank:
            break
        lv = log_vector(k, y)
        lv0 = lv - k.local_degrees * lv.sum() / k.d
        c = ud.coefficients(lv0[None, :])[0]
        e = np.floor(c + 0.5 - _CELL_SHIFT).astype(int)
        if not e.any():
            break
        for u, ei in zip(ud.fundamental_units, e):
            if ei:
                y = y * _unit_power(u, -int(ei))
    best = None
    for z in ud.torsion:
        cand = y * z
        emb = k.embed(cand)
        key = tuple(v for t in emb for v in (round(t.real, 9), round(t.imag, 9)))
        if best is None or key > best[0]:
            best = (key, cand)
    return best[1]


# ----------------------------------------------------------------- relative

@dataclass
class RelativeUnitData:
    ext: Extension
    torsion_order: int
    relative_units: list
    relative_log_lattice: np.ndarray  # rank x (coordinates of T_{E/F})
    relative_regulator: float
    index: int
    coordinate_places: list  # τ indices used as coordinates (one τ dropped per σ)
    density: float
    unit_data_E: UnitData = field(repr=False, default=None)
    unit_data_F: UnitData = field(repr=False, default=None)

    @property
    def rank(self) -> int:
        return len(self.relative_units)


def _fiber_layout(ext: Extension):
    """Coordinates on T_{E/F} and the density of d^×t_{E/F} in dlog t over them."""
    E, F = ext.E, ext.F
    coords = []
    density = 1.0
    for s, lst in enumerate(ext.place_map):
        c_sigma = 2.0 if F.places[s].kind == "complex" else 1.0
        prod_c = 1.0
        for t, _ in lst:
            prod_c *= 2.0 if E.places[t].kind == "complex" else 1.0
        t0, n0 = lst[0]
        density *= prod_c / (n0 * c_sigma)
        coords.extend(t for t, _ in lst[1:])
    return coords, density


def relative_unit_group(ext: Extension, radius: int = 6) -> RelativeUnitData:
    E, F = ext.E, ext.F
    uE = unit_group(E)
    uF = unit_group(F)
    target_rank = E.num_places - F.num_places
    one = F.one
    kernel = []
    tors = uE.torsion
    # relative torsion
    w_rel = sum(1 for z in tors if ext.rel_norm(z) == one)
    if target_rank:
        for exps in itertools.product(range(-radius, radius + 1), repeat=uE.rank):
            if not any(exps):
                continue
            base = E.one
            for u, e in zip(uE.fundamental_units, exps):
                base = base * u ** e
            for z in tors:
                x = base * z
                if ext.rel_norm(x) == one:
                    kernel.append(x)
                    break
    coords, density = _fiber_layout(ext)
    chosen = []
    chosen_logs = []
    kernel.sort(key=lambda x: (float(np.linalg.norm(log_vector(E, x))), tuple(x.c)))
    for x in kernel:
        lv = log_vector(E, x)
        cand = chosen_logs + [lv]
        if np.linalg.matrix_rank(np.array(cand), tol=1e-8) == len(cand):
            chosen.append(x)
            chosen_logs.append(lv)
        if len(chosen) == target_rank:
            break
    if len(chosen) != target_rank:
        raise UnitError("relative unit scan did not find enough independent units")
    fixed = []
    for x in chosen:
        if log_vector(E, x)[coords[0]] < 0 if coords else False:
            x = x.inverse()
        fixed.append(x)
    chosen = fixed
    # log t_τ = log|τ(u)| (not weighted by n_τ) on the coordinate places
    rel_logs = np.array([[math.log(abs(E.embed(x)[t])) for t in coords] for x in chosen]) \
        if chosen else np.zeros((0, len(coords)))
    R_rel = density * abs(float(np.linalg.det(rel_logs))) if chosen else 1.0
    # index [U_E : U_F U_{E/F}] from covolumes in T_{E/Q}
    gens = [log_vector(E, ext.to_E(u)) for u in uF.fundamental_units]
    gens += [log_vector(E, x) for x in chosen]
    if uE.rank:
        cov = abs(float(np.linalg.det(np.array(gens)[:, :-1])))
        idx_f = cov / uE.regulator
        index = int(round(idx_f))
        if abs(index - idx_f) > 1e-6 or index < 1:
            raise UnitError(f"unit index is not an integer: {idx_f}")
    else:
        index = 1
    return RelativeUnitData(ext, w_rel, chosen, rel_logs, R_rel, index, coords, density, uE, uF)


def regulator_lemma_check(rel: RelativeUnitData) -> tuple:
    """(R_{E/F}, index / n^(r_F - 1) * R_E / R_F)."""
    ext = rel.ext
    rhs = rel.index / ext.n ** (ext.F.num_places - 1) * rel.unit_data_E.regulator / rel.unit_data_F.regulator
    return rel.relative_regulator, rhs


@dataclass
class FundamentalDomain:
    """Parallelepiped {Σ θ_j v_j : θ ∈ [0,1)^m} + origin in the log coordinates of T_{E/F}."""

    ext: Extension
    coordinate_places: list
    origin: np.ndarray
    spanning: np.ndarray  # m x len(coords)
    density: float

    @property
    def dimension(self) -> int:
        return self.spanning.shape[0]

    @property
    def volume(self) -> float:
        if self.dimension == 0:
            return 1.0
        return self.density * abs(float(np.linalg.det(self.spanning)))

    def torus_point(self, theta) -> np.ndarray:
        """t ∈ T_{E/F} (one value per place of E) for parameters θ ∈ [0,1)^m."""
        ext = self.ext
        E = ext.E
        logs = np.zeros(len(E.places))
        if self.dimension:
            v = self.origin + np.asarray(theta, dtype=float) @ self.spanning
            for t, val in zip(self.coordinate_places, v):
                logs[t] = val
        for lst in ext.place_map:
            t0, n0 = lst[0]
            logs[t0] = -sum(m * logs[t] for t, m in lst[1:]) / n0
        return np.exp(logs)

    def translated(self, shift) -> "FundamentalDomain":
        return FundamentalDomain(self.ext, self.coordinate_places, self.origin + np.asarray(shift),
                                 self.spanning, self.density)


def fundamental_domain_TEF(rel: RelativeUnitData) -> FundamentalDomain:
    m = rel.rank
    coords = rel.coordinate_places
    if m and m != len(coords):
        raise UnitError("relative unit lattice is not of full rank in T_{E/F}")
    return FundamentalDomain(rel.ext, coords, np.zeros(len(coords)), rel.relative_log_lattice.copy(),
                             rel.density)


def unit_matrix_on_lattice(u: FieldElement, basis_rows) -> np.ndarray:
    """Integer matrix of multiplication by u on a lattice with rational Z-basis rows (row convention)."""
    from ._lattice import frac_inv, frac_matmul
    k = u.field
    Mu = k.regular_matrix(u)
    B = [list(r) for r in basis_rows]
    prod = frac_matmul(frac_matmul(B, Mu), frac_inv(B))
    out = np.zeros((len(B), len(B)), dtype=np.int64)
    for i, r in enumerate(prod):
        for j, v in enumerate(r):
            if v.denominator != 1:
                raise UnitError("element does not preserve the lattice")
            out[i, j] = int(v)
    return out
