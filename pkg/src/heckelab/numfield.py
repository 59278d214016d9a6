"""Number fields given by an integral-basis multiplication table."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._lattice import charpoly, frac_det, frac_inv, vec_mat


class FieldError(ValueError):
    pass


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


@dataclass(frozen=True)
class Place:
    index: int
    kind: str  # "real" | "complex"
    values: tuple  # complex images of the integral basis

    @property
    def n(self) -> int:
        return 1 if self.kind == "real" else 2


class FieldElement:
    __slots__ = ("field", "c")

    def __init__(self, field: "NumberField", coords):
        self.field = field
        self.c = tuple(Fraction(x) for x in coords)

    # ring structure
    def _coerce(self, other):
        if isinstance(other, FieldElement):
            return other
        return self.field.from_rational(other)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, FieldElement):
            q = Fraction(other)
            return FieldElement(self.field, [a * q for a in self.c])
        return FieldElement(self.field, self.field._mul(self.c, other.c))

    __rmul__ = __mul__

    def inverse(self):
        return self.field.inverse(self)

    def __truediv__(self, other):
        if not isinstance(other, FieldElement):
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            try:
                other = self.field.from_rational(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.field is other.field and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def is_zero(self) -> bool:
        return not any(self.c)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.c)

    def __repr__(self):
        return f"FieldElement({self.field.name}, {[str(x) for x in self.c]})"


class NumberField:
    """A number field k/Q with integral basis b_0 = 1, b_1, ..., b_{d-1}.

    ``table[i][j]`` holds the coordinates of b_i * b_j in the basis.
    """

    def __init__(self, table, name: str = "", discriminant=None, signature=None,
                 basis_values=None):
        d = len(table)
        self.d = d
        self.name = name or f"field(d={d})"
        self.table = [[tuple(Fraction(x) for x in table[i][j]) for j in range(d)] for i in range(d)]
        self._check_table()
        self.trace_basis = tuple(sum(self.table[i][j][j] for j in range(d)) for i in range(d))
        gram = [[self._trace_coords(self.table[i][j]) for j in range(d)] for i in range(d)]
        self.trace_gram = gram
        disc = frac_det(gram)
        if disc.denominator != 1 or disc == 0:
            raise FieldError("trace form is degenerate or non-integral")
        self.discriminant = int(disc)
        if discriminant is not None and int(discriminant) != self.discriminant:
            raise FieldError(f"stated discriminant {discriminant} != computed {self.discriminant}")
        self.places = self._compute_places(basis_values)
        self.r1 = sum(p.kind == "real" for p in self.places)
        self.r2 = len(self.places) - self.r1
        if self.r1 + 2 * self.r2 != d:
            raise FieldError("embedding count inconsistent with degree")
        if signature is not None and tuple(signature) != (self.r1, self.r2):
            raise FieldError(f"stated signature {tuple(signature)} != computed {(self.r1, self.r2)}")
        self.V = np.array([p.values for p in self.places], dtype=complex).T  # d x r
        self.local_degrees = np.array([p.n for p in self.places])

    # ------------------------------------------------------------------ checks
    def _check_table(self):
        d = self.d
        T = self.table
        for i in range(d):
            e_i = tuple(Fraction(int(k == i)) for k in range(d))
            if T[0][i] != e_i or T[i][0] != e_i:
                raise FieldError("basis element b_0 must be 1")
            for j in range(d):
                if T[i][j] != T[j][i]:
                    raise FieldError("multiplication table is not commutative")
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    lhs = self._mul(self.table[i][j], tuple(Fraction(int(t == k)) for t in range(d)))
                    rhs = self._mul(tuple(Fraction(int(t == i)) for t in range(d)), self.table[j][k])
                    if lhs != rhs:
                        raise FieldError("multiplication table is not associative")

    def _trace_coords(self, coords) -> Fraction:
        return sum((a * t for a, t in zip(coords, self.trace_basis)), Fraction(0))

    def _compute_places(self, basis_values):
        d = self.d
        if basis_values is None:
            rng = [0, 1, 3, 7, 2, 5, 11, 13]
            for shift in range(20):
                theta = [Fraction(rng[(k + shift) % len(rng)]) if k else Fraction(0) for k in range(d)]
                M = np.array([[float(x) for x in row] for row in self.regular_matrix(theta)])
                ev, vecs = np.linalg.eig(M)
                if d == 1 or min(abs(ev[i] - ev[j]) for i in range(d) for j in range(i)) > 1e-6:
                    break
            else:
                raise FieldError("could not find a primitive element")
            cols = [vecs[:, i] / vecs[0, i] for i in range(d)]
        else:
            cols = [np.array(v, dtype=complex) for v in basis_values]
        real, cpx = [], []
        for v in cols:
            if np.max(np.abs(v.imag)) < 1e-9 * max(1.0, np.max(np.abs(v))):
                real.append(v.real.astype(complex))
            else:
                j = int(np.argmax(np.abs(v.imag) > 1e-9))
                if v[j].imag > 0:
                    cpx.append(v)
        real.sort(key=lambda v: tuple(-x.real for x in v[1:]))
        cpx.sort(key=lambda v: tuple((-x.real, -x.imag) for x in v[1:]))
        places = []
        for v in real:
            places.append(Place(len(places), "real", tuple(complex(x) for x in v)))
        for v in cpx:
            places.append(Place(len(places), "complex", tuple(complex(x) for x in v)))
        return places

    # ------------------------------------------------------------- arithmetic
    def _mul(self, a, b):
        d = self.d
        out = [Fraction(0)] * d
        T = self.table
        for i, ai in enumerate(a):
            if not ai:
                continue
            Ti = T[i]
            for j, bj in enumerate(b):
                if not bj:
                    continue
                f = ai * bj
                for k, t in enumerate(Ti[j]):
                    if t:
                        out[k] += f * t
        return out

    def element(self, coords) -> FieldElement:
        if len(coords) != self.d:
            raise FieldError("wrong coordinate length")
        return FieldElement(self, coords)

    def from_rational(self, q) -> FieldElement:
        q = Fraction(q)
        return FieldElement(self, [q] + [Fraction(0)] * (self.d - 1))

    @cached_property
    def one(self) -> FieldElement:
        return self.from_rational(1)

    @cached_property
    def zero(self) -> FieldElement:
        return self.from_rational(0)

    def basis(self, i: int) -> FieldElement:
        return FieldElement(self, [int(k == i) for k in range(self.d)])

    def regular_matrix(self, x):
        """Rows: coordinates of x * b_i, so that coords(y x) = coords(y) @ M."""
        c = x.c if isinstance(x, FieldElement) else tuple(Fraction(v) for v in x)
        return [self._mul(c, self.table[i][0]) for i in range(self.d)]

    def inverse(self, x: FieldElement) -> FieldElement:
        if x.is_zero():
            raise ZeroDivisionError("inverse of zero")
        Minv = frac_inv(self.regular_matrix(x))
        e0 = [Fraction(int(k == 0)) for k in range(self.d)]
        return FieldElement(self, vec_mat(e0, Minv))

    def trace(self, x: FieldElement) -> Fraction:
        return self._trace_coords(x.c)

    def norm(self, x: FieldElement) -> Fraction:
        return frac_det(self.regular_matrix(x))

    def minpoly_charpoly(self, x: FieldElement) -> list:
        return charpoly(self.regular_matrix(x))

    # -------------------------------------------------------------- embeddings
    def embed(self, x) -> np.ndarray:
        c = x.c if isinstance(x, FieldElement) else x
        return np.array([float(v) for v in c]) @ self.V

    def embed_many(self, C) -> np.ndarray:
        """Rows of coordinates (float or int arrays) to an array of place values."""
        return np.asarray(C, dtype=float) @ self.V

    def abs_values(self, x) -> np.ndarray:
        return np.abs(self.embed(x))

    def real_basis_matrix(self, rows=None, weighted=True) -> np.ndarray:
        """Map coordinate rows into R^d; with ``weighted`` the squared length is the T2 form."""
        if rows is None:
            rows = np.eye(self.d)
        vals = np.asarray(rows, dtype=float) @ self.V
        cols = []
        for k, p in enumerate(self.places):
            if p.kind == "real":
                cols.append(vals[:, k].real)
            else:
                f = np.sqrt(2.0) if weighted else 1.0
                cols.append(f * vals[:, k].real)
                cols.append(f * vals[:, k].imag)
        return np.column_stack(cols)

    @property
    def signature(self):
        return (self.r1, self.r2)

    @property
    def num_places(self) -> int:
        return len(self.places)

    def __repr__(self):
        return f"NumberField({self.name})"


# ------------------------------------------------------------------ parsing

_SHORT = re.compile(r"^\s*Q\s*\(\s*sqrt\s*\(?\s*([+-]?\s*\d+)\s*\)?\s*\)\s*$", re.I)

_CACHE: dict = {}


def quadratic_field(D: int) -> NumberField:
    if D in (0, 1) or not _squarefree(D):
        raise FieldError(f"D = {D} must be squarefree and different from 0, 1")
    key = ("quad", D)
    if key in _CACHE:
        return _CACHE[key]
    if D % 4 == 1:
        # omega = (1 + sqrt D)/2, omega^2 = omega + (D - 1)/4
        table = [[(1, 0), (0, 1)], [(0, 1), ((D - 1) // 4, 1)]]
        sq = np.sqrt(complex(D))
        vals = [(1, (1 + sq) / 2), (1, (1 - sq) / 2)]
    else:
        table = [[(1, 0), (0, 1)], [(0, 1), (D, 0)]]
        sq = np.sqrt(complex(D))
        vals = [(1, sq), (1, -sq)]
    if D < 0:
        vals = [vals[0]]  # sqrt(D) with positive imaginary part
        sig = (0, 1)
    else:
        sig = (2, 0)
    k = NumberField(table, name=f"Q(sqrt {D})", signature=sig,
                    basis_values=vals if D > 0 else vals + [tuple(np.conj(vals[0]))])
    _CACHE[key] = k
    return k


def rational_field() -> NumberField:
    if "Q" not in _CACHE:
        _CACHE["Q"] = NumberField([[(1,)]], name="Q", basis_values=[(1.0,)])
    return _CACHE["Q"]


def field_from_spec(spec) -> NumberField:
    """Build a field from a shorthand string or a mapping (kind=shorthand|table)."""
    if isinstance(spec, NumberField):
        return spec
    if isinstance(spec, str):
        s = spec.strip()
        if s.upper() == "Q":
            return rational_field()
        m = _SHORT.match(s)
        if not m:
            raise FieldError(f"cannot parse field shorthand {spec!r}")
        return quadratic_field(int(m.group(1).replace(" ", "")))
    kind = spec.get("kind", "shorthand").strip()
    if kind == "shorthand":
        return field_from_spec(spec["field"])
    if kind != "table":
        raise FieldError(f"unknown field kind {kind!r}")
    d = int(spec["basis_size"])
    entries = [Fraction(t) for t in spec["table"].split()]
    if len(entries) != d ** 3:
        raise FieldError(f"table needs {d**3} entries, got {len(entries)}")
    sig = tuple(int(t) for t in spec["signature"].split()) if "signature" in spec else None
    disc = int(spec["discriminant"]) if "discriminant" in spec else None
    units = parse_vectors(spec.get("units", ""))
    key = ("table", tuple(entries), sig, disc, tuple(map(tuple, units)))
    if key in _CACHE:
        return _CACHE[key]
    table = [[entries[(i * d + j) * d:(i * d + j + 1) * d] for j in range(d)] for i in range(d)]
    name = spec.get("name", "").strip() or f"table field d={d}"
    k = NumberField(table, name=name, discriminant=disc, signature=sig)
    for T in (x for row in k.table for x in row):
        if any(v.denominator != 1 for v in T):
            raise FieldError("multiplication table of an integral basis must be integral")
    if units:
        k.unit_hints = [k.element(u) for u in units]
    _CACHE[key] = k
    return k


def parse_vectors(text: str) -> list:
    """'1 0 0 0; 0 1/2 0 0' -> list of Fraction lists (whitespace-insensitive)."""
    out = []
    for part in str(text).split(";"):
        part = part.strip()
        if part:
            out.append([Fraction(t) for t in part.split()])
    return out


def trace(x: FieldElement, k: NumberField | None = None) -> Fraction:
    return (k or x.field).trace(x)


def norm(x: FieldElement, k: NumberField | None = None) -> Fraction:
    return (k or x.field).norm(x)


def embed(x: FieldElement, k: NumberField | None = None) -> np.ndarray:
    return (k or x.field).embed(x)


def _solve_rational(A, b):
    """Solve x A = b for a square rational matrix A (row-vector convention)."""
    from ._lattice import frac_inv
    return vec_mat(b, frac_inv(A))


class Extension:
    """E/F with F embedded in E; ``embedding[i]`` = E-coordinates of the i-th F basis element."""

    def __init__(self, E: NumberField, F: NumberField, embedding=None, name: str = ""):
        self.E = E
        self.F = F
        if embedding is None:
            if F.d != 1:
                raise FieldError("an embedding of F into E is required")
            embedding = [[1] + [0] * (E.d - 1)]
        self.embedding = [[Fraction(x) for x in row] for row in embedding]
        if len(self.embedding) != F.d or any(len(r) != E.d for r in self.embedding):
            raise FieldError("embedding matrix has the wrong shape")
        if E.d % F.d:
            raise FieldError("[E:Q] must be divisible by [F:Q]")
        self.n = E.d // F.d
        self.name = name or f"{E.name}/{F.name}"
        self._check_hom()
        self.place_map = self._place_map()

    def _check_hom(self):
        E, F = self.E, self.F
        if self.to_E(F.one) != E.one:
            raise FieldError("embedding does not send 1 to 1")
        for i in range(F.d):
            for j in range(F.d):
                lhs = self.to_E(F.basis(i) * F.basis(j))
                rhs = self.to_E(F.basis(i)) * self.to_E(F.basis(j))
                if lhs != rhs:
                    raise FieldError("embedding is not multiplicative")

    def to_E(self, x: FieldElement) -> FieldElement:
        c = [Fraction(0)] * self.E.d
        for a, row in zip(x.c, self.embedding):
            if a:
                for m in range(self.E.d):
                    c[m] += a * row[m]
        return FieldElement(self.E, c)

    def _place_map(self):
        """For each place σ of F: list of (τ index, n_{τ|σ})."""
        E, F = self.E, self.F
        Fvals_in_E = np.array([[float(v) for v in row] for row in self.embedding]) @ E.V  # d_F x r_E
        out = []
        used = set()
        for s, sig in enumerate(F.places):
            sv = np.array(sig.values)
            lst = []
            for t, tau in enumerate(E.places):
                tv = Fvals_in_E[:, t]
                if np.allclose(tv, sv, atol=1e-8) or np.allclose(tv, np.conj(sv), atol=1e-8):
                    lst.append((t, tau.n // sig.n))
                    used.add(t)
            if sum(m for _, m in lst) != self.n:
                raise FieldError("could not match the places of E above those of F")
            out.append(lst)
        if len(used) != len(E.places):
            raise FieldError("place matching is not a partition")
        return out

    def tau_to_sigma(self):
        m = {}
        for s, lst in enumerate(self.place_map):
            for t, _ in lst:
                m[t] = s
        return [m[t] for t in range(len(self.E.places))]

    def f_coordinates(self, x: FieldElement, w) -> list:
        """F-coordinates (f_1..f_n) with x = Σ f_i w_i."""
        A = []
        for wi in w:
            for j in range(self.F.d):
                A.append(list((self.to_E(self.F.basis(j)) * wi).c))
        sol = _solve_rational(A, list(x.c))
        return [FieldElement(self.F, sol[i * self.F.d:(i + 1) * self.F.d]) for i in range(len(w))]

    def from_f_coordinates(self, f, w) -> FieldElement:
        out = self.E.zero
        for fi, wi in zip(f, w):
            out = out + self.to_E(fi) * wi
        return out

    def regular_rep(self, x: FieldElement, w) -> list:
        """ρ_w(x): row i = F-coordinates of x w_i."""
        return [self.f_coordinates(x * wi, w) for wi in w]

    def rel_norm(self, x: FieldElement, w=None) -> FieldElement:
        if w is None:
            w = self.power_basis()
        return f_det(self.regular_rep(x, w), self.F)

    def power_basis(self):
        cache = getattr(self, "_pb", None)
        if cache is not None:
            return cache
        for cand in range(1, self.E.d):
            th = self.E.basis(cand)
            pw = [self.E.one]
            for _ in range(self.n - 1):
                pw.append(pw[-1] * th)
            try:
                self.f_coordinates(self.E.one, pw)
                self._pb = pw
                return pw
            except ZeroDivisionError:
                continue
        raise FieldError("no power basis over F among the E basis elements")


def f_det(M, F) -> FieldElement:
    """Determinant of a square matrix with entries in F (Gaussian elimination)."""
    A = [list(r) for r in M]
    n = len(A)
    det = F.one
    for i in range(n):
        p = next((r for r in range(i, n) if not A[r][i].is_zero()), None)
        if p is None:
            return F.zero
        if p != i:
            A[i], A[p] = A[p], A[i]
            det = -det
        piv = A[i][i]
        det = det * piv
        inv = piv.inverse()
        for r in range(i + 1, n):
            if not A[r][i].is_zero():
                f = A[r][i] * inv
                A[r] = [a - f * b for a, b in zip(A[r], A[i])]
    return det
