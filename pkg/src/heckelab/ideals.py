"""Fractional ideals in HNF, prime decomposition, class groups, lattices 𝔞_1 ⊕ ... ⊕ 𝔞_n."""

from __future__ import annotations

import cmath
import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor, gf_from_int_poly

from ._lattice import frac_inv, frac_matmul, hnf, hnf_contains, lcm, rational_lattice, short_vectors
from .numfield import FieldElement, NumberField


class IdealError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def _as_coords(x, k):
    if isinstance(x, FieldElement):
        return x.c
    if isinstance(x, (int, Fraction)):
        return k.from_rational(x).c
    return tuple(Fraction(v) for v in x)


class FractionalIdeal:
    """Z-lattice (1/den) * rowspan(hnf) inside k, closed under O_k."""

    __slots__ = ("field", "den", "hnf", "__dict__")

    def __init__(self, field: NumberField, den: int, H):
        self.field = field
        self.den = int(den)
        self.hnf = tuple(tuple(int(v) for v in r) for r in H)

    @classmethod
    def from_z_basis(cls, k, vectors):
        den, H = rational_lattice(vectors)
        return cls(k, den, H)

    @classmethod
    def from_generators(cls, k, gens):
        """O_k-module generated by the given elements."""
        vecs = []
        for g in gens:
            c = _as_coords(g, k)
            if not any(c):
                continue
            for i in range(k.d):
                vecs.append(k._mul(c, k.table[i][0]))
        if not vecs:
            raise IdealError("zero ideal")
        return cls.from_z_basis(k, vecs)

    @classmethod
    def unit(cls, k):
        return cls(k, 1, tuple(tuple(int(i == j) for j in range(k.d)) for i in range(k.d)))

    # --------------------------------------------------------- basic data
    @cached_property
    def basis(self):
        """Z-basis as rational coordinate rows."""
        return [[Fraction(v, self.den) for v in r] for r in self.hnf]

    @cached_property
    def norm(self) -> Fraction:
        det = 1
        for i in range(self.field.d):
            det *= self.hnf[i][i]
        return Fraction(det, self.den ** self.field.d)

    def __eq__(self, other):
        return isinstance(other, FractionalIdeal) and self.field is other.field and \
            self.den == other.den and self.hnf == other.hnf

    def __hash__(self):
        return hash((self.den, self.hnf))

    def __lt__(self, other):
        return (self.den, self.hnf) < (other.den, other.hnf)

    def __repr__(self):
        return f"FractionalIdeal(den={self.den}, hnf={[list(r) for r in self.hnf]})"

    def contains(self, x) -> bool:
        c = _as_coords(x, self.field)
        v = [q * self.den for q in c]
        if any(q.denominator != 1 for q in v):
            return False
        return hnf_contains(self.hnf, [int(q) for q in v])

    def is_integral(self) -> bool:
        return self.den == 1

    def is_anti_integral(self) -> bool:
        return self.contains(self.field.one)

    def __mul__(self, other):
        return ideal_mul(self, other)

    def scale(self, q) -> "FractionalIdeal":
        """Multiply by a nonzero rational number."""
        q = Fraction(q)
        if q == 0:
            raise IdealError("zero ideal")
        q = abs(q)
        return FractionalIdeal.from_z_basis(self.field, [[v * q for v in r] for r in self.basis])

    def inverse(self):
        return ideal_inv(self)

    def lattice_matrix(self, weighted=True) -> np.ndarray:
        """Real d x d matrix whose rows embed the Z-basis (T2-normalized if weighted)."""
        return self.field.real_basis_matrix(np.array(self.hnf, dtype=float) / self.den, weighted)

    def integral_multiple(self) -> tuple:
        """(m, m * self) with m the smallest positive integer making it integral."""
        return self.den, FractionalIdeal(self.field, 1, self.hnf)


def ideal_mul(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    if a.field is not b.field:
        raise IdealError("ideals over different fields")
    k = a.field
    rows = []
    for u in a.hnf:
        for v in b.hnf:
            rows.append(_int_mul(k, u, v))
    H = hnf(rows)
    g = 0
    for r in H:
        for x in r:
            g = math.gcd(g, x)
    den = a.den * b.den
    c = math.gcd(g, den)
    if c > 1:
        H = tuple(tuple(x // c for x in r) for r in H)
        den //= c
    return FractionalIdeal(k, den, H)


def _int_tables(k):
    t = getattr(k, "_int_table", None)
    if t is None:
        t = [[[int(x) for x in k.table[i][j]] for j in range(k.d)] for i in range(k.d)]
        k._int_table = t
    return t


def _int_mul(k, u, v):
    T = _int_tables(k)
    d = k.d
    out = [0] * d
    for i in range(d):
        ui = u[i]
        if not ui:
            continue
        for j in range(d):
            f = ui * v[j]
            if f:
                Tij = T[i][j]
                for m in range(d):
                    out[m] += f * Tij[m]
    return out


def _dual(k, basis_rows):
    """Trace dual lattice basis: rows X with Tr(x_i b_j) = delta_ij."""
    BG = frac_matmul(basis_rows, k.trace_gram)
    Xt = frac_inv(BG)
    return [list(r) for r in zip(*Xt)]


def codifferent(k) -> FractionalIdeal:
    c = getattr(k, "_codifferent", None)
    if c is None:
        c = FractionalIdeal.from_z_basis(k, _dual(k, [[Fraction(int(i == j)) for j in range(k.d)]
                                                      for i in range(k.d)]))
        k._codifferent = c
    return c


def different(k) -> FractionalIdeal:
    return ideal_inv(codifferent(k))


def ideal_inv(a: FractionalIdeal) -> FractionalIdeal:
    k = a.field
    ad = ideal_mul(a, codifferent(k))
    return FractionalIdeal.from_z_basis(k, _dual(k, ad.basis))


def ideal_norm(a: FractionalIdeal) -> Fraction:
    return a.norm


def ideal_add(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return FractionalIdeal.from_z_basis(a.field, a.basis + b.basis)


def ideal_intersection(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return ideal_inv(ideal_add(ideal_inv(a), ideal_inv(b)))


def ideal_pow(a: FractionalIdeal, e: int) -> FractionalIdeal:
    if e < 0:
        return ideal_pow(ideal_inv(a), -e)
    out = FractionalIdeal.unit(a.field)
    base = a
    while e:
        if e & 1:
            out = ideal_mul(out, base)
        base = ideal_mul(base, base)
        e >>= 1
    return out


def principal_ideal(x) -> FractionalIdeal:
    return FractionalIdeal.from_generators(x.field, [x])


def divides(a: FractionalIdeal, b: FractionalIdeal) -> bool:
    """a | b, i.e. b ⊆ a."""
    return all(a.contains(r) for r in b.basis)


def is_anti_integral(a: FractionalIdeal) -> bool:
    return a.is_anti_integral()


def ideal_to_element(a: FractionalIdeal, coeffs) -> FieldElement:
    k = a.field
    c = [Fraction(0)] * k.d
    for t, r in zip(coeffs, a.basis):
        for i in range(k.d):
            c[i] += int(t) * r[i]
    return FieldElement(k, c)


# ---------------------------------------------------------------- primes

@dataclass(frozen=True)
class PrimeIdeal:
    ideal: FractionalIdeal
    p: int
    e: int
    f: int

    @property
    def norm(self) -> int:
        return self.p ** self.f


def _primitive_candidates(k):
    d = k.d
    yield k.basis(1) if d > 1 else k.one
    rng = range(-2, 3)
    for coeffs in itertools.product(rng, repeat=d - 1):
        if any(coeffs):
            yield FieldElement(k, (0,) + coeffs)


def _index_of(k, theta) -> int | None:
    """Index [O_k : Z[theta]] or None if theta does not generate k."""
    d = k.d
    powers = [k.one]
    for _ in range(d - 1):
        powers.append(powers[-1] * theta)
    M = [list(p.c) for p in powers]
    from ._lattice import frac_det
    det = frac_det(M)
    if det == 0:
        return None
    return abs(int(det))


def _theta_for_prime(k, p):
    cache = k.__dict__.setdefault("_theta_cache", [])
    if not cache:
        for th in _primitive_candidates(k):
            idx = _index_of(k, th)
            if idx is not None:
                cache.append((th, idx))
            if len(cache) >= 40:
                break
    for th, idx in cache:
        if idx % p:
            return th
    return None


def primes_above(k: NumberField, p: int) -> list:
    """Prime ideals over the rational prime p, by Dedekind-Kummer."""
    cache = k.__dict__.setdefault("_primes_above", {})
    if p in cache:
        return cache[p]
    d = k.d
    if d == 1:
        out = [PrimeIdeal(FractionalIdeal(k, 1, ((p,),)), p, 1, 1)]
        cache[p] = out
        return out
    theta = _theta_for_prime(k, p)
    if theta is None:
        out = _primes_above_bruteforce(k, p)
    else:
        cp = k.minpoly_charpoly(theta)
        f = [int(c) for c in cp]
        poly = gf_from_int_poly(f, p)
        _, facs = gf_factor(poly, p, ZZ)
        out = []
        for g, e in facs:
            g = [int(c) % p for c in g]
            # g(theta) with coefficients highest degree first
            val = k.zero
            for c in g:
                val = val * theta + c
            P = FractionalIdeal.from_generators(k, [k.from_rational(p), val])
            deg = len(g) - 1
            out.append(PrimeIdeal(P, p, int(e), deg))
    out.sort(key=lambda q: (q.f, q.ideal))
    cache[p] = out
    return out


def _primes_above_bruteforce(k, p):
    """Maximal ideals containing p: kernels of O/p -> F_p-algebra components (small degree only)."""
    # enumerate ideals between pO and O that are prime, via the radical and splitting
    d = k.d
    pO = FractionalIdeal(k, 1, tuple(tuple(p * int(i == j) for j in range(d)) for i in range(d)))
    found = []
    # candidate primes: (p, x) for x in O/pO small representatives
    for coeffs in itertools.product(range(p), repeat=d):
        if not any(coeffs):
            continue
        P = ideal_add(pO, FractionalIdeal.from_generators(k, [FieldElement(k, coeffs)]))
        if P.norm == 1 or P in [q for q, _ in found]:
            continue
        if _is_prime_ideal(k, P, p):
            f = round(math.log(int(P.norm), p))
            found.append((P, f))
    out = []
    for P, f in found:
        e = 0
        Q = P
        while divides(Q, pO):
            e += 1
            Q = ideal_mul(Q, P)
        out.append(PrimeIdeal(P, p, e, f))
    total = sum(q.e * q.f for q in out)
    if total != d:
        raise IdealError(f"prime decomposition of {p} failed (sum e f = {total})")
    return out


def _is_prime_ideal(k, P, p):
    """P ⊇ pO is prime iff O/P is a field: every nonzero residue is invertible."""
    N = int(P.norm)
    if N == 1:
        return False
    f = round(math.log(N, p))
    if p ** f != N:
        return False
    # O/P is a field iff x^(N-1) = 1 mod P for all x not in P (test on basis combos)
    for coeffs in itertools.product(range(p), repeat=k.d):
        x = FieldElement(k, coeffs)
        if P.contains(x):
            continue
        y = _pow_mod(k, x, N - 1, P)
        if not P.contains(y - 1):
            return False
    return True


def _pow_mod(k, x, e, P):
    out = k.one
    while e:
        if e & 1:
            out = _reduce_mod(out * x, P)
        x = _reduce_mod(x * x, P)
        e >>= 1
    return out


def _reduce_mod(x, P):
    """Reduce an integral element modulo the integral ideal P (upper triangular HNF)."""
    v = [int(c) for c in x.c]
    H = P.hnf
    for i in range(len(H)):
        q = v[i] // H[i][i]
        if q:
            v = [a - q * b for a, b in zip(v, H[i])]
    return FieldElement(x.field, v)


def factor_ideal(a: FractionalIdeal) -> list:
    """[(PrimeIdeal, exponent)] for a fractional ideal."""
    k = a.field
    m, A = a.integral_multiple()
    out = {}

    def add(ideal, sign):
        N = int(ideal.norm)
        for p in _prime_factors(N * 1):
            for P in primes_above(k, p):
                v = 0
                Q = P.ideal
                while divides(Q, ideal):
                    v += 1
                    Q = ideal_mul(Q, P.ideal)
                if v:
                    out[P] = out.get(P, 0) + sign * v

    add(A, 1)
    if m > 1:
        add(FractionalIdeal(k, 1, tuple(tuple(m * int(i == j) for j in range(k.d)) for i in range(k.d))), -1)
    return sorted(((P, e) for P, e in out.items() if e), key=lambda t: (t[0].p, t[0].ideal))


def _prime_factors(n: int) -> list:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def prime_ideals_up_to(k: NumberField, X: int) -> list:
    out = []
    for p in primes_up_to(int(X)):
        for P in primes_above(k, int(p)):
            if P.norm <= X:
                out.append(P)
    return out


# ----------------------------------------------------------- principality

def _unit_data(k):
    from .units import unit_group
    return unit_group(k)


def principal_generator(a: FractionalIdeal, budget: int = 2_000_000):
    """A generator of the principal ideal a, or None if a is not principal."""
    k = a.field
    m, A = a.integral_multiple()
    N = A.norm
    if k.d == 1:
        return k.from_rational(Fraction(A.hnf[0][0], m))
    if N == 1:
        return k.from_rational(Fraction(1, m))
    ud = _unit_data(k)
    Nf = float(N)
    # bound on T2 for a unit-balanced generator
    logs = np.array(ud.log_lattice) if ud.rank else np.zeros((0, k.num_places))
    B = 0.0
    for s, p in enumerate(k.places):
        spread = float(np.sum(np.abs(logs[:, s]))) / p.n if ud.rank else 0.0
        B += p.n * Nf ** (2.0 / k.d) * math.exp(spread)
    B *= 1.0 + 1e-9
    M = A.lattice_matrix()
    vol = abs(np.linalg.det(M))
    est = (math.pi ** (k.d / 2) / math.gamma(k.d / 2 + 1)) * B ** (k.d / 2) / vol
    if est > budget:
        raise BudgetExceeded(f"principality search would visit ~{est:.3g} points")
    C = short_vectors(M, B)
    for c in C:
        x = ideal_to_element(A, c)
        if abs(k.norm(x)) == N:
            return x / m
    return None


def is_principal(a: FractionalIdeal) -> bool:
    return principal_generator(a) is not None


# ------------------------------------------------------------ class group

def minkowski_bound(k: NumberField) -> float:
    d = k.d
    return (4 / math.pi) ** k.r2 * math.factorial(d) / d ** d * math.sqrt(abs(k.discriminant))


@dataclass(frozen=True)
class ClassCharacter:
    group: "IdealClassGroup"
    values: tuple  # values[c] for class index c

    def __call__(self, c) -> complex:
        if isinstance(c, FractionalIdeal):
            c = self.group.class_of(c)
        return self.values[c]

    def conj(self):
        return ClassCharacter(self.group, tuple(v.conjugate() for v in self.values))

    @property
    def is_trivial(self) -> bool:
        return all(abs(v - 1) < 1e-12 for v in self.values)


class IdealClassGroup:
    def __init__(self, k, representatives, table):
        self.field = k
        self.representatives = list(representatives)
        self.h = len(self.representatives)
        self.table = table
        self.identity = 0
        self._inverse = [next(j for j in range(self.h) if table[i][j] == 0) for i in range(self.h)]
        self._lock = threading.Lock()
        self._cache = {}
        self._inv_reps = [self._integral_rep(ideal_inv(r)) for r in self.representatives]
        self.characters = self._characters()
        self._genus = _genus_data(k, self)
        self._norm_classifier = None

    def _integral_rep(self, a):
        return a.integral_multiple()[1]

    def compose(self, i, j):
        return self.table[i][j]

    def inverse(self, i):
        return self._inverse[i]

    def power(self, i, e):
        e %= self.order(i)
        out = 0
        for _ in range(e):
            out = self.table[out][i]
        return out

    def order(self, i):
        o, c = 1, i
        while c != 0:
            c = self.table[c][i]
            o += 1
        return o

    def class_of(self, a: FractionalIdeal) -> int:
        if self.h == 1:
            return 0
        key = (a.den, a.hnf)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        if self._genus is not None:
            c = self._genus.class_of_ideal(a)
        elif self._norm_classifier is not None:
            c = int(self._norm_classifier([int(a.integral_multiple()[1].norm)])[0])
        else:
            c = self._identify(a)
        with self._lock:
            self._cache[key] = c
        return c

    def _identify(self, a):
        A = a.integral_multiple()[1]
        A, flipped = self._reduce(A)
        for c in range(self.h):
            if is_principal(ideal_mul(A, self._inv_reps[c])):
                return self.inverse(c) if flipped else c
        raise IdealError("ideal class identification failed")

    def _reduce(self, A):
        """Integral ideal of small norm in the class of A or its inverse; returns (B, flipped)."""
        from ._lattice import lll
        k = A.field
        flipped = False
        while A.norm > 64:
            _, U = lll(A.lattice_matrix())
            best = None
            for row in U:
                x = ideal_to_element(A, row)
                nx = abs(k.norm(x))
                if nx and (best is None or nx < best[0]):
                    best = (nx, x)
            # (x) = A * B with B integral and [B] = [A]^{-1}
            B = ideal_mul(principal_ideal(best[1]), ideal_inv(A))
            if B.norm >= A.norm:
                break
            A, flipped = B, not flipped
        return A, flipped

    def class_of_many_by_norm(self, norms, extra=None):
        if self._genus is None:
            raise IdealError("norm-based classification unavailable")
        return self._genus.classes_from_norms(norms)

    def _characters(self):
        h = self.h
        gens = []
        span = {0}
        for i in sorted(range(h), key=lambda i: -self.order(i)):
            if i in span:
                continue
            gens.append(i)
            new = set(span)
            frontier = list(span)
            while frontier:
                c = frontier.pop()
                for g in gens:
                    t = self.table[c][g]
                    if t not in new:
                        new.add(t)
                        frontier.append(t)
            span = new
            if len(span) == h:
                break
        chars = []
        orders = [self.order(g) for g in gens]
        for exps in itertools.product(*[range(o) for o in orders]):
            vals = {0: 1.0 + 0j}
            ok = True
            frontier = [0]
            while frontier and ok:
                c = frontier.pop()
                for g, e, o in zip(gens, exps, orders):
                    t = self.table[c][g]
                    v = vals[c] * cmath.exp(2j * math.pi * e / o)
                    if t in vals:
                        if abs(vals[t] - v) > 1e-9:
                            ok = False
                            break
                    else:
                        vals[t] = v
                        frontier.append(t)
            if ok and len(vals) == h:
                vv = []
                for c in range(h):
                    z = vals[c]
                    zr = complex(round(z.real, 14), round(z.imag, 14))
                    vv.append(zr)
                chars.append(ClassCharacter(self, tuple(vv)))
        # trivial character first
        chars.sort(key=lambda ch: (not ch.is_trivial,))
        if len(chars) != h:
            raise IdealError("character enumeration failed")
        return chars


_CG_CACHE = {}
_CG_LOCK = threading.Lock()


def class_group(k: NumberField, bound_multiplier: float = 1.0) -> IdealClassGroup:
    key = (id(k), bound_multiplier)
    with _CG_LOCK:
        if key in _CG_CACHE:
            return _CG_CACHE[key]
    if k.d > 4:
        raise IdealError("class group only supported for degree <= 4")
    O = FractionalIdeal.unit(k)
    bound = minkowski_bound(k) * bound_multiplier
    if abs(k.discriminant) > 10 ** 7:
        raise BudgetExceeded("discriminant too large for Minkowski enumeration")
    gens = [P for P in prime_ideals_up_to(k, max(1, int(bound))) ]
    reps = [O]

    def same_class(a, b):
        return is_principal(ideal_mul(a, ideal_inv(b)))

    def find(a):
        for i, r in enumerate(reps):
            if same_class(a, r):
                return i
        return None

    for P in gens:
        # close the current set under multiplication by P
        changed = True
        while changed:
            changed = False
            for r in list(reps):
                c = ideal_mul(r, P.ideal)
                c = _small_rep(c)
                if find(c) is None:
                    reps.append(c)
                    changed = True
                    if len(reps) > 64:
                        raise BudgetExceeded("class group larger than supported")
    h = len(reps)
    table = [[0] * h for _ in range(h)]
    for i in range(h):
        for j in range(i, h):
            c = find(ideal_mul(reps[i], reps[j]))
            table[i][j] = table[j][i] = c
    # prefer small-norm integral representatives
    G = IdealClassGroup(k, reps, table)
    with _CG_LOCK:
        _CG_CACHE[key] = G
    return G


def _small_rep(a):
    """Integral ideal in the class of a with reasonably small norm."""
    A = a.integral_multiple()[1]
    return A


# ----------------------------------------------------------- genus theory

def _kron_prime_disc(D, n):
    """Value of the quadratic character of prime discriminant D at an integer n coprime to D."""
    n = np.asarray(n, dtype=np.int64)
    if D == -4:
        return np.where(n % 4 == 1, 1, -1)
    if D == 8:
        return np.where((n % 8 == 1) | (n % 8 == 7), 1, -1)
    if D == -8:
        return np.where((n % 8 == 1) | (n % 8 == 3), 1, -1)
    p = abs(D)
    r = np.ones_like(n)
    # Euler criterion n^((p-1)/2) mod p
    base = n % p
    e = (p - 1) // 2
    res = np.ones_like(n)
    while e:
        if e & 1:
            res = res * base % p
        base = base * base % p
        e >>= 1
    r = np.where(res == 1, 1, -1)
    return r


def _prime_discriminants(D):
    out = []
    m = abs(D)
    odd = []
    while m % 2 == 0:
        m //= 2
    p = 3
    mm = m
    while p * p <= mm:
        if mm % p == 0:
            odd.append(p)
            mm //= p
        p += 2
    if mm > 1:
        odd.append(mm)
    for p in odd:
        out.append(p if p % 4 == 1 else -p)
    if D % 4 == 0:
        rest = D
        for q in out:
            rest //= q
        out.append(rest)  # -4, 8 or -8
    return out


class _Genus:
    """Quadratic field whose class group equals its genus group: classes from norms."""

    def __init__(self, k, G, pdiscs, chars, lookup):
        self.k = k
        self.G = G
        self.pdiscs = pdiscs
        self.chars = chars  # list of (subset of prime discriminants, d1, d2)
        self.lookup = lookup

    def _char_values(self, n):
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        out = []
        for sub, d1, d2 in self.chars:
            val = np.ones_like(n)
            rest = n.copy()
            for q in self.pdiscs:
                p = abs(q) if q % 2 else 2
                v = np.zeros_like(n)
                while True:
                    m = rest % p == 0
                    if not m.any():
                        break
                    rest = np.where(m, rest // p, rest)
                    v += m
                # the ramified prime above p takes the value of the complementary character at p
                cv = _kron_prime_disc_composite(d2 if q in sub else d1, p)
                val = val * np.where(v % 2 == 1, cv, 1)
            val = val * _kron_prime_disc_composite_arr(d1, rest)
            out.append(val)
        return np.stack(out, axis=-1)

    def classes_from_norms(self, norms):
        vals = self._char_values(norms)
        return np.array([self.lookup[tuple(int(x) for x in row)] for row in vals], dtype=np.int64)

    def class_of_ideal(self, a):
        A = a.integral_multiple()[1]
        return int(self.classes_from_norms([int(A.norm)])[0])


def _kron_prime_disc_composite(D, n):
    return int(_kron_prime_disc_composite_arr(D, np.array([n]))[0])


def _kron_prime_disc_composite_arr(D, n):
    """Product of prime-discriminant characters making up the fundamental discriminant D."""
    n = np.asarray(n, dtype=np.int64)
    val = np.ones_like(n)
    if D == 1:
        return val
    for q in _prime_discriminants(D):
        val = val * _kron_prime_disc(q, n)
    return val


def _genus_data(k, G):
    if k.d != 2 or G.h == 1:
        return None
    D = k.discriminant
    pd = _prime_discriminants(D)
    t = len(pd)
    if 2 ** (t - 1) != G.h:
        return None
    # genus characters: chi_{d1} for products d1 of subsets of pd[1:]
    chars = []
    for r in range(1, t):
        for sub in itertools.combinations(pd[1:], r):
            d1 = 1
            for q in sub:
                d1 *= q
            chars.append((sub, d1, D // d1))
    g = _Genus(k, G, pd, chars, {})
    lookup = {}
    for c, rep in enumerate(G.representatives):
        key = tuple(int(x) for x in g._char_values([int(rep.integral_multiple()[1].norm)])[0])
        if key in lookup:
            return None
        lookup[key] = c
    g.lookup = lookup
    return g


# ------------------------------------------------------ ideal enumeration

def _products_up_to(primes, X):
    """All integral ideals with norm <= X as products of the given PrimeIdeals (each yielded once)."""
    primes = sorted(primes, key=lambda P: (P.norm, P.ideal))
    k = primes[0].ideal.field if primes else None
    out = []

    def rec(start, ideal, N):
        out.append((N, ideal))
        for i in range(start, len(primes)):
            P = primes[i]
            if N * P.norm > X:
                if P.norm > X:
                    break
                continue
            rec(i, ideal_mul(ideal, P.ideal), N * P.norm)

    if k is None:
        return out
    rec(0, FractionalIdeal.unit(k), 1)
    return out


def enumerate_ideals(k: NumberField, cls="all", anti_integral: bool = False, X: float = 1,
                     budget: int = 200_000) -> list:
    if X < 1:
        raise IdealError("norm bound must be >= 1")
    X = int(math.floor(X))
    if X > budget:
        raise BudgetExceeded("norm bound above enumeration budget")
    primes = prime_ideals_up_to(k, X)
    if not primes:
        items = [(1, FractionalIdeal.unit(k))]
    else:
        items = _products_up_to(primes, X)
    G = class_group(k) if cls != "all" else None
    out = []
    for N, I in items:
        J = ideal_inv(I) if anti_integral else I
        if G is not None and G.class_of(J) != cls:
            continue
        out.append((N, J))
    out.sort(key=lambda t: (t[0], t[1].den, t[1].hnf))
    return [J for _, J in out]


def ideal_counts(k: NumberField, X: int) -> np.ndarray:
    """counts[N, c] = number of integral ideals of norm N in class c, for N <= X."""
    X = int(X)
    G = class_group(k)
    h = G.h
    a = np.zeros((X + 1, h), dtype=np.int64)
    a[1, 0] = 1
    for item in _prime_norm_classes(k, X, G):
        q, c = item
        powers = []
        qk, ck = q, c
        while qk <= X:
            powers.append((qk, ck))
            qk *= q
            ck = G.table[ck][c]
        new = a.copy()
        perm_cache = {}
        for qk, ck in powers:
            m = X // qk
            if ck not in perm_cache:
                perm_cache[ck] = [G.table[j][ck] for j in range(h)]
            perm = perm_cache[ck]
            src = a[1:m + 1]
            blk = np.zeros_like(src)
            blk[:, perm] = src
            new[qk::qk][:m] += blk
        a = new
    return a


def _prime_norm_classes(k, X, G):
    """Yield (norm, class) for each prime ideal of norm <= X."""
    if k.d == 2 and (G.h == 1 or G._genus is not None):
        D = k.discriminant
        for p in primes_up_to(X):
            p = int(p)
            if D % p == 0:
                kind = 0
            elif p == 2:
                kind = 1 if D % 8 == 1 else -1
            else:
                kind = _kron_prime_disc_composite(D, p)
            if kind == 0:
                yield p, _class_by_norm(G, k, p)
            elif kind == 1:
                c = _class_by_norm(G, k, p)
                yield p, c
                yield p, G.inverse(c)
            elif p * p <= X:
                yield p * p, 0
        return
    theta = _theta_for_prime(k, 2) or _theta_for_prime(k, 3)
    if theta is None or (G.h > 1 and G._norm_classifier is None):
        for P in prime_ideals_up_to(k, X):
            yield P.norm, G.class_of(P.ideal)
        return
    idx = _index_of(k, theta)
    f = [int(c) for c in k.minpoly_charpoly(theta)]
    bad = abs(idx * k.discriminant)
    for p in primes_up_to(X):
        p = int(p)
        if bad % p == 0:
            for P in primes_above(k, p):
                if P.norm <= X:
                    yield P.norm, G.class_of(P.ideal)
            continue
        norms = [p ** e for e in _ddf_degrees(f, p) if p ** e <= X]
        if not norms:
            continue
        if G.h == 1:
            for q in norms:
                yield q, 0
        else:
            for q, c in zip(norms, G._norm_classifier(norms)):
                yield q, int(c)


# ----------------------------------------------------------- polynomials mod p

def _pmod(a, f, p):
    """a mod f over F_p; coefficient lists lowest degree first, f monic."""
    a = [c % p for c in a]
    df = len(f) - 1
    while len(a) - 1 >= df:
        c = a[-1]
        if c:
            shift = len(a) - 1 - df
            for i in range(df + 1):
                a[shift + i] = (a[shift + i] - c * f[i]) % p
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmulmod(a, b, f, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowmod(base, e, f, p):
    out = [1]
    while e:
        if e & 1:
            out = _pmulmod(out, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return out


def _pgcd(a, b, p):
    a = [c % p for c in a]
    b = [c % p for c in b]
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    while b:
        inv = pow(b[-1], p - 2, p)
        bm = [c * inv % p for c in b]
        a = _pmod(a, bm, p)
        a, b = b, a
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [c * inv % p for c in a]
    return a


def _pdiv(a, b, p):
    """Exact quotient a / b over F_p (b monic)."""
    a = [c % p for c in a]
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        c = a[-1]
        shift = len(a) - len(b)
        q[shift] = c
        for i in range(len(b)):
            a[shift + i] = (a[shift + i] - c * b[i]) % p
        a.pop()
    return q


def _ddf_degrees(f_high, p):
    """Degrees of the irreducible factors of a squarefree monic integer polynomial mod p."""
    f = [c % p for c in reversed(f_high)]
    out = []
    h = [0, 1]
    i = 0
    while len(f) - 1 >= 2 * (i + 1):
        i += 1
        h = _ppowmod(h, p, f, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        g = _pgcd(f, diff, p)
        dg = len(g) - 1
        if dg > 0:
            out.extend([i] * (dg // i))
            f = _pdiv(f, g, p)
            h = _pmod(h, f, p)
    if len(f) - 1 > 0:
        out.append(len(f) - 1)
    return out


def install_norm_classifier(ext) -> bool:
    """Classify ideals of E by their absolute norm when Cl_E injects into Cl_F via N_{E/F}.

    The F-class of N_{E/F}(𝔄) is read off from N_{E/Q}(𝔄) by genus theory on F.
    """
    E, F = ext.E, ext.F
    GE = class_group(E)
    if GE.h == 1 or GE._genus is not None or GE._norm_classifier is not None:
        return True
    GF = class_group(F)
    if GF._genus is None:
        return False
    images = [int(GF._genus.classes_from_norms([int(r.integral_multiple()[1].norm)])[0])
              for r in GE.representatives]
    if len(set(images)) != GE.h:
        return False
    back = {img: c for c, img in enumerate(images)}
    lut = np.array([back.get(c, -1) for c in range(GF.h)])

    def classify(norms):
        out = lut[GF._genus.classes_from_norms(norms)]
        if np.any(out < 0):
            raise IdealError("norm class outside the image of Cl_E")
        return out

    GE._norm_classifier = classify
    GE._cache.clear()
    return True


def _class_by_norm(G, k, p):
    if G.h == 1:
        return 0
    if G._genus is not None:
        return int(G._genus.classes_from_norms([p])[0])
    return G.class_of(primes_above(k, p)[0].ideal)


# --------------------------------------------------------------- lattices

@dataclass(frozen=True)
class OFLattice:
    """L = 𝔞_1 ⊕ ... ⊕ 𝔞_n inside F^n."""

    ideals: tuple

    @property
    def n(self) -> int:
        return len(self.ideals)

    @property
    def field(self):
        return self.ideals[0].field

    def contains(self, x) -> bool:
        return all(I.contains(c) for I, c in zip(self.ideals, x))

    def z_basis(self):
        """Z-basis of L as vectors of FieldElements."""
        k = self.field
        out = []
        for i, I in enumerate(self.ideals):
            for r in I.basis:
                v = [k.zero] * self.n
                v[i] = FieldElement(k, r)
                out.append(v)
        return out


def content_ideal(x, L: OFLattice) -> FractionalIdeal:
    """The anti-integral ideal {α ∈ F : αx ∈ L}, i.e. ∩ x_i^{-1} 𝔞_i."""
    k = L.field
    parts = []
    for xi, I in zip(x, L.ideals):
        if not isinstance(xi, FieldElement):
            xi = k.from_rational(xi)
        if xi.is_zero():
            continue
        parts.append(ideal_mul(principal_ideal(xi), ideal_inv(I)))
    if not parts:
        raise IdealError("content of the zero vector")
    inv = parts[0]
    for P in parts[1:]:
        inv = ideal_add(inv, P)
    return ideal_inv(inv)


def decompose_lattice_points(L: OFLattice, norm_bound: float, budget: int = 100_000) -> dict:
    """Classify the nonzero lattice points with T2 length^2 <= norm_bound by content ideal."""
    k = L.field
    basis = L.z_basis()
    rows = []
    for v in basis:
        rows.append(np.concatenate([k.real_basis_matrix(np.array([[float(c) for c in e.c]]))[0] for e in v]))
    M = np.array(rows)
    C = short_vectors(M, norm_bound)
    if len(C) > budget:
        raise BudgetExceeded("too many lattice points")
    groups = {}
    for c in C:
        x = [sum((int(t) * v[i] for t, v in zip(c, basis)), k.zero) for i in range(L.n)]
        a = content_ideal(x, L)
        if not a.is_anti_integral():
            raise IdealError("content ideal is not anti-integral")
        y = [e * 1 for e in x]
        groups.setdefault(a, []).append(tuple(y))
    return groups
