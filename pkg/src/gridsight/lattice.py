"""Integer lattices attached to parallelotopes, LLL, and lattice antichains.

The lattice ``L_P`` spanned by ``(t_1, ..., t_{d-1}, 1)`` and ``p e_1, ..., p e_{d-1}``
meets ``[0, p)^d`` exactly in the multiples ``k t mod p``.  A flat piece of it
whose normal has constant sign is an antichain of the visibility poset.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .modular import ResidueVector, symmetric_residue
from .poset import build_s_poset, validate_antichain

log = logging.getLogger(__name__)


class DegenerateBasisError(ValueError):
    pass


class NoInteriorPointError(LookupError):
    pass


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def bareiss_det(rows) -> int:
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class IntegerLattice:
    basis: tuple[tuple[int, ...], ...]
    p: int | None = None
    t: ResidueVector | None = None

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(tuple(int(x) for x in r) for r in self.basis))
        if bareiss_det(self.basis) == 0:
            raise DegenerateBasisError("basis rows are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.basis)


def parallelotope_lattice(t: ResidueVector) -> IntegerLattice:
    rows = [t.full]
    for i in range(t.d - 1):
        rows.append(tuple(t.p if j == i else 0 for j in range(t.d)))
    return IntegerLattice(tuple(rows), t.p, t)


def covolume(L: IntegerLattice) -> int:
    det = bareiss_det(L.basis)
    if det == 0:
        raise DegenerateBasisError("zero determinant")
    return abs(det)


def in_lattice(L: IntegerLattice, v) -> bool:
    """Membership test via Cramer's rule."""
    det = bareiss_det(L.basis)
    n = L.dim
    for i in range(n):
        rows = [list(r) for r in L.basis]
        rows[i] = list(v)
        if bareiss_det(rows) % det:
            return False
    return True


# -- LLL -------------------------------------------------------------------------

def gram_schmidt(basis):
    """Unnormalised Gram-Schmidt over the rationals: ``(b*, mu)``."""
    n = len(basis)
    bstar, mu = [], [[Fraction(0)] * n for _ in range(n)]
    for i, b in enumerate(basis):
        v = [Fraction(x) for x in b]
        for j in range(i):
            mu[i][j] = Fraction(_dot(b, bstar[j])) / _dot(bstar[j], bstar[j])
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        mu[i][i] = Fraction(1)
        bstar.append(v)
    return bstar, mu


@dataclass
class ReducedBasis:
    vectors: list[tuple[int, ...]]
    gram_schmidt: list[list[Fraction]]
    mu: list[list[Fraction]]
    delta: Fraction = Fraction(3, 4)

    def size_reduced(self) -> bool:
        return all(abs(self.mu[i][j]) <= Fraction(1, 2)
                   for i in range(len(self.vectors)) for j in range(i))

    def lovasz(self) -> bool:
        bs = self.gram_schmidt
        for i in range(1, len(bs)):
            lhs = _dot(bs[i], bs[i]) + self.mu[i][i - 1] ** 2 * _dot(bs[i - 1], bs[i - 1])
            if lhs < self.delta * _dot(bs[i - 1], bs[i - 1]):
                return False
        return True

    def norm_product_squared(self) -> int:
        return math.prod(_dot(v, v) for v in self.vectors)

    def norms(self) -> list[float]:
        return [math.sqrt(_dot(v, v)) for v in self.vectors]


def lll_reduce(L: IntegerLattice, delta: Fraction = Fraction(3, 4)) -> ReducedBasis:
    """Textbook LLL in exact rational arithmetic.

    The result is checked for both reduction conditions, for unchanged
    covolume, and for ``d(L) <= prod |b_i| <= 2^(n(n-1)/4) d(L)`` (compared
    squared, in integers).
    """
    b = [list(r) for r in L.basis]
    n = len(b)
    bstar, mu = gram_schmidt(b)
    B = [_dot(v, v) for v in bstar]
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = math.floor(mu[k][j] + Fraction(1, 2))
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for i in range(j + 1):
                    mu[k][i] -= q * mu[j][i]
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bstar, mu = gram_schmidt(b)
            B = [_dot(v, v) for v in bstar]
            k = max(k - 1, 1)

    bstar, mu = gram_schmidt(b)
    red = ReducedBasis([tuple(v) for v in b], bstar, mu, delta)
    vol = covolume(L)
    if not (red.size_reduced() and red.lovasz()):
        raise AssertionError("LLL output violates the reduction conditions")
    if abs(bareiss_det(red.vectors)) != vol:
        raise AssertionError("LLL changed the covolume")
    prod2 = red.norm_product_squared()
    # (2^(n(n-1)/4))^2 = 2^(n(n-1)/2); n(n-1) is even
    if not vol * vol <= prod2 <= 2 ** (n * (n - 1) // 2) * vol * vol:
        raise AssertionError("norm product outside the LLL bound")
    return red


# -- small vectors by pigeonhole (d = 3) ---------------------------------------------

def icbrt(x: int) -> int:
    """floor(x ** (1/3)) for x >= 0, exact."""
    r = int(round(x ** (1 / 3)))
    while r ** 3 > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def reduce_symmetric(v, p: int) -> tuple[int, ...]:
    return tuple(symmetric_residue(x, p) for x in v)


def sup_norm(v) -> int:
    return max(abs(x) for x in v)


def is_multiple_of_t(v, t: ResidueVector) -> bool:
    """True iff v is congruent mod p to ``j * t`` for some integer j (L_P membership)."""
    j = v[-1] % t.p
    return all((x - j * c) % t.p == 0 for x, c in zip(v, t.full))


def _buckets(t: ResidueVector, m: int):
    p = t.p
    buckets: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for k in range(p):
        pt = t.multiple(k)
        key = tuple(x * m // p for x in pt)
        buckets.setdefault(key, []).append(pt)
    return buckets


def small_vector_3d(t: ResidueVector) -> tuple[int, ...]:
    """A short difference of two multiples of t, found by pigeonhole.

    The p multiples fall into ``m^3 < p`` cells (``m = floor(p^(1/3))``), so the
    first cell to receive a second point yields a vector with every
    coordinate below the cell side ``p/m``.
    """
    if t.d != 3:
        raise ValueError("small_vector_3d needs d = 3")
    p = t.p
    m = max(1, icbrt(p))
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    for k in range(p):
        pt = t.multiple(k)
        key = tuple(x * m // p for x in pt)
        if key in seen:
            v = reduce_symmetric(tuple(a - b for a, b in zip(pt, seen[key])), p)
            assert sup_norm(v) <= -(-p // m)
            return v
        seen[key] = pt
    raise AssertionError("pigeonhole failed")  # unreachable: m^3 < p for prime p


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def parallel(u, v) -> bool:
    return not any(_cross(u, v))


@dataclass(frozen=True)
class PairResult:
    v1: tuple[int, ...]
    v2: tuple[int, ...]
    s1: int
    s2: int
    fallback: bool

    @property
    def product(self) -> int:
        return self.s1 * self.s2


def _best_independent(diffs, v1):
    cands = [d for d in diffs if not parallel(d, v1)]
    return min(cands, key=sup_norm) if cands else None


def independent_pair_3d(t: ResidueVector) -> PairResult:
    """Two independent short vectors of L_P whose sup-norms multiply to O(p^(4/3))."""
    if t.d != 3:
        raise ValueError("independent_pair_3d needs d = 3")
    p = t.p
    v1 = small_vector_3d(t)
    s1 = sup_norm(v1)
    k = math.ceil(p / s1 ** 1.5) + 1
    m = max(1, icbrt(p // k)) if k <= p else 1
    v2 = None
    for key, pts in sorted(_buckets(t, m).items()):
        if len(pts) < k + 1:
            continue
        diffs = [reduce_symmetric(tuple(a - b for a, b in zip(x, y)), p)
                 for x, y in itertools.combinations(pts, 2)]
        v2 = _best_independent(diffs, v1)
        if v2 is not None:
            break
    fallback = v2 is None
    if fallback:
        # every lattice vector with coordinates in (-p, p): each coordinate of
        # j*t mod p either as is or shifted down by p
        diffs = []
        for j in range(p):
            base = t.multiple(j)
            for shift in itertools.product((0, 1), repeat=3):
                v = tuple(x - p * s for x, s in zip(base, shift))
                if any(v):
                    diffs.append(v)
        v2 = _best_independent(diffs, v1)
    return PairResult(v1, v2, s1, sup_norm(v2), fallback)


# -- interior points and lattice enumeration --------------------------------------------

def central_region_3d(p: int) -> tuple[Fraction, Fraction]:
    return Fraction(p, 6), Fraction(5 * p, 6)


def central_region(p: int, d: int) -> tuple[Fraction, Fraction]:
    return Fraction(p, 2 * d), Fraction(p * (2 * d - 1), 2 * d)


def interior_point(t: ResidueVector, region=None) -> tuple[int, ...]:
    """First multiple ``k t mod p`` (scanning k upward) inside the closed box ``[lo, hi]^d``."""
    lo, hi = region if region is not None else (
        central_region_3d(t.p) if t.d == 3 else central_region(t.p, t.d))
    for k in range(t.p):
        pt = t.multiple(k)
        if all(lo <= x <= hi for x in pt):
            return pt
    raise NoInteriorPointError(f"no multiple of {t.full} mod {t.p} inside [{lo}, {hi}]^{t.d}")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def enumerate_affine(origin, vectors, p: int) -> list[tuple[int, ...]]:
    """All points ``origin + sum c_i v_i`` (integer c) inside ``[0, p)^d``.

    Outer coefficients are bounded through the inverse of the best-conditioned
    square minor (``|x_J - origin_J| < p`` on the chosen coordinates); the last
    coefficient is solved exactly as an interval per coordinate.
    """
    d = len(origin)
    vectors = [tuple(v) for v in vectors]
    r = len(vectors)
    if r == 0:
        return [tuple(origin)] if all(0 <= x < p for x in origin) else []
    best_cols, best_det = None, 0
    for cols in itertools.combinations(range(d), r):
        det = bareiss_det([[v[c] for c in cols] for v in vectors])
        if abs(det) > abs(best_det):
            best_cols, best_det = cols, det
    if best_det == 0:
        raise DegenerateBasisError("vectors are linearly dependent")
    # rows of inv(M^T): coefficient c_i = sum_j inv[i][j] * (x_j - origin_j)
    M = [[Fraction(vectors[i][c]) for i in range(r)] for c in best_cols]
    inv = _invert(M)
    bounds = [math.floor(sum(abs(x) for x in row) * p) for row in inv]

    out = []
    last = vectors[-1]
    for head in itertools.product(*(range(-b, b + 1) for b in bounds[:-1])):
        y = list(origin)
        for c, v in zip(head, vectors):
            for i in range(d):
                y[i] += c * v[i]
        lo, hi = -bounds[-1], bounds[-1]
        for i in range(d):
            if last[i] == 0:
                if not 0 <= y[i] < p:
                    lo, hi = 1, 0
                    break
            elif last[i] > 0:
                lo = max(lo, _ceil_div(-y[i], last[i]))
                hi = min(hi, (p - 1 - y[i]) // last[i])
            else:
                lo = max(lo, _ceil_div(p - 1 - y[i], last[i]))
                hi = min(hi, (-y[i]) // last[i])
        for c in range(lo, hi + 1):
            out.append(tuple(y[i] + c * last[i] for i in range(d)))
    return out


def _invert(M):
    n = len(M)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def integer_nullspace(rows, d: int) -> list[tuple[int, ...]]:
    """Integer basis of ``{x : r . x = 0 for every row r}`` via exact RREF."""
    a = [[Fraction(x) for x in r] for r in rows]
    pivots, r = [], 0
    for c in range(d):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(d) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * d
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -a[i][f]
        den = math.lcm(*(x.denominator for x in v))
        iv = [int(x * den) for x in v]
        g = math.gcd(*iv)
        basis.append(tuple(x // g for x in iv))
    return basis


def _normal(vectors, d: int) -> tuple[int, ...]:
    """An integer normal to the span, preferring one with no zero entries."""
    if d == 3 and len(vectors) == 2:
        n = _cross(*vectors)
        g = math.gcd(*n)
        return tuple(x // g for x in n)
    null = integer_nullspace(vectors, d)
    if len(null) == 1:
        return null[0]
    # deterministic search for a combination with every entry nonzero
    for scale in range(1, 64):
        coeffs = [scale ** i for i in range(len(null))]
        n = tuple(sum(c * v[i] for c, v in zip(coeffs, null)) for i in range(d))
        if all(n):
            return n
    return null[0]


def orient_normal(n) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Sign flips (over the first d-1 axes) making every entry of n nonnegative.

    The last axis cannot be flipped, so the normal is first negated globally
    if its last entry is negative (or zero with a negative leading entry).
    """
    n = tuple(n)
    lead = n[-1] if n[-1] != 0 else next((x for x in n if x != 0), 0)
    if lead < 0:
        n = tuple(-x for x in n)
    signs = tuple(-1 if x < 0 else 1 for x in n[:-1])
    oriented = tuple(abs(x) for x in n[:-1]) + (n[-1],)
    return signs, oriented


def flip_vector(v, signs, p: int | None = None):
    """Negate coordinates with sign -1; with ``p`` given, reflect points ``x -> p - x``."""
    out = []
    for i, x in enumerate(v):
        s = signs[i] if i < len(signs) else 1
        if s > 0:
            out.append(x)
        else:
            out.append(p - x if p is not None else -x)
    return tuple(out)


@dataclass
class LatticeAntichain:
    t: ResidueVector
    signs: tuple[int, ...]
    indices: tuple[int, ...]          # k values == indices in build_s_poset(t, signs)
    points: list[tuple[int, ...]]
    origin: tuple[int, ...]
    vectors: list[tuple[int, ...]]
    normal: tuple[int, ...]
    basis: list[tuple[int, ...]] = field(default_factory=list)

    def __len__(self):
        return len(self.indices)


def antichain_from_lattice(t: ResidueVector) -> LatticeAntichain:
    """A flat slab of ``L_P`` through a central point, mapped into the family
    member whose sign choice makes the slab's normal one-signed."""
    p, d = t.p, t.d
    basis: list[tuple[int, ...]] = []
    if d == 3:
        pair = independent_pair_3d(t)
        vectors = [pair.v1, pair.v2]
        origin = interior_point(t, central_region_3d(p))
    else:
        red = lll_reduce(parallelotope_lattice(t))
        basis = sorted(red.vectors, key=lambda v: _dot(v, v))
        limit2 = Fraction(p, 2 * d) ** 2
        vectors = []
        for v in basis[: d - 1]:
            if _dot(v, v) > limit2:
                break
            vectors.append(v)
        origin = interior_point(t, central_region(p, d))

    normal = _normal(vectors, d) if vectors else (1,) * d
    signs, oriented = orient_normal(normal)
    f_origin = flip_vector(origin, signs, p)
    f_vectors = [flip_vector(v, signs) for v in vectors]
    points = enumerate_affine(f_origin, f_vectors, p) if vectors else [f_origin]
    indices = tuple(sorted(pt[-1] for pt in points))
    if not points:
        log.warning("empty lattice slab for t=%s", t.full)
    P = build_s_poset(t, signs)
    for pt in points:
        assert P.elements[pt[-1]].coords == pt, "slab point is not in the signed poset"
    validate_antichain(P, indices)
    return LatticeAntichain(t, signs, indices, sorted(points, key=lambda x: x[-1]),
                            origin, vectors, oriented, basis)
