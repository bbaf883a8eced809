"""Exact visibility among unit cubes in a grid.

Blockers are open cube interiors; endpoints live on closed surfaces, so a
segment that only grazes a face, edge or corner is not blocked.  Every
predicate works in exact rationals or scaled integers.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .modular import ResidueVector
from .poset import Poset, PosetElement, build_s_poset, primitive_heights, width_exact

MAX_EXACT_2D = 64


# -- configurations --------------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    """Obstructing unit cubes (integer corners) in ``[0, n)^d``; the observer is the origin cube."""

    n: int
    d: int
    cubes: frozenset

    def __post_init__(self):
        cubes = frozenset(tuple(int(x) for x in c) for c in self.cubes)
        object.__setattr__(self, "cubes", cubes)
        if self.d < 2:
            raise ValueError("d must be >= 2")
        for c in cubes:
            if len(c) != self.d or not all(0 <= x < self.n for x in c):
                raise ValueError(f"cube {c} outside [0, {self.n})^{self.d}")
        if (0,) * self.d in cubes:
            raise ValueError("the observer cube cannot be obstructing")

    @property
    def observer(self) -> tuple[int, ...]:
        return (0,) * self.d

    def to_dict(self) -> dict:
        return {"n": self.n, "d": self.d, "cubes": [list(c) for c in sorted(self.cubes)]}

    @classmethod
    def from_dict(cls, data: dict) -> "Configuration":
        return cls(int(data["n"]), int(data["d"]), frozenset(tuple(c) for c in data["cubes"]))

    @classmethod
    def load(cls, path) -> "Configuration":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")


@dataclass(frozen=True)
class Parallelotope:
    """Parallelotope through the origin with characteristic vertex ``(t_1, ..., t_{d-1}, p)``."""

    vertex: tuple[int, ...]

    def __post_init__(self):
        p = self.vertex[-1]
        if p < 1 or not all(0 <= x <= p - 1 for x in self.vertex[:-1]):
            raise ValueError(f"bad characteristic vertex {self.vertex}")

    @classmethod
    def of(cls, t: ResidueVector) -> "Parallelotope":
        return cls(t.coords + (t.p,))

    @property
    def p(self) -> int:
        return self.vertex[-1]

    @property
    def d(self) -> int:
        return len(self.vertex)

    def edge(self):
        """The lateral edge E_P from the origin to the characteristic vertex."""
        return (0,) * self.d, self.vertex

    def side_line(self):
        """Line from ``(1, ..., 1, 0)`` to the characteristic vertex."""
        return (1,) * (self.d - 1) + (0,), self.vertex


# -- exact segment / box primitives ----------------------------------------------

def _param_interval(a, b, lo, hi, open_box: bool):
    """Parameters s in R with ``a + s (b - a)`` inside the box, as (lo, hi) or None."""
    s_lo, s_hi = None, None
    for ai, bi, l, h in zip(a, b, lo, hi):
        di = bi - ai
        if di == 0:
            inside = (l < ai < h) if open_box else (l <= ai <= h)
            if not inside:
                return None
            continue
        t0, t1 = Fraction(l - ai) / di, Fraction(h - ai) / di
        if t0 > t1:
            t0, t1 = t1, t0
        s_lo = t0 if s_lo is None else max(s_lo, t0)
        s_hi = t1 if s_hi is None else min(s_hi, t1)
    return s_lo, s_hi


def segment_hits_open_box(a, b, lo, hi) -> bool:
    """Does the open segment ``(a, b)`` meet the open box ``(lo, hi)``?"""
    iv = _param_interval(a, b, lo, hi, open_box=True)
    if iv is None:
        return False
    s_lo, s_hi = iv
    if s_lo is None:  # a == b, a point inside the open box
        return False
    return max(s_lo, Fraction(0)) < min(s_hi, Fraction(1))


def segment_meets_closed_box(a, b, lo, hi) -> bool:
    """Does the closed segment ``[a, b]`` meet the closed (possibly flat) box?"""
    iv = _param_interval(a, b, lo, hi, open_box=False)
    if iv is None:
        return False
    s_lo, s_hi = iv
    if s_lo is None:
        return True
    return max(s_lo, Fraction(0)) <= min(s_hi, Fraction(1))


def _cube_box(c):
    return tuple(c), tuple(x + 1 for x in c)


def segment_blocked(a, b, cubes, exclude=()) -> bool:
    ex = set(exclude)
    for c in cubes:
        if c in ex:
            continue
        lo, hi = _cube_box(c)
        if segment_hits_open_box(a, b, lo, hi):
            return True
    return False


# -- restricted-direction model --------------------------------------------------

def project_corner(k: int, t: ResidueVector) -> tuple[Fraction, ...]:
    """Image on the observer face of the height-k face corner, sliding along E_P."""
    if not 0 <= k < t.p:
        raise ValueError(f"k must lie in [0, {t.p}), got {k}")
    p = t.p
    return tuple(1 - Fraction((c * k) % p, p) for c in t.coords) + (Fraction(0),)


@dataclass
class RestrictedVisibility:
    t: ResidueVector
    visible: frozenset
    blocks: np.ndarray  # blocks[k2, k1]: face k2 hides face k1

    def __len__(self):
        return len(self.visible)


def restricted_visible_set(t: ResidueVector) -> RestrictedVisibility:
    """Largest set of faces along E_P seen together under lines of sight parallel to E_P.

    Face k2 hides face k1 iff every entry of ``(1 - {t_i k2/p}, ..., p - k2)``
    strictly exceeds the matching entry for k1.
    """
    p = t.p
    triples = []
    for k in range(p):
        proj = project_corner(k, t)
        triples.append(tuple(proj[:-1]) + (Fraction(p - k),))
    blocks = np.zeros((p, p), dtype=bool)
    for k2, k1 in itertools.permutations(range(p), 2):
        blocks[k2, k1] = all(a > b for a, b in zip(triples[k2], triples[k1]))
    # negated triples: "k2 hides k1" becomes k2 < k1 in product order
    P = Poset([PosetElement(tuple(-x for x in tr), k) for k, tr in enumerate(triples)], t.d)
    assert np.array_equal(P.less, blocks)
    w = width_exact(P)
    visible = frozenset(P.elements[i].k_index for i in w.antichain.indices)
    for a, b in itertools.combinations(visible, 2):
        assert not blocks[a, b] and not blocks[b, a]
    return RestrictedVisibility(t, visible, blocks)


def cube_at_height(t: ResidueVector, k: int) -> tuple[int, ...]:
    """Corner of the cube whose bottom facet E_P crosses at height k."""
    p = t.p
    return tuple((c * k) // p for c in t.coords) + (k,)


def check_cube_on_edge(t: ResidueVector, k: int) -> bool:
    """E_P passes through the cube's interior and its bottom facet."""
    corner = cube_at_height(t, k)
    lo, hi = _cube_box(corner)
    a, b = Parallelotope.of(t).edge()
    facet_hi = hi[:-1] + (lo[-1],)
    return segment_hits_open_box(a, b, lo, hi) and segment_meets_closed_box(a, b, lo, facet_hi)


# -- primitive obstructions ------------------------------------------------------

@dataclass(frozen=True)
class Facet:
    """Bottom facet ``[c, c+1]^{d-1} x {k}`` of the cube with corner ``(c, k)``."""

    corner: tuple[int, ...]
    height: int

    def box(self, open_sides: bool = False):
        lo = tuple(self.corner) + (self.height,)
        hi = tuple(x + 1 for x in self.corner) + (self.height,)
        return lo, hi


def _line_meets_facet(a, b, facet: Facet, open_sides: bool) -> bool:
    """Line through a, b at the facet's height, tested against the facet (open or closed sides)."""
    k = facet.height
    if b[-1] == a[-1]:
        raise ValueError("line is parallel to the facet plane")
    s = Fraction(k - a[-1], b[-1] - a[-1])
    pt = [a[i] + s * (b[i] - a[i]) for i in range(len(a) - 1)]
    if open_sides:
        return all(c < x < c + 1 for x, c in zip(pt, facet.corner))
    return all(c <= x <= c + 1 for x, c in zip(pt, facet.corner))


def is_primitive_obstruction(facet: Facet, P: Parallelotope) -> bool:
    """Facet meets E_P and the ``(1, ..., 1, 0)`` line crosses its open interior."""
    a, b = P.edge()
    lo, hi = facet.box()
    if not segment_meets_closed_box(a, b, lo, hi):
        raise ValueError(f"facet {facet} does not meet E_P")
    s, v = P.side_line()
    return _line_meets_facet(s, v, facet, open_sides=True)


def is_primitive_by_definition(facet: Facet, P: Parallelotope) -> bool:
    """Facet meets E_P and no line to a vertex with one ``t_i`` lowered by 1 touches it."""
    a, b = P.edge()
    lo, hi = facet.box()
    if not segment_meets_closed_box(a, b, lo, hi):
        raise ValueError(f"facet {facet} does not meet E_P")
    origin = (0,) * P.d
    for i in range(P.d - 1):
        w = list(P.vertex)
        w[i] -= 1
        if _line_meets_facet(origin, tuple(w), facet, open_sides=False):
            return False
    return True


def facet_at_height(t: ResidueVector, k: int) -> Facet:
    c = cube_at_height(t, k)
    return Facet(c[:-1], k)


def geometric_primitive_heights(t: ResidueVector, form: str = "proposition") -> list[int]:
    P = Parallelotope.of(t)
    test = is_primitive_obstruction if form == "proposition" else is_primitive_by_definition
    return [k for k in range(1, t.p) if test(facet_at_height(t, k), P)]


def primitive_scan_agrees(t: ResidueVector) -> bool:
    arith = primitive_heights(t)
    return geometric_primitive_heights(t, "proposition") == arith == \
        geometric_primitive_heights(t, "definition")


# -- shallow-angle blocking ------------------------------------------------------

_SIN2 = {0: Fraction(0), 30: Fraction(1, 4), 45: Fraction(1, 2), 60: Fraction(3, 4), 90: Fraction(1)}


def sin_squared(theta_deg) -> Fraction:
    """Exact for the usual angles, otherwise a close rational."""
    if theta_deg in _SIN2:
        return _SIN2[theta_deg]
    return Fraction(math.sin(math.radians(theta_deg)) ** 2).limit_denominator(10 ** 12)


def shallow_blocks(direction, normal_axis: int, theta_deg=45) -> bool:
    """Angle between the direction and the facet normal is at most ``90 - theta`` degrees.

    Compared as ``dir_i^2 / |dir|^2 >= sin^2(theta)``.
    """
    norm2 = sum(Fraction(x) ** 2 for x in direction)
    if norm2 == 0:
        raise ValueError("zero direction")
    return Fraction(direction[normal_axis]) ** 2 >= sin_squared(theta_deg) * norm2


def shallow_parallelotope_ok(P: Parallelotope, theta_deg=45) -> bool:
    """Keep parallelotopes with ``t_i <= p / tan(theta)``."""
    if theta_deg == 45:
        return all(x <= P.p for x in P.vertex[:-1])
    return all(x <= P.p / math.tan(math.radians(theta_deg)) for x in P.vertex[:-1])


def _crossing_axes(a, b, lo, hi):
    """Axes of the facets through which the segment enters and leaves an open box."""
    best_in, ax_in, best_out, ax_out = None, None, None, None
    for i, (ai, bi, l, h) in enumerate(zip(a, b, lo, hi)):
        di = bi - ai
        if di == 0:
            continue
        t0, t1 = Fraction(l - ai) / di, Fraction(h - ai) / di
        if t0 > t1:
            t0, t1 = t1, t0
        if best_in is None or t0 > best_in:
            best_in, ax_in = t0, i
        if best_out is None or t1 < best_out:
            best_out, ax_out = t1, i
    axes = set()
    if best_in is not None and best_in > 0:
        axes.add(ax_in)
    if best_out is not None and best_out < 1:
        axes.add(ax_out)
    return axes


def segment_blocked_shallow(a, b, cubes, theta_deg, exclude=()) -> bool:
    ex = set(exclude)
    direction = tuple(y - x for x, y in zip(a, b))
    for c in cubes:
        if c in ex:
            continue
        lo, hi = _cube_box(c)
        if segment_hits_open_box(a, b, lo, hi):
            if any(shallow_blocks(direction, ax, theta_deg) for ax in _crossing_axes(a, b, lo, hi)):
                return True
    return False


# -- exact 2-D oracle ----------------------------------------------------------

def _lines_through(points, observer_hi: int = 1):
    """Distinct lines ax + by = c through two of the points that meet the observer square."""
    seen = set()
    pts = sorted(set(points))
    for (x1, y1), (x2, y2) in itertools.combinations(pts, 2):
        a, b = y2 - y1, x1 - x2
        g = math.gcd(a, b)
        a, b = a // g, b // g
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        c = a * x1 + b * y1
        if (a, b, c) in seen:
            continue
        vals = [a * x + b * y for x in (0, observer_hi) for y in (0, observer_hi)]
        if min(vals) <= c <= max(vals):
            seen.add((a, b, c))
    return sorted(seen)


def visible_2d_exact(c: Configuration) -> frozenset:
    """Visible squares, decided on every line through two corners of the scene.

    Along each line all breakpoints are integers after scaling by the
    direction's lcm, so the free-interval test is pure integer arithmetic.
    """
    if c.d != 2:
        raise ValueError("visible_2d_exact needs d = 2")
    if c.n > MAX_EXACT_2D:
        raise ValueError(f"n = {c.n} exceeds {MAX_EXACT_2D}")
    squares = sorted(c.cubes)
    if not squares:
        return frozenset()
    corners = {(x + dx, y + dy) for (x, y) in squares + [(0, 0)] for dx in (0, 1) for dy in (0, 1)}
    sq = np.array(squares, dtype=np.int64)
    visible: set = set()
    for a, b, cc in _lines_through(corners):
        # integer point A on the line and primitive direction D = (-b, a)
        x0, y0 = _solve_line(a, b, cc)
        dx, dy = -b, a
        L = abs(dx * dy) // math.gcd(dx, dy) if dx and dy else max(abs(dx), abs(dy))
        lo, hi = _scaled_intervals(x0, y0, dx, dy, L, sq[:, 0], sq[:, 0] + 1, sq[:, 1], sq[:, 1] + 1)
        olo, ohi = _scaled_closed(x0, y0, dx, dy, L, 0, 1, 0, 1)
        if olo is None:
            continue
        hit = lo < hi
        for idx in np.flatnonzero(_touches_closed(x0, y0, dx, dy, L, sq)):
            target = squares[idx]
            if target in visible:
                continue
            glo, ghi = _scaled_closed(x0, y0, dx, dy, L, target[0], target[0] + 1, target[1], target[1] + 1)
            if max(olo, glo) <= min(ohi, ghi):
                visible.add(target)
                continue
            u_, v_ = (ohi, glo) if ohi < glo else (ghi, olo)
            mask = hit & (lo < v_) & (hi > u_)
            mask[idx] = False
            if not mask.any():
                visible.add(target)
    return frozenset(visible)


def _egcd(a: int, b: int):
    """(g, u, v) with a u + b v = g = gcd(a, b) >= 0."""
    u0, v0, u1, v1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    if a < 0:
        return -a, -u0, -v0
    return a, u0, v0


def _solve_line(a: int, b: int, c: int):
    g, u, v = _egcd(a, b)
    assert g == 1
    return u * c, v * c


def _axis_interval(a0, d, L, lo, hi):
    """Scaled open parameter interval for ``lo < a0 + s d < hi`` (d != 0), vectorised."""
    t0 = (lo - a0) * (L // d)
    t1 = (hi - a0) * (L // d)
    return np.minimum(t0, t1), np.maximum(t0, t1)


def _scaled_intervals(x0, y0, dx, dy, L, xlo, xhi, ylo, yhi):
    n = len(xlo)
    lo = np.full(n, -(1 << 60), dtype=np.int64)
    hi = np.full(n, 1 << 60, dtype=np.int64)
    for a0, d, l, h in ((x0, dx, xlo, xhi), (y0, dy, ylo, yhi)):
        if d == 0:
            inside = (l < a0) & (a0 < h)
            hi = np.where(inside, hi, lo)  # empty when outside
            continue
        t0, t1 = _axis_interval(a0, d, L, l, h)
        lo, hi = np.maximum(lo, t0), np.minimum(hi, t1)
    return lo, hi


def _scaled_closed(x0, y0, dx, dy, L, xl, xh, yl, yh):
    lo, hi = -(1 << 60), 1 << 60
    for a0, d, l, h in ((x0, dx, xl, xh), (y0, dy, yl, yh)):
        if d == 0:
            if not l <= a0 <= h:
                return None, None
            continue
        t0, t1 = (l - a0) * (L // d), (h - a0) * (L // d)
        lo, hi = max(lo, min(t0, t1)), min(hi, max(t0, t1))
    if lo > hi:
        return None, None
    return lo, hi


def _touches_closed(x0, y0, dx, dy, L, sq):
    lo = np.full(len(sq), -(1 << 60), dtype=np.int64)
    hi = np.full(len(sq), 1 << 60, dtype=np.int64)
    ok = np.ones(len(sq), dtype=bool)
    for a0, d, l in ((x0, dx, sq[:, 0]), (y0, dy, sq[:, 1])):
        if d == 0:
            ok &= (l <= a0) & (a0 <= l + 1)
            continue
        t0, t1 = _axis_interval(a0, d, L, l, l + 1)
        lo, hi = np.maximum(lo, t0), np.minimum(hi, t1)
    return ok & (lo <= hi)


def visible_2d_dense(c: Configuration, resolution: int = 4) -> frozenset:
    """Dumb oracle: segments between boundary points on a ``1/resolution`` mesh."""
    if c.d != 2:
        raise ValueError("needs d = 2")
    squares = sorted(c.cubes)

    def boundary(x, y):
        pts = set()
        for i in range(resolution + 1):
            f = Fraction(i, resolution)
            pts.update({(x + f, y), (x + f, y + 1), (x, y + f), (x + 1, y + f)})
        return sorted(pts)

    obs = boundary(0, 0)
    out = set()
    for target in squares:
        for a in obs:
            if any(not segment_blocked(a, b, squares, exclude=(target,)) for b in boundary(*target)):
                out.add(target)
                break
    return frozenset(out)


# -- sampling oracle -------------------------------------------------------------

def _surface_samples(corner, d, rng, count, denom):
    """Corners, face centres and stratified random points on the cube surface."""
    pts = [tuple(Fraction(c + o) for c, o in zip(corner, offs))
           for offs in itertools.product((0, 1), repeat=d)]
    for axis in range(d):
        for side in (0, 1):
            pts.append(tuple(Fraction(corner[i] + side) if i == axis else Fraction(2 * corner[i] + 1, 2)
                             for i in range(d)))
    for j in range(count):
        axis = j % d
        side = (j // d) % 2
        raw = rng.integers(0, denom + 1, size=d)
        pts.append(tuple(Fraction(corner[i] + side) if i == axis else corner[i] + Fraction(int(raw[i]), denom)
                         for i in range(d)))
    return pts


def restricted_hints(corner, direction, eps: Fraction):
    """Segments parallel to ``direction`` from the observer's bottom face to the target's bottom face."""
    d = len(corner)
    p = direction[-1]
    out = []
    k = corner[-1]
    for offs in itertools.product((0, 1), repeat=d - 1):
        for shrink in (Fraction(0), eps):
            top = tuple(Fraction(corner[i] + offs[i]) + (-shrink if offs[i] else shrink)
                        for i in range(d - 1)) + (Fraction(k),)
            s = Fraction(k, p)
            foot = tuple(top[i] - s * direction[i] for i in range(d - 1)) + (Fraction(0),)
            if all(0 <= x <= 1 for x in foot[:-1]):
                out.append((foot, top))
    return out


def visible_sampled(c: Configuration, rays_per_pair: int = 64, seed: int = 0,
                    hints: dict | None = None, theta_deg=None) -> frozenset:
    """Cubes with a sampled unobstructed segment to the observer (a sound lower bound).

    ``hints`` maps a cube to directions whose restricted lines of sight are
    tried first.  With ``theta_deg`` a cube blocks only at shallow angles.
    """
    if c.d not in (2, 3):
        raise ValueError("sampling oracle supports d in {2, 3}")
    if rays_per_pair < 1:
        raise ValueError("rays_per_pair must be >= 1")
    cubes = sorted(c.cubes)
    denom = 64
    visible = set()
    for idx, target in enumerate(cubes):
        rng = np.random.default_rng([seed, idx])

        def free(a, b):
            if theta_deg is None:
                return not segment_blocked(a, b, cubes, exclude=(target,))
            return not segment_blocked_shallow(a, b, cubes, theta_deg, exclude=(target,))

        found = False
        for direction in (hints or {}).get(target, ()):
            eps = Fraction(1, 4 * direction[-1])
            if any(free(a, b) for a, b in restricted_hints(target, direction, eps)):
                found = True
                break
        if not found:
            obs = _surface_samples(c.observer, c.d, rng, rays_per_pair, denom)
            tgt = _surface_samples(target, c.d, rng, rays_per_pair, denom)
            pairs = [(obs[i % len(obs)], tgt[(i * 7 + i // len(obs)) % len(tgt)])
                     for i in range(max(rays_per_pair, len(obs)))]
            pairs += list(itertools.product(obs[: 2 ** c.d], tgt[: 2 ** c.d]))
            found = any(free(a, b) for a, b in pairs)
        if found:
            visible.add(target)
    return frozenset(visible)
