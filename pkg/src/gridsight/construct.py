"""Lower-bound configurations: many families of parallelotopes, each contributing
a simultaneously visible antichain of cubes from the upper half of its edge."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Configuration, cube_at_height, visible_sampled
from .lattice import NoInteriorPointError, antichain_from_lattice
from .modular import ResidueVector, is_prime
from .poset import build_s_poset, sign_vectors, upper_half, validate_antichain, width_exact

log = logging.getLogger(__name__)

DEFAULT_SPACING = 6


def enumerate_families(p: int, d: int, spacing: int = DEFAULT_SPACING) -> list[ResidueVector]:
    """Base vectors with coordinates ``1, 1 + spacing, ...`` up to ``p - 1``."""
    if not is_prime(p) or p < 3:
        raise ValueError(f"p must be an odd prime, got {p}")
    if spacing < 1:
        raise ValueError("spacing must be >= 1")
    axis = range(1, p, spacing)
    return [ResidueVector(p, d, c) for c in itertools.product(axis, repeat=d - 1)]


@dataclass
class MemberChoice:
    signs: tuple[int, ...]
    heights: tuple[int, ...]
    path: str  # "lattice" or "exact"

    def vertex(self, t: ResidueVector) -> tuple[int, ...]:
        return t.flipped(self.signs).coords


@dataclass
class FamilyPlan:
    base: ResidueVector
    signs: tuple[int, ...]
    width: int
    heights: tuple[int, ...]
    path: str
    lattice_size: int
    exact_size: int

    @property
    def member(self) -> ResidueVector:
        return self.base.flipped(self.signs)

    @property
    def vertex(self) -> tuple[int, ...]:
        return self.member.coords + (self.base.p,)

    def cubes(self) -> list[tuple[int, ...]]:
        return [cube_at_height(self.member, k) for k in self.heights]

    def to_dict(self) -> dict:
        return {"t": list(self.base.coords), "signs": list(self.signs), "width": self.width,
                "heights": list(self.heights), "path": self.path,
                "lattice_size": self.lattice_size, "exact_size": self.exact_size}


def _lattice_choice(t: ResidueVector) -> MemberChoice | None:
    """Lattice antichain cut to the upper half, or None if the construction fails."""
    try:
        la = antichain_from_lattice(t)
    except NoInteriorPointError:
        return None
    keep = upper_half(t.p)
    return MemberChoice(la.signs, tuple(k for k in la.indices if keep(k)), "lattice")


def _exact_choices(t: ResidueVector) -> list[MemberChoice]:
    keep = upper_half(t.p)
    out = []
    for signs in sign_vectors(t.d):
        P = build_s_poset(t, signs).restrict(keep)
        w = width_exact(P)
        out.append(MemberChoice(signs, tuple(sorted(P.elements[i].k_index for i in w.antichain.indices)),
                                "exact"))
    return out


def _far_apart(u, v, spacing: int) -> bool:
    return any(abs(a - b) >= spacing for a, b in zip(u, v))


def plan_family(t: ResidueVector, taken: list[tuple[int, ...]], spacing: int) -> FamilyPlan | None:
    """Best member whose characteristic vertex stays ``spacing`` away from those already used."""
    lat = _lattice_choice(t)
    exact = _exact_choices(t)
    candidates = ([lat] if lat is not None else []) + exact
    # larger antichain first; lattice wins ties since it is the construction being reproduced
    candidates.sort(key=lambda c: (-len(c.heights), c.path != "lattice"))
    for c in candidates:
        if not c.heights:
            continue
        v = c.vertex(t)
        if all(_far_apart(v, u, spacing) for u in taken):
            exact_best = max(len(e.heights) for e in exact)
            plan = FamilyPlan(t, c.signs, width_exact(build_s_poset(t, c.signs)).width, c.heights,
                              c.path, len(lat.heights) if lat else 0, exact_best)
            validate_antichain(build_s_poset(t, c.signs), plan.heights)
            assert all(upper_half(t.p)(k) for k in plan.heights)
            return plan
    return None


@dataclass
class LowerBoundResult:
    p: int
    d: int
    families: list[FamilyPlan]
    dropped: list[ResidueVector]
    config: Configuration | None
    predicted_count: int
    collisions: int
    lattice_wins: int = 0
    details: dict = field(default_factory=dict)

    def hints(self) -> dict:
        """Restricted line-of-sight direction for each placed cube."""
        out: dict = {}
        for f in self.families:
            for c in f.cubes():
                out.setdefault(c, []).append(f.vertex)
        return out

    def to_dict(self) -> dict:
        return {"p": self.p, "d": self.d, "predicted_count": self.predicted_count,
                "collisions": self.collisions, "families": [f.to_dict() for f in self.families],
                "dropped": [list(t.coords) for t in self.dropped],
                "config": self.config.to_dict() if self.config else None}


def build_lower_bound_config(p: int, d: int = 3, spacing: int = DEFAULT_SPACING,
                             geometry: bool | None = None) -> LowerBoundResult:
    """Union of per-family upper-half antichains, one cube per selected height."""
    if p < 5 or not is_prime(p):
        raise ValueError(f"p must be a prime >= 5, got {p}")
    geometry = (d == 3) if geometry is None else geometry
    plans, dropped, taken = [], [], []
    for t in enumerate_families(p, d, spacing):
        plan = plan_family(t, taken, spacing)
        if plan is None:
            dropped.append(t)
            log.info("family %s dropped: no member clears the spacing", t.coords)
            continue
        plans.append(plan)
        taken.append(plan.member.coords)
    cubes: dict = {}
    collisions = 0
    for f in plans:
        for c in f.cubes():
            if c in cubes:
                collisions += 1
                log.warning("cube %s demanded by families %s and %s", c, cubes[c], f.base.coords)
            else:
                cubes[c] = f.base.coords
    config = Configuration(p, d, frozenset(cubes)) if geometry else None
    return LowerBoundResult(p, d, plans, dropped, config, len(cubes), collisions,
                            sum(f.path == "lattice" for f in plans))


def geometric_count(result: LowerBoundResult, rays: int = 16, seed: int = 0, theta_deg=None) -> int:
    if result.config is None:
        raise ValueError("no geometry for this result")
    return len(visible_sampled(result.config, rays, seed, hints=result.hints(), theta_deg=theta_deg))


# -- scaling experiment ----------------------------------------------------------

@dataclass
class ScalingRow:
    p: int
    families: int
    predicted: int
    sampled: int | None = None


@dataclass
class ScalingResult:
    d: int
    mode: str
    rows: list[ScalingRow]
    slope: float | None
    intercept: float | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "families", "predicted", "sampled", "slope"])
        slope = "" if self.slope is None else f"{self.slope:.6f}"
        for r in self.rows:
            w.writerow([r.p, r.families, r.predicted, "" if r.sampled is None else r.sampled, slope])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"d": self.d, "mode": self.mode, "slope": self.slope, "intercept": self.intercept,
                "rows": [r.__dict__ for r in self.rows]}


def fit_loglog(xs, ys):
    """Least-squares slope and intercept of log y against log x."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def scaling_experiment(p_list, d: int = 3, mode: str = "model", spacing: int = DEFAULT_SPACING,
                       rays: int = 16, seed: int = 0) -> ScalingResult:
    if mode not in ("model", "geometric"):
        raise ValueError("mode must be 'model' or 'geometric'")
    if mode == "geometric" and d != 3:
        raise ValueError("geometric mode needs d = 3")
    for p in p_list:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
    rows = []
    for p in p_list:
        res = build_lower_bound_config(p, d, spacing, geometry=(mode == "geometric"))
        row = ScalingRow(p, len(res.families), res.predicted_count)
        if mode == "geometric":
            row.sampled = geometric_count(res, rays, seed)
        rows.append(row)
    slope = intercept = None
    if len(rows) >= 3 and all(r.predicted > 0 for r in rows):
        slope, intercept = fit_loglog([r.p for r in rows], [r.predicted for r in rows])
    return ScalingResult(d, mode, rows, slope, intercept)


def svg_loglog(result: ScalingResult, width: int = 480, height: int = 360) -> str:
    """Scatter of log(count) against log(p) with the fitted line."""
    pts = [(math.log(r.p), math.log(max(r.predicted, 1))) for r in result.rows]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    pad = 40
    xs, ys = [x for x, _ in pts], [y for _, y in pts]
    x0, x1 = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    y0, y1 = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>']
    for x, y in pts:
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="steelblue"/>')
    if result.slope is not None:
        a, b = result.slope, result.intercept
        parts.append(f'<line x1="{sx(x0):.2f}" y1="{sy(a * x0 + b):.2f}" x2="{sx(x1):.2f}" '
                     f'y2="{sy(a * x1 + b):.2f}" stroke="crimson"/>')
        parts.append(f'<text x="{pad + 8}" y="{pad + 12}" font-size="12">slope {a:.3f}</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="12">log p</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
