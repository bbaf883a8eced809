"""Invariant checks at configurable scale, shared by ``verify-all`` and the acceptance tests."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import construct, cover, fourier, geometry, lattice, modular, poset
from .modular import ResidueVector, primes_between


def load_calibration() -> dict:
    return json.loads(resources.files("gridsight").joinpath("data/calibration.json").read_text())


@dataclass
class Row:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3),
                "detail": self.detail}


def _timed(name, fn, *args, **kwargs) -> Row:
    start = time.perf_counter()
    passed, detail = fn(*args, **kwargs)
    return Row(name, bool(passed), detail, time.perf_counter() - start)


def _all_t(p: int, d: int):
    for c in modular.all_residue_coords(p, d):
        yield ResidueVector(p, d, tuple(int(x) for x in c))


def _sample_t(p: int, d: int, n: int, rng: np.random.Generator):
    total = (p - 1) ** (d - 1)
    if total <= n:
        yield from _all_t(p, d)
        return
    for c in rng.integers(1, p, size=(n, d - 1)):
        yield ResidueVector(p, d, tuple(int(x) for x in c))


# -- individual checks: each returns (passed, detail) ----------------------------

def width_oracle(primes) -> tuple[bool, dict]:
    cases, mismatches = 0, []
    for p in primes:
        for t in _all_t(p, 3):
            for signs in poset.sign_vectors(3):
                P = poset.build_s_poset(t, signs)
                cases += 1
                if poset.width_exact(P).width != poset.width_bruteforce(P):
                    mismatches.append([p, list(t.coords), list(signs)])
    return not mismatches, {"cases": cases, "mismatches": mismatches[:10]}


def dilworth(primes) -> tuple[bool, dict]:
    """Certificates on full posets, both halves, every sign choice and primitive posets."""
    touched, bad = 0, 0
    for p in primes:
        for t in _all_t(p, 3):
            posets = [poset.build_s_poset(t, s) for s in poset.sign_vectors(3)]
            full = posets[0]
            posets += [full.restrict(poset.upper_half(p)), full.restrict(poset.lower_half(p)),
                       poset.build_primitive_poset(t)]
            for P in posets:
                touched += 1
                try:
                    w = poset.width_exact(P)
                    poset.validate_antichain(P, w.antichain.indices)
                    poset.validate_cover(P, w.cover)
                    ok = len(w.antichain) == len(w.cover) == w.width
                except poset.CertificateError:
                    ok = False
                bad += not ok
    return bad == 0, {"posets": touched, "failures": bad}


def symmetric_lower_half(p: int):
    return lambda k: 1 <= k <= (p - 1) // 2


def half_split(max_p: int, d4_samples: int, seed: int = 0, symmetric: bool = False) -> tuple[bool, dict]:
    """Upper-half width against lower-half width.

    With ``symmetric`` the lower half is ``1 <= k <= (p-1)/2``, the mirror image
    of the upper half under ``k -> p - k``.
    """
    rng = np.random.default_rng(seed)
    cases, unequal, below_half, examples = 0, 0, 0, []
    for d in (3, 4):
        for p in primes_between(3, max_p):
            ts = _all_t(p, d) if d == 3 else _sample_t(p, d, d4_samples, rng)
            lower = symmetric_lower_half(p) if symmetric else poset.lower_half(p)
            for t in ts:
                P = poset.build_s_poset(t)
                w = poset.width_exact(P).width
                wm = poset.width_exact(P.restrict(poset.upper_half(p))).width
                wp = poset.width_exact(P.restrict(lower)).width
                cases += 1
                if wm != wp:
                    unequal += 1
                    if len(examples) < 5:
                        examples.append({"p": p, "t": list(t.coords), "w": w, "w_minus": wm, "w_plus": wp})
                if 2 * wm < w - 1:
                    below_half += 1
    return unequal == 0 and below_half == 0, {
        "cases": cases, "unequal": unequal, "half_bound_violations": below_half, "examples": examples}


def toy_cover(primes, ds, samples: int, seed: int = 0) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    cases, bad, worst = 0, [], 0.0
    for d in ds:
        for p in primes:
            for t in _sample_t(p, d, samples, rng):
                cases += 1
                try:
                    r = cover.toy_chain_cover(t)
                    w = poset.width_exact(r.poset).width
                    ok = len(r) <= d * r.details["hp"] and w <= len(r)
                    worst = max(worst, len(r) / (d * r.details["hp"]))
                except AssertionError:
                    ok = False
                if not ok:
                    bad.append([p, list(t.coords)])
    return not bad, {"cases": cases, "failures": bad[:10], "max_cover_over_bound": worst}


def height_duality(max_p: int) -> tuple[bool, dict]:
    cases, violations, worst = 0, 0, 0.0
    for p in primes_between(3, max_p):
        coords = modular.all_residue_coords(p, 3)
        h = modular.height_table(p, coords)
        hs = modular.dual_height_table(p, coords)
        rhs = math.e * 2 * p * math.ceil(math.log(p))
        lhs = h * 2 * hs
        cases += len(coords)
        violations += int(np.sum(lhs > rhs))
        worst = max(worst, float(lhs.max() / rhs))
    return violations == 0, {"cases": cases, "violations": violations, "max_lhs_over_rhs": worst}


def mean_height_trend(primes, C: float) -> tuple[bool, dict]:
    rows, violations = [], 0
    for p in primes:
        m = modular.mean_height(p, 3)
        rows.append([p, round(m.ratio, 6)])
        violations += m.ratio > C
    return violations == 0, {"C": C, "violations": violations, "max_ratio": max(r[1] for r in rows)}


def lattice_antichains(primes, samples: int, c: float, seed: int = 0) -> tuple[bool, dict]:
    """Per p, at least 95% of seeded t reach ``c p^(2/3)``; every output validates."""
    rng = np.random.default_rng(seed)
    per_p, invalid, failing_p = {}, 0, []
    for p in primes:
        hits, missing = 0, 0
        for cvec in rng.integers(1, p, size=(samples, 2)):
            t = ResidueVector.of(p, cvec.tolist())
            try:
                la = lattice.antichain_from_lattice(t)
            except lattice.NoInteriorPointError:
                missing += 1
                continue
            except poset.CertificateError:
                invalid += 1
                continue
            hits += len(la) >= c * p ** (2 / 3)
        frac = hits / samples
        per_p[p] = {"fraction": frac, "no_interior": missing}
        if frac < 0.95:
            failing_p.append(p)
    return not failing_p and invalid == 0, {"c": c, "failing_p": failing_p, "invalid": invalid,
                                            "per_p": {str(k): v for k, v in per_p.items()}}


def fourier_suite(max_p: int, seed: int = 0) -> tuple[bool, dict]:
    r = fourier.fourier_suite(max_p=max_p, seed=seed)
    return r["passed"], {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()}


def lll_checks(count: int, seed: int = 0, max_p: int = 101) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    primes = primes_between(3, max_p)
    bad = []
    for _ in range(count):
        p = int(rng.choice(primes))
        d = int(rng.integers(3, 6))
        t = ResidueVector(p, d, tuple(int(x) for x in rng.integers(1, p, size=d - 1)))
        L = lattice.parallelotope_lattice(t)
        red = lattice.lll_reduce(L)
        vol = lattice.covolume(L)
        vol_red = abs(lattice.bareiss_det(red.vectors))
        prod = red.norm_product_squared()
        n = len(red.vectors)
        ok = (vol == p ** (d - 1) == vol_red and red.size_reduced() and red.lovasz()
              and vol ** 2 <= prod <= 2 ** (n * (n - 1) // 2) * vol ** 2)
        if not ok:
            bad.append([p, d, list(t.coords)])
    return not bad, {"cases": count, "failures": bad}


def bijection(max_p: int) -> tuple[bool, dict]:
    cases, width_bad, prim_bad = 0, [], []
    for p in primes_between(3, max_p):
        for t in _all_t(p, 3):
            cases += 1
            if len(geometry.restricted_visible_set(t)) != poset.width_exact(poset.build_s_poset(t)).width:
                width_bad.append([p, list(t.coords)])
            if not geometry.primitive_scan_agrees(t):
                prim_bad.append([p, list(t.coords)])
    return not width_bad and not prim_bad, {"cases": cases, "width_mismatch": width_bad[:10],
                                            "primitive_mismatch": prim_bad[:10]}


def primitive_cover(max_p: int) -> tuple[bool, dict]:
    cases, bad, worst = 0, [], 0.0
    for p in primes_between(5, max_p):
        for t in _all_t(p, 3):
            if min(t.coords) < 2:
                continue
            cases += 1
            try:
                r = cover.primitive_chain_cover(t)
                ok = len(r) <= r.bound
                worst = max(worst, len(r) / r.bound)
            except AssertionError:
                ok = False
            if not ok:
                bad.append([p, list(t.coords)])
    return not bad, {"cases": cases, "failures": bad[:10], "max_cover_over_bound": worst}


def scaling(primes, d: int, threshold: float) -> tuple[bool, dict]:
    r = construct.scaling_experiment(primes, d, "model")
    return r.slope is not None and r.slope >= threshold, {
        "slope": r.slope, "threshold": threshold, "rows": [[x.p, x.families, x.predicted] for x in r.rows]}


def geometric_floor(p: int = 11, rays: int = 16, seed: int = 0) -> tuple[bool, dict]:
    res = construct.build_lower_bound_config(p, 3)
    floor = sum(len(f.heights) for f in res.families)
    seen = construct.geometric_count(res, rays, seed)
    return seen >= floor, {"p": p, "floor": floor, "sampled_visible": seen,
                           "cubes": len(res.config.cubes), "collisions": res.collisions}


def family_disjoint(primes, d: int = 3) -> tuple[bool, dict]:
    collisions = {}
    for p in primes:
        res = construct.build_lower_bound_config(p, d, geometry=False)
        if res.collisions:
            collisions[str(p)] = res.collisions
    return not collisions, {"collisions": collisions}


# -- desk-scale suite ------------------------------------------------------------

def verify_all(max_p: int = 13, seed: int = 0) -> list[Row]:
    cal = load_calibration()
    small = primes_between(5, min(max_p, 13))
    mid = primes_between(11, max(max_p, 11))
    rows = [
        _timed("width-matches-bruteforce", width_oracle, small),
        _timed("dilworth-certificates", dilworth, small),
        _timed("half-split-equal", half_split, max_p, 50, seed),
        _timed("half-split-symmetric", half_split, max_p, 50, seed, True),
        _timed("toy-cover-bound", toy_cover, mid, (3, 4), 50, seed),
        _timed("height-duality", height_duality, max(max_p, 5)),
        _timed("mean-height-trend", mean_height_trend, mid, cal["mean_height_C"]),
        _timed("lattice-antichain-size", lattice_antichains, mid, 200, cal["antichain_c"], seed),
        _timed("fourier-identities", fourier_suite, min(max_p, 13), seed),
        _timed("lll-conditions", lll_checks, 20, seed, max(max_p, 5)),
        _timed("restricted-visibility-bijection", bijection, max_p),
        _timed("primitive-cover-bound", primitive_cover, max_p),
        _timed("family-disjointness", family_disjoint, primes_between(5, max_p)),
        _timed("geometric-floor", geometric_floor, 11, 16, seed),
    ]
    return rows
