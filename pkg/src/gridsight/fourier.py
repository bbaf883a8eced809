"""Discrete Fourier transform on Z_p^d and numeric checks of the analytic bounds.

Convention: ``fhat(x) = sum_w e_p(w . x) f(w)`` with ``e_p(y) = exp(2 pi i y / p)``;
forward is unnormalised, the inverse carries ``1/p^d``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .modular import ResidueVector, height

MAX_CELLS = 10 ** 6
IDENTITY_TOL = 1e-9
CLOSED_FORM_TOL = 1e-6


class GridSizeError(ValueError):
    pass


@dataclass(frozen=True)
class GridFunction:
    p: int
    d: int
    values: np.ndarray

    def __post_init__(self):
        if self.p ** self.d > MAX_CELLS:
            raise GridSizeError(f"p^d = {self.p ** self.d} exceeds {MAX_CELLS}")
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.p,) * self.d:
            raise ValueError(f"values must have shape {(self.p,) * self.d}, got {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def indicator(cls, p: int, d: int, points) -> "GridFunction":
        if p ** d > MAX_CELLS:
            raise GridSizeError(f"p^d = {p ** d} exceeds {MAX_CELLS}")
        v = np.zeros((p,) * d, dtype=np.complex128)
        for pt in points:
            v[tuple(x % p for x in pt)] = 1
        return cls(p, d, v)

    @classmethod
    def box(cls, p: int, d: int, side: int) -> "GridFunction":
        """Indicator of ``[0, side)^d``."""
        if p ** d > MAX_CELLS:
            raise GridSizeError(f"p^d = {p ** d} exceeds {MAX_CELLS}")
        v = np.zeros((p,) * d, dtype=np.complex128)
        v[(slice(0, side),) * d] = 1
        return cls(p, d, v)

    @classmethod
    def multiples(cls, t: ResidueVector) -> "GridFunction":
        """Indicator of the scalar multiples of ``t`` mod p."""
        return cls.indicator(t.p, t.d, (t.multiple(k) for k in range(t.p)))


def _kernel(p: int, sign: int) -> np.ndarray:
    w = np.arange(p)
    return np.exp(sign * 2j * np.pi * (np.outer(w, w) % p) / p)


def _transform(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = values
    for axis in range(values.ndim):
        out = np.moveaxis(np.tensordot(kernel, out, axes=([1], [axis])), 0, axis)
    return out


def dft(f: GridFunction) -> GridFunction:
    """One 1-D transform per axis, ``O(d p^(d+1))``."""
    return GridFunction(f.p, f.d, _transform(f.values, _kernel(f.p, +1)))


def inverse_dft(F: GridFunction) -> GridFunction:
    return GridFunction(F.p, F.d, _transform(F.values, _kernel(F.p, -1)) / F.p ** F.d)


def dft_direct(f: GridFunction) -> np.ndarray:
    """The defining double sum, for tiny grids only."""
    p, d = f.p, f.d
    pts = list(itertools.product(range(p), repeat=d))
    out = np.zeros((p,) * d, dtype=np.complex128)
    for x in pts:
        s = 0j
        for w in pts:
            s += np.exp(2j * np.pi * (sum(a * b for a, b in zip(w, x)) % p) / p) * f.values[w]
        out[x] = s
    return out


def cyclic_convolution(f: GridFunction, g: GridFunction) -> GridFunction:
    """``(f * g)(w) = sum_v f(v) g(w - v)`` by direct summation."""
    p, d = f.p, f.d
    out = np.zeros((p,) * d, dtype=np.complex128)
    for v in zip(*np.nonzero(f.values)):
        out += f.values[v] * np.roll(g.values, shift=v, axis=tuple(range(d)))
    return GridFunction(p, d, out)


def _rel(a, b) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return float(abs(a - b) / scale)


def parseval_check(f: GridFunction, g: GridFunction) -> float:
    """Relative gap between ``sum f conj(g)`` and ``p^-d sum fhat conj(ghat)``."""
    if (f.p, f.d) != (g.p, g.d):
        raise ValueError("f and g live on different groups")
    lhs = np.sum(f.values * np.conj(g.values))
    F, G = dft(f), dft(g)
    rhs = np.sum(F.values * np.conj(G.values)) / f.p ** f.d
    if abs(lhs) == 0 and abs(rhs) < IDENTITY_TOL:
        return 0.0
    return _rel(lhs, rhs)


def symmetric_abs_grid(p: int, d: int) -> list[np.ndarray]:
    """Per-axis ``|x_k|`` with x_k taken in ``(-p/2, p/2]``, broadcastable."""
    a = np.arange(p)
    sym = np.where(2 * a > p, p - a, a)
    return [sym.reshape([p if i == k else 1 for i in range(d)]) for k in range(d)]


def box_bound(p: int, d: int, side: int, power: int = 1) -> np.ndarray:
    """``prod_k min(p / (2|x_k|), side)^power`` on the full frequency grid."""
    out = np.ones((p,) * d)
    for ax in symmetric_abs_grid(p, d):
        with np.errstate(divide="ignore"):
            m = np.where(ax == 0, float(side), np.minimum(p / (2.0 * np.maximum(ax, 1)), side))
        out = out * m ** power
    return out


@dataclass
class BoundReport:
    name: str
    holds: bool
    worst_slack: float
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "worst_slack": self.worst_slack, **self.detail}


def box_indicator_bound_check(p: int, d: int, n: int) -> BoundReport:
    """|hat of 1_[0,n)^d| against the product of ``min(p/(2|x_k|), n)`` at every frequency."""
    if n > p:
        raise ValueError("side n must be <= p")
    mag = np.abs(dft(GridFunction.box(p, d, n)).values)
    bound = box_bound(p, d, n)
    slack = bound - mag
    tol = IDENTITY_TOL * n ** d
    return BoundReport("box-transform-bound", bool(np.all(slack >= -tol)), float(slack.min()),
                       {"p": p, "d": d, "n": n})


@dataclass
class GdkReport:
    t: ResidueVector
    k: int
    hp: int
    side: int
    zero_value: float
    zero_expected: int
    zero_rel_err: float
    bound_holds: bool
    worst_slack: float
    disjoint_sum: float
    relation_sum_rel_err: float

    @property
    def holds(self) -> bool:
        return (self.zero_rel_err <= CLOSED_FORM_TOL and self.bound_holds
                and abs(self.disjoint_sum - 1) <= CLOSED_FORM_TOL
                and self.relation_sum_rel_err <= CLOSED_FORM_TOL)


def g_dk_checks(t: ResidueVector, k: int) -> GdkReport:
    """Checks on the k-fold self-convolution g of the box ``[0, ceil(h_p/k))^d``.

    * ``|ghat(0)| = ceil(h_p/k)^(kd)``
    * ``|ghat(x)| <= prod_i min(p/(2|x_i|), ceil(h_p/k))^k``
    * ``sum_w f(w) g(w) = g(0) = 1`` for f the multiples of t (supports meet only at 0)
    * ``sum_{alpha . t = 0} ghat(alpha) = p^(d-1)``
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p, d = t.p, t.d
    hp = height(t).value
    side = -(-hp // k)
    box = GridFunction.box(p, d, side)
    ghat = dft(box).values ** k
    expected0 = side ** (k * d)
    zero = abs(ghat[(0,) * d])
    bound = box_bound(p, d, side, power=k)
    slack = bound - np.abs(ghat)
    bound_ok = bool(np.all(slack >= -IDENTITY_TOL * expected0))

    g = inverse_dft(GridFunction(p, d, ghat)).values
    f = GridFunction.multiples(t).values
    disjoint = float(np.real(np.sum(f * g)))

    idx = np.indices((p,) * d)
    dots = sum(idx[i] * c for i, c in enumerate(t.full)) % p
    rel_sum = np.sum(ghat[dots == 0])
    return GdkReport(t, k, hp, side, float(zero), expected0, _rel(zero, expected0), bound_ok,
                     float(slack.min()), disjoint, _rel(rel_sum, p ** (d - 1)))


def lemma_dichotomy_error(t: ResidueVector) -> float:
    """Max deviation of the multiples' transform from ``p [x . t == 0]``."""
    p, d = t.p, t.d
    F = dft(GridFunction.multiples(t)).values
    idx = np.indices((p,) * d)
    dots = sum(idx[i] * c for i, c in enumerate(t.full)) % p
    expected = np.where(dots == 0, p, 0)
    return float(np.max(np.abs(F - expected)))


def roundtrip_error(f: GridFunction) -> float:
    back = inverse_dft(dft(f)).values
    scale = max(float(np.max(np.abs(f.values))), 1e-300)
    return float(np.max(np.abs(back - f.values))) / scale


def convolution_theorem_error(f: GridFunction, g: GridFunction) -> float:
    direct = dft(cyclic_convolution(f, g)).values
    product = dft(f).values * dft(g).values
    scale = max(float(np.max(np.abs(direct))), 1e-300)
    return float(np.max(np.abs(direct - product))) / scale


def random_grid(p: int, d: int, rng: np.random.Generator) -> GridFunction:
    shape = (p,) * d
    return GridFunction(p, d, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def fourier_suite(max_p: int = 13, seed: int = 0, samples: int = 100) -> dict:
    """Every transform identity and bound at desk scale; returns worst errors and slacks."""
    from .modular import primes_between

    rng = np.random.default_rng(seed)
    primes = [q for q in primes_between(3, max_p)]
    out: dict = {}

    parseval, roundtrip = 0.0, 0.0
    for p in primes:
        for d in (1, 2, 3):
            f, g = random_grid(p, d, rng), random_grid(p, d, rng)
            parseval = max(parseval, parseval_check(f, g))
            roundtrip = max(roundtrip, roundtrip_error(f))
    out["parseval_max_rel_err"] = parseval
    out["roundtrip_max_rel_err"] = roundtrip

    dich = 0.0
    for _ in range(samples):
        p = int(rng.choice([q for q in primes if q > 2]))
        t = ResidueVector.of(p, rng.integers(1, p, size=2).tolist())
        dich = max(dich, lemma_dichotomy_error(t))
    out["dichotomy_max_abs_err"] = dich

    box_ok, box_slack = True, math.inf
    for p in primes:
        for d in (1, 2, 3):
            for n in sorted({1, 2, max(1, p // 3), p}):
                r = box_indicator_bound_check(p, d, n)
                box_ok &= r.holds
                box_slack = min(box_slack, r.worst_slack)
    out["box_bound_holds"] = box_ok
    out["box_bound_worst_slack"] = box_slack

    zero_err, g_ok, g_slack, disjoint_err, rel_err = 0.0, True, math.inf, 0.0, 0.0
    for _ in range(max(1, samples // 4)):
        p = int(rng.choice([q for q in primes if q > 2]))
        t = ResidueVector.of(p, rng.integers(1, p, size=2).tolist())
        for k in (1, 2, 3):
            r = g_dk_checks(t, k)
            zero_err = max(zero_err, r.zero_rel_err)
            g_ok &= r.bound_holds
            g_slack = min(g_slack, r.worst_slack)
            disjoint_err = max(disjoint_err, abs(r.disjoint_sum - 1))
            rel_err = max(rel_err, r.relation_sum_rel_err)
    out["g_zero_max_rel_err"] = zero_err
    out["g_bound_holds"] = g_ok
    out["g_bound_worst_slack"] = g_slack
    out["g_disjoint_max_abs_err"] = disjoint_err
    out["g_relation_sum_max_rel_err"] = rel_err

    f, g = random_grid(5, 2, rng), random_grid(5, 2, rng)
    out["convolution_theorem_rel_err"] = convolution_theorem_error(f, g)
    out["passed"] = bool(
        parseval < IDENTITY_TOL and roundtrip < IDENTITY_TOL and dich < CLOSED_FORM_TOL
        and box_ok and zero_err < CLOSED_FORM_TOL and g_ok and disjoint_err < CLOSED_FORM_TOL
        and rel_err < CLOSED_FORM_TOL and out["convolution_theorem_rel_err"] < IDENTITY_TOL)
    return out
