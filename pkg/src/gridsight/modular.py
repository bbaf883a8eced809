"""Residue vectors, primes, the height h_p and the dual height h_p*.

A residue vector ``t = (t_1, ..., t_{d-1}, 1)`` mod a prime ``p`` generates the
p points ``k * t mod p``.  Its *height* is the smallest possible largest
coordinate among the nonzero multiples; its *dual height* is the smallest
sup-norm of a nonzero integer relation ``alpha . t = 0 (mod p)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime_leq(n: int) -> int:
    """Largest prime ``<= n`` (trial division, desk scale)."""
    if n < 3:
        raise ValueError(f"next_prime_leq needs n >= 3, got {n}")
    while not is_prime(n):
        n -= 1
    return n


def primes_between(lo: int, hi: int) -> list[int]:
    return [q for q in range(max(lo, 2), hi + 1) if is_prime(q)]


def symmetric_residue(x: int, p: int) -> int:
    """Representative of ``x mod p`` in ``(-p/2, p/2]``."""
    r = x % p
    return r - p if 2 * r > p else r


@dataclass(frozen=True)
class ResidueVector:
    p: int
    d: int
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if self.p <= 2 or not is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.d < 3:
            raise ValueError(f"d must be >= 3, got {self.d}")
        if len(self.coords) != self.d - 1:
            raise ValueError(f"expected {self.d - 1} coordinates, got {len(self.coords)}")
        for c in self.coords:
            if not 1 <= c <= self.p - 1:
                raise ValueError(f"coordinate {c} outside [1, {self.p - 1}]")

    @classmethod
    def of(cls, p: int, coords) -> "ResidueVector":
        coords = tuple(coords)
        return cls(p, len(coords) + 1, coords)

    @property
    def full(self) -> tuple[int, ...]:
        """The length-d vector with the implicit trailing 1."""
        return self.coords + (1,)

    def multiple(self, k: int) -> tuple[int, ...]:
        """``k * t mod p`` as a point of ``[0, p)^d``."""
        return tuple((k * c) % self.p for c in self.full)

    def flipped(self, signs) -> "ResidueVector":
        """Family member with coordinate i negated where ``signs[i] < 0``."""
        return ResidueVector(
            self.p, self.d,
            tuple(c if s > 0 else self.p - c for c, s in zip(self.coords, signs)),
        )

    def to_dict(self) -> dict:
        return {"p": self.p, "d": self.d, "t": list(self.coords)}


@dataclass(frozen=True)
class HeightResult:
    value: int
    witness: int | tuple[int, ...]


def height(t: ResidueVector) -> HeightResult:
    """``min_{0<a<p} max((a t_1)%p, ..., (a t_{d-1})%p, a)``; ties go to the smallest a."""
    p = t.p
    best, best_a = p, None
    for a in range(1, p):
        m = a
        for c in t.coords:
            r = (a * c) % p
            if r > m:
                m = r
                if m >= best:
                    break
        if m < best:
            best, best_a = m, a
    return HeightResult(best, best_a)


def dual_height(t: ResidueVector) -> HeightResult:
    """Smallest sup-norm of a nonzero ``alpha`` with ``alpha . t == 0 (mod p)``.

    Radii are scanned upward; within a radius the lexicographically least
    relation wins.  The last coordinate is solved for, so each shell costs
    ``(2r+1)^(d-1)`` residue computations.
    """
    p, full = t.p, t.full
    r = 1
    while True:
        found = None
        for head in itertools.product(range(-r, r + 1), repeat=t.d - 1):
            need = (-sum(a * c for a, c in zip(head, t.coords))) % p
            # last coordinate is congruent to `need`, candidates in [-r, r]
            last = need - p * ((need + r) // p)
            while last <= r:
                alpha = head + (last,)
                if any(alpha) and max(abs(a) for a in alpha) == r:
                    if found is None or alpha < found:
                        found = alpha
                last += p
            if found is not None:
                break  # later heads are lexicographically larger
        if found is not None:
            assert sum(a * c for a, c in zip(found, full)) % p == 0
            return HeightResult(r, found)
        r += 1


@dataclass
class DualityReport:
    t: ResidueVector
    hp: HeightResult
    hp_star: HeightResult
    bound: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            **self.t.to_dict(),
            "hp": self.hp.value,
            "hp_witness": self.hp.witness,
            "hp_star": self.hp_star.value,
            "hp_star_witness": list(self.hp_star.witness),
            "bound": self.bound,
            "holds": self.holds,
        }


def duality_bound(p: int, d: int, hp_star: int) -> float:
    return math.e * (d - 1) * p * math.ceil(math.log(p)) / (2 * hp_star)


def check_height_duality(t: ResidueVector) -> DualityReport:
    hp, hs = height(t), dual_height(t)
    bound = duality_bound(t.p, t.d, hs.value)
    return DualityReport(t, hp, hs, bound, hp.value <= bound)


# -- vectorised sweeps over every t for a fixed (p, d) ------------------------

def all_residue_coords(p: int, d: int) -> np.ndarray:
    """Every ``(t_1..t_{d-1})`` in ``[1, p-1]^{d-1}``, lexicographic, shape (N, d-1)."""
    axes = [np.arange(1, p)] * (d - 1)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return grid.reshape(-1, d - 1)


def height_table(p: int, coords: np.ndarray) -> np.ndarray:
    """h_p for each row of ``coords``; agrees with :func:`height` row by row."""
    coords = np.asarray(coords, dtype=np.int64)
    out = np.full(len(coords), p, dtype=np.int64)
    for a in range(1, p):
        m = np.maximum(((a * coords) % p).max(axis=1), a)
        np.minimum(out, m, out=out)
    return out


def dual_height_table(p: int, coords: np.ndarray) -> np.ndarray:
    """h_p* for each row of ``coords``.

    Pigeonhole on the ``(m+1)^d > p`` vectors with entries in ``[0, m]`` bounds
    h_p* by m, so only heads in ``[-m, m]^{d-1}`` need checking.
    """
    coords = np.asarray(coords, dtype=np.int64)
    n, dm1 = coords.shape
    d = dm1 + 1
    m = 1
    while (m + 1) ** d <= p:
        m += 1
    heads = np.array(list(itertools.product(range(-m, m + 1), repeat=dm1)), dtype=np.int64)
    heads = heads[np.any(heads != 0, axis=1)]
    head_norm = np.abs(heads).max(axis=1)
    out = np.full(n, p, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(1, len(heads)))
    for s in range(0, n, chunk):
        c = coords[s:s + chunk]
        last = (-(c @ heads.T)) % p
        last = np.where(2 * last > p, p - last, last)  # |symmetric residue|
        out[s:s + chunk] = np.maximum(last, head_norm[None, :]).min(axis=1)
    # heads == 0 force alpha_d == 0 mod p, i.e. |alpha_d| >= p; never better than m < p
    return out


@dataclass
class MeanHeight:
    p: int
    d: int
    count: int
    mean: float
    max: int
    ratio: float

    def to_dict(self) -> dict:
        return dict(p=self.p, d=self.d, count=self.count, mean=self.mean, max=self.max, ratio=self.ratio)


def mean_height(p: int, d: int, sample_size: int | str = "all", seed: int = 0) -> MeanHeight:
    """Mean and max of h_p over all t (or a seeded uniform sample)."""
    total = (p - 1) ** (d - 1)
    if sample_size == "all" or sample_size == total:
        coords = all_residue_coords(p, d)
    else:
        if sample_size > total:
            raise ValueError(f"sample_size {sample_size} exceeds the {total} possible t")
        rng = np.random.default_rng(seed)
        coords = rng.integers(1, p, size=(int(sample_size), d - 1))
    h = height_table(p, coords)
    mean = float(h.mean())
    return MeanHeight(p, d, len(h), mean, int(h.max()), mean / (p ** ((d - 1) / d) * math.log(p)))
