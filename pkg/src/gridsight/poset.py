"""Visibility posets under strict product order, and exact width.

Comparability is strict domination in every coordinate: ``x < y`` iff
``x_i < y_i`` for all i.  Pairs that tie in some coordinate are incomparable,
which matches the blocking rule (a face blocks another only if it sticks out
in every direction).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .modular import ResidueVector

log = logging.getLogger(__name__)

BRUTEFORCE_LIMIT = 24

# posets certified by width_exact in this process (antichain and cover both validated)
certified_count = 0


@dataclass(frozen=True)
class PosetElement:
    coords: tuple
    k_index: int


class Poset:
    """Finite set of d-tuples under strict product order.  Immutable."""

    def __init__(self, elements, d: int):
        self.elements: tuple[PosetElement, ...] = tuple(elements)
        self.d = d
        coords = [e.coords for e in self.elements]
        if len(set(coords)) != len(coords):
            raise ValueError("poset elements must be distinct")
        self._less = None
        self._by_k = {e.k_index: i for i, e in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"Poset(n={len(self)}, d={self.d})"

    @property
    def k_indices(self) -> list[int]:
        return [e.k_index for e in self.elements]

    def index_of_k(self, k: int) -> int:
        return self._by_k[k]

    @property
    def less(self) -> np.ndarray:
        """Boolean matrix ``less[i, j]`` iff element i < element j."""
        if self._less is None:
            n = len(self.elements)
            if n == 0:
                self._less = np.zeros((0, 0), dtype=bool)
            elif all(isinstance(c, int) for e in self.elements for c in e.coords):
                a = np.array([e.coords for e in self.elements], dtype=np.int64)
                self._less = np.all(a[:, None, :] < a[None, :, :], axis=2)
            else:
                m = np.zeros((n, n), dtype=bool)
                for i, x in enumerate(self.elements):
                    for j, y in enumerate(self.elements):
                        m[i, j] = all(a < b for a, b in zip(x.coords, y.coords))
                self._less = m
            self._less.setflags(write=False)
        return self._less

    def comparable(self, i: int, j: int) -> bool:
        return bool(self.less[i, j] or self.less[j, i])

    def restrict(self, predicate) -> "Poset":
        """Sub-poset of elements whose ``k_index`` satisfies ``predicate``."""
        return Poset([e for e in self.elements if predicate(e.k_index)], self.d)


# -- builders -----------------------------------------------------------------

def build_s_poset(t: ResidueVector, signs=None) -> Poset:
    """``{((+-k t_1)%p, ..., (+-k t_{d-1})%p, k) : 0 <= k < p}``."""
    signs = tuple(signs) if signs is not None else (1,) * (t.d - 1)
    if len(signs) != t.d - 1 or any(s not in (1, -1) for s in signs):
        raise ValueError(f"signs must be d-1 = {t.d - 1} values in {{+1, -1}}")
    p = t.p
    elems = []
    for k in range(p):
        c = tuple((s * k * ti) % p for s, ti in zip(signs, t.coords)) + (k,)
        elems.append(PosetElement(c, k))
    return Poset(elems, t.d)


def primitive_heights(t: ResidueVector) -> list[int]:
    """Heights k in [1, p) with ``(t_i k) % p < k`` for every i."""
    p = t.p
    return [k for k in range(1, p) if all((ti * k) % p < k for ti in t.coords)]


def build_primitive_poset(t: ResidueVector) -> Poset:
    """``{((t_1 k)%p / k, ..., (t_{d-1} k)%p / k, k)}`` over primitive heights, exact rationals."""
    p = t.p
    elems = [
        PosetElement(tuple(Fraction((ti * k) % p, k) for ti in t.coords) + (Fraction(k),), k)
        for k in primitive_heights(t)
    ]
    return Poset(elems, t.d)


def build_fractional_poset(t: ResidueVector) -> Poset:
    """``{({t_1 k/p}, ..., {t_{d-1} k/p}, k)}`` -- the fractional-part form of the S-poset."""
    p = t.p
    elems = [
        PosetElement(tuple(Fraction((ti * k) % p, p) for ti in t.coords) + (Fraction(k),), k)
        for k in range(p)
    ]
    return Poset(elems, t.d)


# -- certificates --------------------------------------------------------------

@dataclass(frozen=True)
class Antichain:
    indices: tuple[int, ...]

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class ChainCover:
    chains: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.chains)


class CertificateError(AssertionError):
    pass


def validate_antichain(P: Poset, indices) -> None:
    idx = list(indices)
    if len(set(idx)) != len(idx):
        raise CertificateError("antichain repeats an element")
    less = P.less
    for a, b in itertools.combinations(idx, 2):
        if less[a, b] or less[b, a]:
            raise CertificateError(f"elements {a} and {b} are comparable")


def validate_chain(P: Poset, chain) -> None:
    """A chain must be listed in increasing order."""
    less = P.less
    for a, b in zip(chain, chain[1:]):
        if not less[a, b]:
            raise CertificateError(f"chain step {a} -> {b} is not increasing")


def validate_cover(P: Poset, cover: ChainCover) -> None:
    seen = [i for ch in cover.chains for i in ch]
    if sorted(seen) != list(range(len(P))):
        raise CertificateError("chains are not a partition of the poset")
    for ch in cover.chains:
        if not ch:
            raise CertificateError("empty chain")
        validate_chain(P, ch)


# -- width ----------------------------------------------------------------------

@dataclass(frozen=True)
class WidthResult:
    width: int
    antichain: Antichain
    cover: ChainCover


def width_exact(P: Poset) -> WidthResult:
    """Width with a maximum antichain and a minimum chain cover, both validated.

    Minimum chain partition of a transitively closed DAG is ``n - |M|`` for a
    maximum matching M of the split graph (out-copy -> in-copy).  The
    antichain is read off a Konig vertex cover of that graph.
    """
    global certified_count
    n = len(P)
    if n == 0:
        certified_count += 1
        return WidthResult(0, Antichain(()), ChainCover(()))
    less = P.less
    graph = csr_matrix(less.astype(np.int8))
    match_left = maximum_bipartite_matching(graph, perm_type="column")  # left i -> right j
    match_right = np.full(n, -1, dtype=np.int64)
    for i, j in enumerate(match_left):
        if j >= 0:
            match_right[j] = i

    chains = []
    for start in range(n):
        if match_right[start] != -1:
            continue
        chain, cur = [start], start
        while match_left[cur] != -1:
            cur = int(match_left[cur])
            chain.append(cur)
        chains.append(tuple(chain))

    # Konig: Z = vertices reachable from free left vertices along alternating paths.
    z_left = np.zeros(n, dtype=bool)
    z_right = np.zeros(n, dtype=bool)
    stack = [i for i in range(n) if match_left[i] == -1]
    for i in stack:
        z_left[i] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(less[i]):
            if not z_right[j]:
                z_right[j] = True
                m = match_right[j]
                if m != -1 and not z_left[m]:
                    z_left[m] = True
                    stack.append(int(m))
    # cover = (L \ Z) u (R n Z); antichain = elements with neither copy in the cover
    antichain = tuple(i for i in range(n) if z_left[i] and not z_right[i])

    result = WidthResult(len(chains), Antichain(antichain), ChainCover(tuple(chains)))
    validate_antichain(P, result.antichain.indices)
    validate_cover(P, result.cover)
    if len(result.antichain) != len(result.cover):
        raise CertificateError(
            f"Dilworth mismatch: antichain {len(result.antichain)} vs cover {len(result.cover)}")
    certified_count += 1
    return result


def width_bruteforce(P: Poset) -> int:
    """Largest antichain by exhaustive subset search (oracle; n <= 24)."""
    n = len(P)
    if n > BRUTEFORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTEFORCE_LIMIT} elements, got {n}")
    comp = [0] * n
    less = P.less
    for i in range(n):
        for j in range(n):
            if less[i, j] or less[j, i]:
                comp[i] |= 1 << j
    best = 0
    for mask in range(1 << n):
        size = bin(mask).count("1")
        if size <= best:
            continue
        m, ok = mask, True
        while m:
            low = m & -m
            i = low.bit_length() - 1
            if comp[i] & mask:
                ok = False
                break
            m ^= low
        if ok:
            best = size
    return best


# -- halves and families --------------------------------------------------------

@dataclass
class SplitReport:
    width: int
    width_minus: int
    width_plus: int
    equal: bool
    half_bound: bool

    @property
    def holds(self) -> bool:
        return self.equal and self.half_bound


def upper_half(p: int):
    return lambda k: 2 * k > p - 1


def lower_half(p: int):
    return lambda k: 2 * k < p - 1


def split_halves(P: Poset, p: int):
    """Upper half ``(p-1)/2 < k < p`` and lower half ``0 <= k < (p-1)/2`` with widths."""
    minus = P.restrict(upper_half(p))
    plus = P.restrict(lower_half(p))
    w = width_exact(P).width
    wm = width_exact(minus).width
    wp = width_exact(plus).width
    report = SplitReport(w, wm, wp, wm == wp, 2 * wm >= w - 1)
    return minus, plus, report


def sign_vectors(d: int):
    """All ``{+1,-1}^{d-1}`` in lexicographic order with + first."""
    return list(itertools.product((1, -1), repeat=d - 1))


def best_in_family(t: ResidueVector):
    """Family member (sign choice) with the largest width; ties keep the first."""
    best = None
    for signs in sign_vectors(t.d):
        P = build_s_poset(t, signs)
        w = width_exact(P).width
        if best is None or w > best[2]:
            best = (signs, P, w)
    return best
