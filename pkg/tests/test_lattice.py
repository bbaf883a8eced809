import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from gridsight.lattice import (
    DegenerateBasisError,
    IntegerLattice,
    NoInteriorPointError,
    antichain_from_lattice,
    bareiss_det,
    central_region,
    central_region_3d,
    covolume,
    enumerate_affine,
    gram_schmidt,
    icbrt,
    in_lattice,
    independent_pair_3d,
    interior_point,
    is_multiple_of_t,
    lll_reduce,
    orient_normal,
    parallel,
    parallelotope_lattice,
    small_vector_3d,
    sup_norm,
)
from gridsight.modular import ResidueVector
from gridsight.poset import build_s_poset, validate_antichain, width_exact
from gridsight.verify import load_calibration

from .test_modular import residue_vectors


def fraction_det(rows):
    """Gaussian elimination over Fractions (oracle for Bareiss)."""
    m = [[Fraction(x) for x in r] for r in rows]
    n, det = len(m), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


class TestDeterminant:
    @pytest.mark.parametrize("seed", range(10))
    def test_bareiss_matches_fractions(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        rows = rng.integers(-9, 10, size=(n, n)).tolist()
        assert bareiss_det(rows) == fraction_det(rows)

    def test_singular(self):
        assert bareiss_det([[1, 2], [2, 4]]) == 0
        with pytest.raises(DegenerateBasisError):
            IntegerLattice(((1, 2), (2, 4)))


class TestParallelotopeLattice:
    @given(residue_vectors(primes=[5, 7, 11, 13, 101], dims=(3, 4, 5)))
    @settings(max_examples=40)
    def test_covolume(self, t):
        assert covolume(parallelotope_lattice(t)) == t.p ** (t.d - 1)

    def test_membership(self):
        t = ResidueVector.of(11, (3, 7))
        L = parallelotope_lattice(t)
        assert in_lattice(L, t.multiple(4))
        assert in_lattice(L, (11, 0, 0))
        assert not in_lattice(L, (1, 0, 0))
        assert is_multiple_of_t((3 - 11, 7, 1), t)


class TestLLL:
    @given(residue_vectors(primes=[11, 31, 101, 211], dims=(3, 4, 5)))
    @settings(max_examples=40, deadline=None)
    def test_conditions_exact(self, t):
        L = parallelotope_lattice(t)
        red = lll_reduce(L)
        bstar, mu = gram_schmidt(red.vectors)
        n = len(red.vectors)
        for i in range(n):
            for j in range(i):
                assert abs(mu[i][j]) <= Fraction(1, 2)
        norms = [sum(x * x for x in b) for b in bstar]
        for k in range(1, n):
            assert norms[k] >= (Fraction(3, 4) - mu[k][k - 1] ** 2) * norms[k - 1]
        assert abs(bareiss_det(red.vectors)) == covolume(L)
        vol2 = covolume(L) ** 2
        assert vol2 <= red.norm_product_squared() <= 2 ** (n * (n - 1) // 2) * vol2
        assert all(in_lattice(L, v) for v in red.vectors)

    def test_hadamard_orthogonal_equality(self):
        red = lll_reduce(IntegerLattice(((3, 0, 0), (0, 5, 0), (0, 0, 7))))
        assert red.norm_product_squared() == covolume(IntegerLattice(red.vectors)) ** 2

    def test_hadamard_strict_when_skew(self):
        L = IntegerLattice(((1, 1, 0), (0, 1, 1), (1, 0, 1)))
        prod = math.prod(sum(x * x for x in b) for b in L.basis)
        assert covolume(L) ** 2 < prod

    def test_textbook_example(self):
        # standard worked example; the third vector depends on how |mu| = 1/2 rounds
        L = IntegerLattice(((1, 1, 1), (-1, 0, 2), (3, 5, 6)))
        red = lll_reduce(L)
        assert red.vectors[:2] == [(0, 1, 0), (1, 0, 1)]
        assert [sum(x * x for x in v) for v in red.vectors] == [1, 2, 5]
        assert all(in_lattice(L, v) for v in red.vectors)


class TestPigeonhole:
    def test_icbrt(self):
        assert [icbrt(x) for x in (0, 1, 7, 8, 26, 27, 10 ** 18)] == [0, 1, 1, 2, 2, 3, 10 ** 6]

    @given(residue_vectors(primes=[11, 13, 31, 53, 101], dims=(3,)))
    @settings(max_examples=60)
    def test_small_vector(self, t):
        v = small_vector_3d(t)
        assert any(v) and is_multiple_of_t(v, t)
        m = icbrt(t.p)
        assert sup_norm(v) <= -(-t.p // m)

    @given(residue_vectors(primes=[11, 13, 31, 53, 101], dims=(3,)))
    @settings(max_examples=60)
    def test_independent_pair(self, t):
        r = independent_pair_3d(t)
        assert is_multiple_of_t(r.v1, t) and is_multiple_of_t(r.v2, t)
        assert not parallel(r.v1, r.v2)
        assert r.product <= load_calibration()["pair_C"] * t.p ** (4 / 3)

    def test_diagonal_pair(self):
        r = independent_pair_3d(ResidueVector.of(11, (1, 1)))
        assert r.s1 == 1 and r.v2 == (5, 5, -6) and r.s2 == 6

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            small_vector_3d(ResidueVector.of(11, (1, 2, 3)))


class TestInteriorPoint:
    def test_diagonal(self):
        assert interior_point(ResidueVector.of(7, (1, 1))) == (2, 2, 2)

    def test_p5_example(self):
        # k=1 already lies in [5/6, 25/6]^3
        assert interior_point(ResidueVector.of(5, (2, 3)), central_region_3d(5)) == (2, 3, 1)

    def test_regions(self):
        assert central_region_3d(12) == (2, 10)
        assert central_region(16, 4) == (2, 14)

    def test_missing(self):
        # every nonzero multiple of (3, 4, 1) mod 13 has a coordinate within 13/6 of the boundary
        with pytest.raises(NoInteriorPointError):
            interior_point(ResidueVector.of(13, (3, 4)))

    def test_exhaustive_failure_counts(self):
        # frozen from an exhaustive scan: 8 vectors fail at p=7 and at p=13, none at 5 or 11
        def fails(p):
            n = 0
            for a in range(1, p):
                for b in range(1, p):
                    try:
                        interior_point(ResidueVector.of(p, (a, b)))
                    except NoInteriorPointError:
                        n += 1
            return n
        assert [fails(p) for p in (5, 7, 11, 13)] == [0, 8, 0, 8]


class TestEnumeration:
    def test_matches_brute_force(self):
        origin, vecs, p = (5, 5, 5), [(1, 2, 0), (0, 1, 3)], 11
        got = set(enumerate_affine(origin, vecs, p))
        want = set()
        for a, b in itertools.product(range(-30, 31), repeat=2):
            pt = tuple(o + a * u + b * v for o, u, v in zip(origin, *vecs))
            if all(0 <= x < p for x in pt):
                want.add(pt)
        assert got == want

    def test_orient_normal(self):
        assert orient_normal((2, -3, -1)) == ((-1, 1), (2, 3, 1))
        assert orient_normal((-2, 3, 5)) == ((-1, 1), (2, 3, 5))


class TestLatticeAntichain:
    @given(residue_vectors(primes=[11, 17, 31, 53], dims=(3,)))
    @settings(max_examples=40, deadline=None)
    def test_validates_and_bounded_by_width(self, t):
        la = antichain_from_lattice(t)
        P = build_s_poset(t, la.signs)
        validate_antichain(P, la.indices)
        assert len(la) <= width_exact(P).width
        assert all(P.elements[pt[-1]].coords == pt for pt in la.points)

    def test_diagonal_member(self):
        la = antichain_from_lattice(ResidueVector.of(11, (1, 1)))
        assert la.signs != (1, 1) and len(la) >= 2

    @pytest.mark.parametrize("coords", [(3, 5, 7), (2, 9, 4), (10, 1, 6)])
    def test_higher_dimension(self, coords):
        t = ResidueVector.of(31, coords)
        la = antichain_from_lattice(t)
        validate_antichain(build_s_poset(t, la.signs), la.indices)
