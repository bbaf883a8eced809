import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsight.fourier import (
    GridFunction,
    GridSizeError,
    box_indicator_bound_check,
    convolution_theorem_error,
    cyclic_convolution,
    dft,
    dft_direct,
    fourier_suite,
    g_dk_checks,
    inverse_dft,
    lemma_dichotomy_error,
    parseval_check,
    random_grid,
    roundtrip_error,
)
from gridsight.modular import ResidueVector

from .test_modular import residue_vectors


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class TestTransform:
    @pytest.mark.parametrize("p,d", [(3, 1), (5, 2), (3, 3)])
    def test_matches_direct_sum(self, rng, p, d):
        f = random_grid(p, d, rng)
        assert np.allclose(dft(f).values, dft_direct(f), atol=1e-10)

    def test_plus_sign_kernel(self):
        f = GridFunction.indicator(5, 1, [(1,)])
        assert np.allclose(dft(f).values, np.exp(2j * np.pi * np.arange(5) / 5))

    def test_delta_at_origin(self):
        f = GridFunction.indicator(7, 2, [(0, 0)])
        assert np.allclose(dft(f).values, 1)

    @given(st.sampled_from([3, 5, 7, 11, 13]), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_roundtrip_and_parseval(self, p, d, seed):
        rng = np.random.default_rng(seed)
        f, g = random_grid(p, d, rng), random_grid(p, d, rng)
        assert roundtrip_error(f) < 1e-9
        assert parseval_check(f, g) < 1e-9

    def test_inverse(self, rng):
        f = random_grid(7, 2, rng)
        assert np.allclose(inverse_dft(dft(f)).values, f.values)

    def test_size_cap(self):
        with pytest.raises(GridSizeError):
            GridFunction.box(101, 3, 2)

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            GridFunction(5, 2, np.zeros((5, 4)))

    def test_convolution_theorem(self, rng):
        f, g = random_grid(5, 2, rng), random_grid(5, 2, rng)
        assert convolution_theorem_error(f, g) < 1e-9

    def test_convolution_direct(self):
        f = GridFunction.indicator(5, 1, [(1,)])
        g = GridFunction.indicator(5, 1, [(3,)])
        assert np.allclose(cyclic_convolution(f, g).values, GridFunction.indicator(5, 1, [(4,)]).values)


class TestBounds:
    @pytest.mark.parametrize("p,d,n", [(5, 1, 2), (7, 2, 3), (11, 2, 4), (13, 3, 5), (13, 1, 13)])
    def test_box_bound(self, p, d, n):
        r = box_indicator_bound_check(p, d, n)
        assert r.holds

    def test_box_bound_tight_at_zero(self):
        # the zero frequency attains n^d exactly, so the worst slack is 0
        assert box_indicator_bound_check(11, 2, 4).worst_slack == pytest.approx(0, abs=1e-9)

    @given(residue_vectors(primes=[5, 7, 11, 13], dims=(3,)))
    @settings(max_examples=40, deadline=None)
    def test_dichotomy(self, t):
        assert lemma_dichotomy_error(t) < 1e-6

    @given(residue_vectors(primes=[5, 7, 11, 13], dims=(3,)), st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_g_dk(self, t, k):
        r = g_dk_checks(t, k)
        assert r.holds
        assert r.zero_expected == r.side ** (k * t.d)

    def test_g_dk_example(self):
        r = g_dk_checks(ResidueVector.of(11, (3, 7)), 2)
        assert (r.hp, r.side, r.zero_expected) == (5, 3, 729)
        assert r.zero_value == pytest.approx(729)

    def test_g_dk_rejects_k0(self):
        with pytest.raises(ValueError):
            g_dk_checks(ResidueVector.of(11, (3, 7)), 0)


def test_suite_passes():
    r = fourier_suite(max_p=7, seed=3, samples=20)
    assert r["passed"]
