import math

import pytest

from gridsight.construct import (
    build_lower_bound_config,
    enumerate_families,
    fit_loglog,
    geometric_count,
    scaling_experiment,
    svg_loglog,
)
from gridsight.geometry import check_cube_on_edge
from gridsight.modular import primes_between
from gridsight.poset import build_s_poset, upper_half, validate_antichain


class TestFamilies:
    def test_counts(self):
        fams = enumerate_families(13, 3)
        assert [f.coords for f in fams] == [(1, 1), (1, 7), (7, 1), (7, 7)]
        assert len(enumerate_families(7, 3)) == 1
        assert len(enumerate_families(7, 3, spacing=1)) == 36
        assert len(enumerate_families(13, 4)) == 8

    def test_bad_input(self):
        with pytest.raises(ValueError):
            enumerate_families(12, 3)
        with pytest.raises(ValueError):
            enumerate_families(13, 3, spacing=0)


class TestLowerBound:
    def test_p5(self):
        r = build_lower_bound_config(5, 3)
        assert r.predicted_count >= len(r.families) >= 1

    def test_rejects_small_or_composite(self):
        with pytest.raises(ValueError):
            build_lower_bound_config(3, 3)
        with pytest.raises(ValueError):
            build_lower_bound_config(9, 3)

    @pytest.mark.parametrize("p", [11, 13, 17, 23])
    def test_plans_are_upper_half_antichains(self, p):
        r = build_lower_bound_config(p, 3)
        for f in r.families:
            validate_antichain(build_s_poset(f.base, f.signs), f.heights)
            assert all(upper_half(p)(k) for k in f.heights)
            assert all(check_cube_on_edge(f.member, k) for k in f.heights)
            assert len(f.heights) <= max(f.lattice_size, f.exact_size)

    @pytest.mark.parametrize("p", primes_between(11, 53))
    def test_spacing_and_disjointness(self, p):
        r = build_lower_bound_config(p, 3, geometry=False)
        verts = [f.member.coords for f in r.families]
        for i in range(len(verts)):
            for j in range(i):
                assert any(abs(a - b) >= 6 for a, b in zip(verts[i], verts[j]))
        assert r.collisions == 0
        assert r.predicted_count == sum(len(f.heights) for f in r.families)

    def test_p11_frozen(self):
        # three families survive the spacing rule; two lattice plans of 5 and an exact plan of 3
        r = build_lower_bound_config(11, 3)
        assert r.predicted_count == 13
        assert sorted(f.path for f in r.families) == ["exact", "lattice", "lattice"]
        assert len(r.config.cubes) == 13

    def test_model_only_d4(self):
        r = build_lower_bound_config(11, 4)
        assert r.config is None and r.predicted_count > 0

    def test_geometric_floor_p11(self):
        r = build_lower_bound_config(11, 3)
        assert geometric_count(r, rays=16, seed=0) >= sum(len(f.heights) for f in r.families)

    def test_geometric_count_bounded_by_cubes(self):
        r = build_lower_bound_config(13, 3)
        assert geometric_count(r, rays=8, seed=1) <= len(r.config.cubes)


class TestScaling:
    def test_fit(self):
        xs = [2, 4, 8, 16]
        s, b = fit_loglog(xs, [3 * x ** 2.5 for x in xs])
        assert s == pytest.approx(2.5) and b == pytest.approx(math.log(3))

    def test_single_prime(self):
        r = scaling_experiment([11], 3)
        assert r.slope is None and len(r.rows) == 1

    def test_csv_and_svg(self):
        r = scaling_experiment([11, 13, 17], 3)
        lines = r.to_csv().splitlines()
        assert lines[0] == "p,families,predicted,sampled,slope"
        assert len(lines) == 4
        svg = svg_loglog(r)
        assert svg.startswith("<svg") and "slope" in svg and svg.count("<circle") == 3

    def test_geometric_mode(self):
        r = scaling_experiment([5, 7, 11], 3, mode="geometric", rays=4)
        assert all(row.sampled is not None and row.sampled <= row.predicted for row in r.rows)

    def test_errors(self):
        with pytest.raises(ValueError):
            scaling_experiment([11, 15], 3)
        with pytest.raises(ValueError):
            scaling_experiment([11], 4, mode="geometric")
        with pytest.raises(ValueError):
            scaling_experiment([11], 3, mode="other")
