import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorfpp import (
    ColoringLaw,
    LatticeBox,
    LawRegionParams,
    color_from_uniform,
    couple_fields,
    disagreement_bound,
    disagreement_exact,
    is_in_region,
    sample_color_field,
    sample_uniform_field,
)
from colorfpp import _kernels
from colorfpp.coloring import colors_from_uniforms, vertex_uniforms

from conftest import law_strategy


class TestColoringLaw:
    def test_sum_must_be_one(self):
        with pytest.raises(ValueError):
            ColoringLaw((0.5, 0.4))

    def test_entries_in_unit_interval(self):
        with pytest.raises(ValueError):
            ColoringLaw((1.5, -0.5))

    def test_sentinel_rules(self):
        ad = ColoringLaw(all_distinct=True)
        assert ad.sup_norm == 0.0
        assert ad.tail_mass(100) == 1.0
        with pytest.raises(ValueError):
            ColoringLaw((1.0,), all_distinct=True)

    def test_cumulative_ends_at_one(self):
        law = ColoringLaw((1 / 3, 1 / 3, 1 / 3))
        assert law.cumulative[-1] == 1.0

    def test_json_round_trip(self, tmp_path):
        law = ColoringLaw((0.25, 0.75))
        path = tmp_path / "law.json"
        path.write_text(json.dumps(law.to_json()))
        assert ColoringLaw.load(path) == law
        ad = ColoringLaw(all_distinct=True)
        path.write_text(json.dumps(ad.to_json()))
        assert ColoringLaw.load(path) == ad


class TestUniformField:
    def test_determinism(self):
        box = LatticeBox(2, 4)
        a = sample_uniform_field(box, 9)
        b = sample_uniform_field(box, 9)
        assert np.array_equal(a.values, b.values)

    def test_nested_boxes_agree(self):
        small = LatticeBox(2, 2)
        big = LatticeBox(2, 5)
        us = sample_uniform_field(small, 31)
        ub = sample_uniform_field(big, 31)
        for idx in range(small.n_vertices):
            v = small.vertex_at(idx)
            assert us.values[idx] == ub.values[big.flat_index(v)]

    def test_different_seeds_differ(self):
        box = LatticeBox(2, 50)  # 101^2 > 10^4 vertices
        a = sample_uniform_field(box, 1).values
        b = sample_uniform_field(box, 2).values
        assert (a != b).mean() >= 0.99

    def test_empirical_mean(self):
        box = LatticeBox(2, 40)
        u = sample_uniform_field(box, 5).values
        sigma = 1.0 / math.sqrt(12 * box.n_vertices)
        assert abs(u.mean() - 0.5) <= 3 * sigma

    def test_bit_identity_with_point_kernel(self):
        box = LatticeBox(3, 2)
        u = vertex_uniforms(box, 77)
        for idx in range(0, box.n_vertices, 5):
            v = np.array(box.vertex_at(idx), dtype=np.int64)
            assert u[idx] == _kernels.point_uniform(np.uint64(77), v)


class TestColorFromUniform:
    def test_single_color(self):
        law = ColoringLaw((1.0,))
        assert color_from_uniform(0.0, law) == 1
        assert color_from_uniform(0.999, law) == 1

    def test_partition_formula(self):
        law = ColoringLaw((0.5, 0.5))
        assert color_from_uniform(0.25, law) == 1
        assert color_from_uniform(0.75, law) == 2

    def test_half_open_boundary(self):
        law = ColoringLaw((0.5, 0.5))
        assert color_from_uniform(0.5, law) == 2

    def test_domain_error(self):
        with pytest.raises(ValueError):
            color_from_uniform(1.0, ColoringLaw((1.0,)))
        with pytest.raises(ValueError):
            color_from_uniform(-0.1, ColoringLaw((1.0,)))

    @given(law_strategy(), st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=40, deadline=None)
    def test_scalar_matches_vectorized(self, law, raw):
        u = raw / 2**33  # in [0, 0.5]
        assert color_from_uniform(u, law) == colors_from_uniforms(np.array([u]), law)[0]

    def test_marginal_frequencies(self):
        law = ColoringLaw((0.2, 0.3, 0.5))
        box = LatticeBox(2, 60)
        field = sample_color_field(box, law, 8)
        n = box.n_vertices
        for i, p in enumerate(law.probabilities, start=1):
            freq = (field.colors == i).mean()
            assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / n)


class TestCoupling:
    def test_identical_laws_identical_fields(self):
        box = LatticeBox(2, 10)
        uf = sample_uniform_field(box, 3)
        f1, f2 = couple_fields(uf, [ColoringLaw((0.5, 0.5)), ColoringLaw((0.5, 0.5))])
        assert np.array_equal(f1.colors, f2.colors)

    def test_disagreement_interval(self):
        box = LatticeBox(2, 20)
        uf = sample_uniform_field(box, 17)
        p, q = ColoringLaw((0.5, 0.5)), ColoringLaw((0.4, 0.6))
        fp, fq = couple_fields(uf, [p, q])
        expected = (uf.values >= 0.4) & (uf.values < 0.5)
        assert np.array_equal(fp.colors != fq.colors, expected)

    def test_disjoint_assignments_disagree_everywhere(self):
        box = LatticeBox(2, 5)
        uf = sample_uniform_field(box, 4)
        f1, f2 = couple_fields(uf, [ColoringLaw((1.0,)), ColoringLaw((0.0, 1.0))])
        assert (f1.colors != f2.colors).all()

    @given(law_strategy(), law_strategy())
    @settings(max_examples=30, deadline=None)
    def test_empirical_disagreement_near_exact(self, p, q):
        delta = disagreement_exact(p, q)
        box = LatticeBox(2, 35)
        uf = sample_uniform_field(box, 2)
        fp, fq = couple_fields(uf, [p, q])
        emp = (fp.colors != fq.colors).mean()
        tol = 4 * math.sqrt(max(delta * (1 - delta), 1e-12) / box.n_vertices) + 1e-9
        assert abs(emp - delta) <= tol


class TestDisagreement:
    def test_identical_zero(self):
        p = ColoringLaw((0.3, 0.7))
        assert disagreement_exact(p, p) == 0.0

    def test_known_value(self):
        assert abs(disagreement_exact(ColoringLaw((0.5, 0.5)), ColoringLaw((0.4, 0.6))) - 0.1) < 1e-12

    def test_disjoint_partitions(self):
        assert disagreement_exact(ColoringLaw((1.0,)), ColoringLaw((0.0, 1.0))) == 1.0

    @given(law_strategy(), law_strategy())
    @settings(max_examples=50, deadline=None)
    def test_at_least_total_variation(self, p, q):
        # any coupling disagrees at least as often as the total variation
        assert disagreement_exact(p, q) >= 0.5 * p.l1_distance(q) - 1e-12

    @given(law_strategy(max_colors=2), law_strategy(max_colors=2))
    @settings(max_examples=50, deadline=None)
    def test_bounded_by_l1_for_two_colors(self, p, q):
        # the L1 bound holds without index shifts; with more colors the
        # shared-uniform coupling can shift whole intervals and exceed L1
        assert disagreement_exact(p, q) <= p.l1_distance(q) + 1e-12

    @given(law_strategy(), law_strategy())
    @settings(max_examples=50, deadline=None)
    def test_symmetry(self, p, q):
        assert abs(disagreement_exact(p, q) - disagreement_exact(q, p)) < 1e-12

    @given(law_strategy(), law_strategy(), law_strategy())
    @settings(max_examples=50, deadline=None)
    def test_triangle(self, p, q, r):
        assert disagreement_exact(p, r) <= disagreement_exact(p, q) + disagreement_exact(q, r) + 1e-12


class TestDisagreementBound:
    def test_equal_laws_zero(self):
        p = ColoringLaw((0.4, 0.6))
        assert disagreement_bound(p, p, 2) == 0.0

    def test_displayed_formula(self):
        val = disagreement_bound(ColoringLaw((0.5, 0.5)), ColoringLaw((0.4, 0.6)), 2)
        assert abs(val - 0.6) < 1e-12

    def test_tail_term(self):
        p = ColoringLaw((0.5, 0.5))
        assert abs(disagreement_bound(p, p, 1) - 0.5) < 1e-12

    @given(law_strategy(), law_strategy(), st.integers(min_value=1, max_value=8))
    @settings(max_examples=60, deadline=None)
    def test_dominates_exact(self, p, q, S):
        assert disagreement_bound(p, q, S) >= disagreement_exact(p, q) - 1e-12


class TestRegion:
    def test_examples(self):
        p = ColoringLaw((0.5, 0.5))
        assert is_in_region(p, LawRegionParams(theta=0.55, S=5))
        assert not is_in_region(p, LawRegionParams(theta=0.5, S=5))
        u20 = ColoringLaw.uniform(20)
        assert not is_in_region(u20, LawRegionParams(theta=0.1, S=5))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            LawRegionParams(theta=0.0, S=5)
        with pytest.raises(ValueError):
            LawRegionParams(theta=0.3, S=4)
        LawRegionParams(theta=0.3, S=5).validate_subcritical(2)
        with pytest.raises(ValueError):
            LawRegionParams(theta=0.62, S=5).validate_subcritical(2)

    def test_sentinel_not_in_region(self):
        assert not is_in_region(ColoringLaw(all_distinct=True), LawRegionParams(theta=0.5, S=5))
