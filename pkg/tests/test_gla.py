import math

import numpy as np
import pytest

from colorfpp import (
    ColoringLaw,
    LatticeBox,
    SiteWeightField,
    WeightModel,
    deviation_frequency,
    estimate_W_limit,
    exact_animal_max,
    heuristic_animal_max,
)
from colorfpp.gla import _origin_animals

from oracle_tools import assert_valid_animal, naive_origin_animals


def weight_field(box, values):
    return SiteWeightField(box=box, weights=np.asarray(values, dtype=np.float64))


class TestExactAnimals:
    def test_n1(self):
        box = LatticeBox(2, 1)
        w = np.arange(9, dtype=np.float64)
        field = weight_field(box, w)
        value, witness = exact_animal_max(field, 1)
        assert witness == ((0, 0),)
        assert value == field.weight_at((0, 0))

    def test_constant_weights(self):
        box = LatticeBox(2, 2)
        field = weight_field(box, np.ones(25))
        for n in (1, 3, 6):
            value, witness = exact_animal_max(field, n)
            assert value == n
            assert_valid_animal(witness, n, box)

    def test_3x3_fixture_matches_naive(self):
        box = LatticeBox(2, 1)
        field = weight_field(box, np.arange(9, dtype=np.float64))
        for n in range(1, 6):
            value, witness = exact_animal_max(field, n)
            best = max(
                field.weights[list(a)].sum() for a in naive_origin_animals(box, n)
            )
            assert value == best
            assert_valid_animal(witness, n, box)

    def test_random_fields_match_naive(self):
        box = LatticeBox(2, 2)
        rng = np.random.default_rng(5)
        for _ in range(3):
            field = weight_field(box, rng.random(25))
            for n in (2, 4, 5):
                value, _ = exact_animal_max(field, n)
                best = max(field.weights[list(a)].sum() for a in naive_origin_animals(box, n))
                assert value == pytest.approx(best, abs=0)

    def test_guard(self):
        box = LatticeBox(2, 2)
        field = weight_field(box, np.ones(25))
        with pytest.raises(ValueError):
            exact_animal_max(field, 13)

    def test_series_nondecreasing(self):
        box = LatticeBox(2, 2)
        rng = np.random.default_rng(6)
        field = weight_field(box, rng.random(25))
        values = [exact_animal_max(field, n)[0] for n in range(1, 8)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_enumeration_count_small(self):
        # origin-containing animals in a wide-open box: n * fixed-polyomino count
        assert _origin_animals(2, 4, 1).shape[0] == 1
        assert _origin_animals(2, 4, 2).shape[0] == 4
        assert _origin_animals(2, 4, 3).shape[0] == 18

    def test_lexicographic_tie_witness(self):
        box = LatticeBox(2, 1)
        field = weight_field(box, np.ones(9))
        _, witness = exact_animal_max(field, 2)
        assert witness == ((-1, 0), (0, 0))


class TestHeuristicAnimals:
    def test_valid_and_below_exact(self):
        box = LatticeBox(2, 2)
        rng = np.random.default_rng(9)
        for trial in range(4):
            field = weight_field(box, rng.random(25))
            for n in (3, 5, 7):
                exact, _ = exact_animal_max(field, n)
                for beam in (1, 2, 4):
                    val, wit = heuristic_animal_max(field, n, beam=beam, seed=trial)
                    assert_valid_animal(wit, n, box)
                    assert val <= exact + 1e-12

    def test_equal_weights_exact(self):
        box = LatticeBox(2, 2)
        field = weight_field(box, np.full(25, 2.0))
        val, wit = heuristic_animal_max(field, 5, beam=1, seed=0)
        assert val == 10.0
        assert_valid_animal(wit, 5, box)

    def test_monotone_in_beam(self):
        box = LatticeBox(2, 2)
        rng = np.random.default_rng(11)
        for trial in range(3):
            field = weight_field(box, rng.random(25))
            vals = [heuristic_animal_max(field, 6, beam=b, seed=trial)[0] for b in (1, 2, 3, 4, 6)]
            assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_wide_beam_reaches_exact(self):
        box = LatticeBox(2, 1)
        rng = np.random.default_rng(13)
        field = weight_field(box, rng.random(9))
        n = 3
        n_animals = _origin_animals(2, 1, n).shape[0]
        exact, _ = exact_animal_max(field, n)
        val, _ = heuristic_animal_max(field, n, beam=n_animals, seed=0)
        assert val == pytest.approx(exact, abs=0)

    def test_box_capacity_guard(self):
        box = LatticeBox(2, 1)
        field = weight_field(box, np.ones(9))
        with pytest.raises(ValueError):
            heuristic_animal_max(field, 10, beam=1, seed=0)


class TestWeightModels:
    def test_constant(self):
        box = LatticeBox(2, 2)
        wf = WeightModel(kind="constant", value=3.0).sample(box, 0)
        assert (wf.weights == 3.0).all() and wf.bound == 3.0

    def test_iid_bernoulli(self):
        box = LatticeBox(2, 40)
        wf = WeightModel(kind="iid_bernoulli", theta=0.3).sample(box, 1)
        assert set(np.unique(wf.weights)) <= {0.0, 1.0}
        assert abs(wf.weights.mean() - 0.3) < 4 * math.sqrt(0.3 * 0.7 / box.n_vertices)

    def test_cluster_weights_capped(self):
        box = LatticeBox(2, 20)
        wf = WeightModel(kind="bernoulli_clusters", theta=0.4, cap=5).sample(box, 2)
        assert wf.weights.max() <= 5.0 and wf.bound == 5.0

    def test_color_squared_weights(self):
        box = LatticeBox(2, 10)
        law = ColoringLaw.uniform(3)
        wf = WeightModel(kind="color_clusters_sq", law=law, cap=100.0).sample(box, 3)
        assert wf.weights.min() >= 1.0  # every vertex sits in a cluster of size >= 1
        assert wf.weights.max() <= 100.0


class TestEstimators:
    def test_deterministic_unit_weight(self):
        series = estimate_W_limit(
            WeightModel(kind="constant", value=1.0), 2, [5, 10], replicas=3, seed=4, box_radius=15
        )
        assert np.allclose(series.mean_ratios, 1.0)
        assert series.w_estimate == 1.0
        assert series.plateau_rel_change == 0.0

    def test_bernoulli_n1_mean(self):
        series = estimate_W_limit(
            WeightModel(kind="iid_bernoulli", theta=0.3), 2, [1], replicas=4000, seed=5, box_radius=3
        )
        se = math.sqrt(0.3 * 0.7 / 4000)
        assert abs(series.mean_ratios[0] - 0.3) <= 4 * se

    def test_deviation_unit_weight_zero(self):
        freq, lo, hi = deviation_frequency(
            WeightModel(kind="constant", value=1.0), 2, 20, 1.0, replicas=50, seed=6, box_radius=25
        )
        assert freq == 0.0

    def test_deviation_n1_matches_tail(self):
        theta = 0.3
        freq, lo, hi = deviation_frequency(
            WeightModel(kind="iid_bernoulli", theta=theta), 2, 1, 0.0, replicas=4000, seed=7, box_radius=2
        )
        # event {W(1) >= 1} = {origin weight = 1}
        assert abs(freq - theta) <= 4 * math.sqrt(theta * (1 - theta) / 4000)

    def test_deviation_refuses_unbounded(self):
        with pytest.raises(ValueError):
            deviation_frequency(
                WeightModel(kind="bernoulli_clusters", theta=0.3), 2, 10, 1.0, replicas=5, seed=8, box_radius=10
            )
