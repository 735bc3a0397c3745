import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorfpp.lattice import (
    LatticeBox,
    LatticePath,
    enumerate_self_avoiding_paths,
    is_self_avoiding,
    l1_distance,
    min_over_box_faces,
    nearest_site,
    neighbors,
)


class TestLatticeBox:
    def test_vertex_count(self):
        assert LatticeBox(2, 2).n_vertices == 25
        assert LatticeBox(3, 1).n_vertices == 27

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            LatticeBox(1, 3)
        with pytest.raises(ValueError):
            LatticeBox(2, 0)

    def test_flat_index_round_trip(self):
        box = LatticeBox(2, 3)
        for idx in range(box.n_vertices):
            assert box.flat_index(box.vertex_at(idx)) == idx

    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=2, max_value=3))
    @settings(max_examples=10, deadline=None)
    def test_round_trip_any_dim(self, radius, d):
        box = LatticeBox(d, radius)
        for idx in range(0, box.n_vertices, 7):
            assert box.flat_index(box.vertex_at(idx)) == idx

    def test_degree_bounds(self):
        box = LatticeBox(2, 2)
        degs = [len(neighbors(box.vertex_at(i), box)) for i in range(box.n_vertices)]
        assert min(degs) == 2 and max(degs) == 4

    def test_out_of_box_raises(self):
        box = LatticeBox(2, 2)
        with pytest.raises(ValueError):
            box.flat_index((3, 0))
        with pytest.raises(ValueError):
            neighbors((3, 0), box)


class TestNeighbors:
    def test_interior_degree_2d(self):
        box = LatticeBox(2, 2)
        assert len(neighbors((0, 0), box)) == 4

    def test_corner_degree(self):
        box = LatticeBox(2, 2)
        assert len(neighbors((2, 2), box)) == 2

    def test_face_degree(self):
        box = LatticeBox(2, 2)
        assert len(neighbors((2, 0), box)) == 3

    def test_fixed_order(self):
        box = LatticeBox(2, 2)
        assert neighbors((0, 0), box) == [(-1, 0), (1, 0), (0, -1), (0, 1)]

    def test_symmetry(self):
        box = LatticeBox(2, 2)
        for i in range(box.n_vertices):
            v = box.vertex_at(i)
            for w in neighbors(v, box):
                assert v in neighbors(w, box)


class TestNearestSite:
    def test_plain_rounding(self):
        assert nearest_site((0.4, -0.4)) == (0, 0)

    def test_half_toward_minus_inf(self):
        assert nearest_site((0.5, 1.5)) == (0, 1)
        assert nearest_site((-0.5, -1.5)) == (-1, -2)

    def test_identity_on_lattice(self):
        assert nearest_site((3.0, -2.0)) == (3, -2)

    @given(
        st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=2, max_size=3),
        st.lists(st.integers(min_value=-100, max_value=100), min_size=3, max_size=3),
    )
    @settings(max_examples=60, deadline=None)
    def test_translation_equivariance(self, x, shift):
        x = tuple(x)
        e = tuple(shift[: len(x)])
        shifted = nearest_site(tuple(a + b for a, b in zip(x, e)))
        base = nearest_site(x)
        # float addition of integers below 2^40 to these values is exact
        assert shifted == tuple(a + b for a, b in zip(base, e))


class TestPaths:
    def test_path_validation(self):
        with pytest.raises(ValueError):
            LatticePath(((0, 0), (1, 1)))
        p = LatticePath(((0, 0), (1, 0), (1, 1)))
        assert p.length == 2 and p.n_vertices == 3

    def test_self_avoiding(self):
        assert is_self_avoiding(LatticePath(((0, 0), (1, 0), (1, 1))))
        assert not is_self_avoiding(LatticePath(((0, 0), (1, 0), (0, 0))))
        assert is_self_avoiding(LatticePath(((0, 0),)))

    def test_enumerate_trivial(self):
        box = LatticeBox(2, 2)
        paths = list(enumerate_self_avoiding_paths((0, 0), (0, 0), 0, box))
        assert len(paths) == 1 and paths[0].length == 0

    def test_enumerate_two_staircases(self):
        box = LatticeBox(2, 2)
        paths = list(enumerate_self_avoiding_paths((0, 0), (1, 1), 2, box))
        assert len(paths) == 2

    def test_enumerate_straight(self):
        box = LatticeBox(2, 2)
        paths = list(enumerate_self_avoiding_paths((0, 0), (2, 0), 2, box))
        assert len(paths) == 1

    def test_enumerate_guard(self):
        box = LatticeBox(2, 2)
        with pytest.raises(ValueError):
            next(enumerate_self_avoiding_paths((0, 0), (1, 0), 25, box))

    def test_length_parity_invariant(self):
        box = LatticeBox(2, 2)
        u, v = (0, 0), (1, 2)
        base = l1_distance(u, v)
        for path in enumerate_self_avoiding_paths(u, v, 9, box):
            assert path.length >= base
            assert (path.length - base) % 2 == 0


def test_min_over_box_faces():
    arr = np.arange(25).reshape(5, 5)
    assert min_over_box_faces(arr) == 0
    arr = np.full((3, 3), 9)
    arr[1, 1] = 0  # interior must not count
    assert min_over_box_faces(arr) == 9
