"""Finite centered boxes of Z^d, neighbor iteration, paths, and real-to-lattice rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

Vertex = tuple[int, ...]

# Exhaustive path enumeration is only meant as a brute-force oracle; a 5x5 box
# admits self-avoiding paths of up to 24 edges, which bounds the useful range.
ORACLE_MAX_PATH_LEN = 24


@dataclass(frozen=True)
class LatticeBox:
    """Centered cube [-L, L]^d with row-major flat indexing over axis order."""

    dimension: int
    radius: int

    def __post_init__(self) -> None:
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.side**self.dimension > 2**30:
            raise ValueError("box exceeds 32-bit indexing budget")

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dimension

    @property
    def n_vertices(self) -> int:
        return self.side**self.dimension

    @property
    def origin(self) -> Vertex:
        return (0,) * self.dimension

    def contains(self, v: Sequence[int]) -> bool:
        return len(v) == self.dimension and all(abs(int(c)) <= self.radius for c in v)

    def flat_index(self, v: Sequence[int]) -> int:
        if not self.contains(v):
            raise ValueError(f"vertex {tuple(v)} outside box [-{self.radius}, {self.radius}]^{self.dimension}")
        idx = 0
        for c in v:
            idx = idx * self.side + (int(c) + self.radius)
        return idx

    def vertex_at(self, idx: int) -> Vertex:
        if not 0 <= idx < self.n_vertices:
            raise ValueError(f"flat index {idx} out of range")
        coords = []
        for _ in range(self.dimension):
            idx, rem = divmod(idx, self.side)
            coords.append(rem - self.radius)
        return tuple(reversed(coords))

    def flat_indices(self, vertices: np.ndarray) -> np.ndarray:
        """Vectorized flat_index for an (m, d) integer array."""
        offs = vertices + self.radius
        if offs.min() < 0 or offs.max() >= self.side:
            raise ValueError("vertex array outside box")
        return np.ravel_multi_index(tuple(offs.T), self.shape).astype(np.int64)

    def is_boundary(self, v: Sequence[int]) -> bool:
        return self.contains(v) and any(abs(int(c)) == self.radius for c in v)


def neighbors(v: Sequence[int], box: LatticeBox) -> list[Vertex]:
    """In-box L1 neighbors in the fixed order (-x1, +x1, -x2, +x2, ...)."""
    if not box.contains(v):
        raise ValueError(f"vertex {tuple(v)} outside box")
    out: list[Vertex] = []
    v = tuple(int(c) for c in v)
    for axis in range(box.dimension):
        for delta in (-1, 1):
            c = v[axis] + delta
            if abs(c) <= box.radius:
                out.append(v[:axis] + (c,) + v[axis + 1 :])
    return out


def nearest_site(x: Sequence[float]) -> Vertex:
    """Componentwise nearest lattice point; exact halves round toward -inf."""
    return tuple(int(math.ceil(c - 0.5)) for c in x)


def nearest_sites(points: np.ndarray) -> np.ndarray:
    """Vectorized nearest_site for an (m, d) float array."""
    return np.ceil(np.asarray(points, dtype=np.float64) - 0.5).astype(np.int64)


@dataclass(frozen=True)
class LatticePath:
    """A lattice path given by its vertex sequence; consecutive L1 distance 1."""

    vertices: tuple[Vertex, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) == 0:
            raise ValueError("path needs at least one vertex")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if l1_distance(a, b) != 1:
                raise ValueError(f"non-adjacent step {a} -> {b}")

    @property
    def length(self) -> int:
        """Number of edges."""
        return len(self.vertices) - 1

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> tuple[tuple[Vertex, Vertex], ...]:
        return tuple(zip(self.vertices, self.vertices[1:]))


def l1_distance(u: Sequence[int], v: Sequence[int]) -> int:
    return int(sum(abs(int(a) - int(b)) for a, b in zip(u, v)))


def is_self_avoiding(path: LatticePath) -> bool:
    return len(set(path.vertices)) == len(path.vertices)


def enumerate_self_avoiding_paths(
    u: Sequence[int], v: Sequence[int], max_len: int, box: LatticeBox
) -> Iterator[LatticePath]:
    """Yield every in-box self-avoiding path from u to v with at most max_len edges.

    Brute-force oracle only; refuses budgets beyond ORACLE_MAX_PATH_LEN.
    """
    if max_len > ORACLE_MAX_PATH_LEN:
        raise ValueError(f"max_len {max_len} beyond oracle scale ({ORACLE_MAX_PATH_LEN})")
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    u = tuple(int(c) for c in u)
    v = tuple(int(c) for c in v)
    if not (box.contains(u) and box.contains(v)):
        raise ValueError("endpoints must lie in the box")

    trail: list[Vertex] = [u]
    on_trail = {u}

    def _walk() -> Iterator[LatticePath]:
        cur = trail[-1]
        if cur == v:
            yield LatticePath(tuple(trail))
        budget = max_len - (len(trail) - 1)
        if budget <= 0:
            return
        for w in neighbors(cur, box):
            # any completion needs at least the remaining L1 distance
            if w in on_trail or l1_distance(w, v) > budget - 1:
                continue
            trail.append(w)
            on_trail.add(w)
            yield from _walk()
            trail.pop()
            on_trail.discard(w)

    yield from _walk()


def min_over_box_faces(values: np.ndarray) -> int | float:
    """Minimum of a box-shaped array over the union of its outer faces."""
    best = None
    for axis in range(values.ndim):
        for sl in (0, -1):
            face = np.take(values, sl, axis=axis)
            m = face.min()
            best = m if best is None else min(best, m)
    return best
