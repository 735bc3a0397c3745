"""Passage times on colored boxes: 0-1 BFS, hop-constrained k-short times,
routes, and reached sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .coloring import ColorField
from .lattice import LatticeBox, LatticePath, Vertex, l1_distance, min_over_box_faces, nearest_site


def _geometry(box: LatticeBox) -> tuple[np.ndarray, np.ndarray]:
    d = box.dimension
    sides = np.full(d, box.side, dtype=np.int64)
    strides = np.empty(d, dtype=np.int64)
    strides[d - 1] = 1
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * box.side
    return sides, strides


def edge_time(field: ColorField, u: Sequence[int], v: Sequence[int]) -> int:
    """t({u,v}) = 1 iff the endpoint colors differ."""
    if l1_distance(u, v) != 1:
        raise ValueError(f"{tuple(u)} and {tuple(v)} are not an edge")
    return 0 if field.color_at(u) == field.color_at(v) else 1


def path_passage_time(field: ColorField, path: LatticePath) -> int:
    return sum(edge_time(field, a, b) for a, b in path.edges)


@dataclass(frozen=True)
class PassageResult:
    """Single-source passage times T(source, .) with optional predecessors."""

    color_field: ColorField = field(repr=False)
    source: Vertex
    dist: np.ndarray = field(repr=False)
    pred: np.ndarray | None = field(repr=False, default=None)

    @property
    def box(self) -> LatticeBox:
        return self.color_field.box

    def distance(self, v: Sequence[int]) -> int:
        return int(self.dist[self.box.flat_index(v)])

    @cached_property
    def min_boundary_distance(self) -> int:
        return int(min_over_box_faces(self.dist.reshape(self.box.shape)))

    def truncation_certified(self, v: Sequence[int]) -> bool:
        """True when no path through the outside of the box can beat dist[v]."""
        return self.distance(v) <= self.min_boundary_distance


def passage_times_from(field: ColorField, source: Sequence[int], want_pred: bool = True) -> PassageResult:
    """Exact single-source 0/1 passage times by deque BFS."""
    box = field.box
    src = box.flat_index(source)
    sides, strides = _geometry(box)
    colors = np.ascontiguousarray(field.colors, dtype=np.int32)
    dist, pred = _kernels.bfs01(colors, sides, strides, np.int64(src), want_pred)
    return PassageResult(
        color_field=field,
        source=tuple(int(c) for c in source),
        dist=dist,
        pred=pred if want_pred else None,
    )


def point_passage_time(field: ColorField, x: Sequence[float], y: Sequence[float]) -> int:
    """T(x*, y*) for real points, under the deterministic rounding rule."""
    xs, ys = nearest_site(x), nearest_site(y)
    box = field.box
    if not (box.contains(xs) and box.contains(ys)):
        raise ValueError("mapped site outside box")
    if xs == ys:
        return 0
    return passage_times_from(field, xs, want_pred=False).distance(ys)


def extract_route(res: PassageResult, target: Sequence[int]) -> LatticePath:
    """Follow predecessors from target back to the source; the result is a route."""
    if res.pred is None:
        raise ValueError("result was computed without predecessors")
    box = res.box
    idx = box.flat_index(target)
    src = box.flat_index(res.source)
    if res.dist[idx] >= 2**30:
        raise ValueError(f"target {tuple(target)} not reached")
    chain = [idx]
    while idx != src:
        idx = int(res.pred[idx])
        if idx < 0:
            raise ValueError("broken predecessor chain")
        chain.append(idx)
    return LatticePath(tuple(box.vertex_at(i) for i in reversed(chain)))


@dataclass(frozen=True)
class ReachedSet:
    """Lattice portion of B(t): vertices with T(source, v) <= t."""

    box: LatticeBox
    threshold: int
    mask: np.ndarray = field(repr=False)
    boundary_touched: bool

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def member_vertices(self) -> np.ndarray:
        """(m, d) array of member coordinates."""
        flat = np.flatnonzero(self.mask)
        coords = np.stack(np.unravel_index(flat, self.box.shape), axis=1)
        return coords.astype(np.int64) - self.box.radius

    def contains(self, v: Sequence[int]) -> bool:
        return bool(self.mask[self.box.flat_index(v)])


def reached_set(res: PassageResult, t: int) -> ReachedSet:
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    mask = res.dist <= t
    touched = bool(res.min_boundary_distance <= t)
    return ReachedSet(box=res.box, threshold=int(t), mask=mask, boundary_touched=touched)


@dataclass(frozen=True)
class KShortResult:
    """Hop-constrained passage times T^k(source, target) for requested targets."""

    source: Vertex
    k: float
    targets: tuple[Vertex, ...]
    budgets: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    feasible: np.ndarray = field(repr=False)

    def value(self, target: Sequence[int]) -> int:
        i = self.targets.index(tuple(int(c) for c in target))
        if not self.feasible[i]:
            raise ValueError(f"no admissible in-box path to {tuple(target)}")
        return int(self.values[i])


def k_short_passage_times(
    field: ColorField, source: Sequence[int], targets: Sequence[Sequence[int]], k_list: Sequence[float]
) -> dict[float, KShortResult]:
    """Batched T^k for several targets and hop factors on one field.

    One cost-layer sweep from the source serves every (target, k) pair; the
    budget for a pair is floor(k * l1(source, target)).
    """
    box = field.box
    if any(k < 1 for k in k_list):
        raise ValueError("hop factors must satisfy k >= 1")
    src = box.flat_index(source)
    tgt_idx = np.array([box.flat_index(t) for t in targets], dtype=np.int64)
    l1s = np.array([l1_distance(source, t) for t in targets], dtype=np.int64)
    ks = sorted(set(float(k) for k in k_list))
    budgets = {k: np.floor(k * l1s).astype(np.int64) for k in ks}
    stop_hops = budgets[min(ks)]
    hop_cap = int(max(int(b.max()) for b in budgets.values()))
    c_cap = int(l1s.max()) + 1
    sides, strides = _geometry(box)
    colors = np.ascontiguousarray(field.colors, dtype=np.int32)
    curves, top = _kernels.kshort_curves(
        colors, sides, strides, np.int64(src), tgt_idx, stop_hops, np.int64(hop_cap), np.int64(c_cap)
    )
    out: dict[float, KShortResult] = {}
    tgt_tuples = tuple(tuple(int(c) for c in t) for t in targets)
    for k in ks:
        vals = np.full(len(targets), -1, dtype=np.int64)
        feas = np.zeros(len(targets), dtype=bool)
        for i in range(len(targets)):
            ok = np.flatnonzero(curves[i, : top + 1] <= budgets[k][i])
            if ok.size:
                vals[i] = ok[0]
                feas[i] = True
        out[k] = KShortResult(
            source=tuple(int(c) for c in source),
            k=k,
            targets=tgt_tuples,
            budgets=budgets[k],
            values=vals,
            feasible=feas,
        )
    return out


def k_short_passage_time(field: ColorField, u: Sequence[int], v: Sequence[int], k: float) -> KShortResult:
    """T^k(u, v): minimum passage time over in-box paths of at most floor(k*l1) edges."""
    return k_short_passage_times(field, u, [v], [k])[float(k)]
