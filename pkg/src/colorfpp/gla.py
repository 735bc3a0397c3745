"""Greedy lattice animals: exact maxima by rooted enumeration at small sizes,
beam/greedy heuristics at scale, limit-ratio estimation, and the bounded-weight
large-deviation frequency check."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import ndimage

from ._util import binomial_ci, parallel_map
from .clusters import decompose_clusters, sample_bernoulli_field
from .coloring import (
    DOMAIN_REPLICA,
    DOMAIN_WEIGHTS,
    ColoringLaw,
    derive_seed,
    mix64_int,
    sample_color_field,
    vertex_uniforms,
)
from .lattice import LatticeBox, Vertex

EXACT_GUARDS = {2: 12, 3: 9}
_REBUILD_EVERY = 128


@dataclass(frozen=True)
class SiteWeightField:
    """Nonnegative site weights on a box; bound is the declared upper limit y."""

    box: LatticeBox
    weights: np.ndarray = field(repr=False)
    bound: float | None = None

    def __post_init__(self) -> None:
        w = self.weights
        if w.size != self.box.n_vertices:
            raise ValueError("weight array does not match the box")
        if w.min() < 0:
            raise ValueError("weights must be nonnegative")
        if self.bound is not None and w.max() > self.bound:
            raise ValueError("weights exceed the declared bound")

    def weight_at(self, v: Sequence[int]) -> float:
        return float(self.weights[self.box.flat_index(v)])


@dataclass(frozen=True)
class WeightModel:
    """Recipe for sampling a SiteWeightField; bound None means unbounded."""

    kind: str
    value: float = 1.0
    theta: float = 0.3
    law: ColoringLaw | None = None
    cap: float | None = None

    @property
    def bound(self) -> float | None:
        if self.kind == "constant":
            return self.value
        if self.kind == "iid_bernoulli":
            return 1.0
        return self.cap

    def sample(self, box: LatticeBox, seed: int) -> SiteWeightField:
        if self.kind == "constant":
            w = np.full(box.n_vertices, float(self.value))
        elif self.kind == "iid_bernoulli":
            u = vertex_uniforms(box, derive_seed(seed, DOMAIN_WEIGHTS))
            w = (u < self.theta).astype(np.float64)
        elif self.kind == "bernoulli_clusters":
            bf = sample_bernoulli_field(box, self.theta, seed)
            w = bf.sizes.astype(np.float64)
            if self.cap is not None:
                w = np.minimum(w, self.cap)
        elif self.kind == "color_clusters_sq":
            if self.law is None:
                raise ValueError("color weight model needs a law")
            cf = sample_color_field(box, self.law, seed)
            dec = decompose_clusters(cf)
            w = dec.sizes.astype(np.float64) ** 2
            if self.cap is not None:
                w = np.minimum(w, self.cap)
        else:
            raise ValueError(f"unknown weight model {self.kind!r}")
        return SiteWeightField(box=box, weights=w, bound=self.bound)


def _guard_exact(d: int, n: int) -> None:
    if d not in EXACT_GUARDS:
        raise ValueError(f"no exact enumeration guard for d={d}")
    if n > EXACT_GUARDS[d]:
        raise ValueError(f"n={n} beyond exact enumeration guard ({EXACT_GUARDS[d]} in d={d})")
    if n < 1:
        raise ValueError("n must be >= 1")


@lru_cache(maxsize=16)
def _origin_animals(dimension: int, radius: int, n: int) -> np.ndarray:
    """All in-box connected n-sets containing the origin, one row each.

    Rooted untried-set growth generates every animal exactly once; rows hold
    sorted flat indices.
    """
    box = LatticeBox(dimension, radius)
    nvert = box.n_vertices
    nbrs: list[list[int]] = [[] for _ in range(nvert)]
    for idx in range(nvert):
        v = box.vertex_at(idx)
        for axis in range(dimension):
            for delta in (-1, 1):
                c = v[axis] + delta
                if abs(c) <= radius:
                    w = v[:axis] + (c,) + v[axis + 1 :]
                    nbrs[idx].append(box.flat_index(w))
    origin = box.flat_index(box.origin)
    seen = bytearray(nvert)
    seen[origin] = 1
    out: list[tuple[int, ...]] = []
    animal: list[int] = []

    def grow(untried: list[int]) -> None:
        for i in range(len(untried)):
            c = untried[i]
            animal.append(c)
            if len(animal) == n:
                out.append(tuple(sorted(animal)))
            else:
                new = [w for w in nbrs[c] if not seen[w]]
                for w in new:
                    seen[w] = 1
                grow(untried[i + 1 :] + new)
                for w in new:
                    seen[w] = 0
            animal.pop()

    grow([origin])
    return np.array(out, dtype=np.int32).reshape(len(out), n)


def exact_animal_max(weights: SiteWeightField, n: int) -> tuple[float, tuple[Vertex, ...]]:
    """Exact W(n) over origin-containing animals, with the lexicographically
    smallest maximizing witness."""
    box = weights.box
    _guard_exact(box.dimension, n)
    animals = _origin_animals(box.dimension, box.radius, n)
    scores = weights.weights[animals].sum(axis=1)
    best = scores.max()
    ties = np.flatnonzero(scores == best)
    rows = [tuple(int(i) for i in animals[t]) for t in ties]
    witness_row = min(rows)
    witness = tuple(box.vertex_at(i) for i in witness_row)
    return float(best), witness


def _high_distance(weights_nd: np.ndarray, absorbed: np.ndarray, high_cut: float) -> np.ndarray:
    """Taxicab distance to the nearest unabsorbed high-weight site."""
    high = (weights_nd >= high_cut) & ~absorbed
    if not high.any():
        return np.zeros(weights_nd.shape, dtype=np.int32)
    return ndimage.distance_transform_cdt(~high, metric="taxicab").astype(np.int32)


def _high_cut(weights: np.ndarray) -> float:
    positive = weights[weights > 0]
    if positive.size == 0:
        return math.inf
    return float(np.quantile(positive, 0.9))


def _greedy_run(
    weights: SiteWeightField, n: int, seed: int, checkpoints: Sequence[int] | None = None
) -> tuple[dict[int, float], tuple[Vertex, ...], bool]:
    """Greedy growth: best frontier weight first, deserts crossed toward the
    nearest remaining high-weight island; returns totals at checkpoints."""
    box = weights.box
    if n > box.n_vertices:
        raise ValueError("box cannot host an animal of this size")
    marks = sorted(set(checkpoints or [n]))
    if marks[-1] != n:
        raise ValueError("largest checkpoint must equal n")
    shape = box.shape
    wnd = weights.weights.reshape(shape)
    d = box.dimension
    in_animal = np.zeros(shape, dtype=bool)
    in_frontier = np.zeros(shape, dtype=bool)
    cut = _high_cut(weights.weights)
    dist = _high_distance(wnd, in_animal, cut)

    heap: list[tuple] = []

    def tie(pos: tuple[int, ...]) -> int:
        return mix64_int(seed ^ box.flat_index(tuple(int(c) - box.radius for c in pos)))

    def push(pos: tuple[int, ...]) -> None:
        if all(0 <= c < box.side for c in pos) and not in_animal[pos] and not in_frontier[pos]:
            in_frontier[pos] = True
            heapq.heappush(heap, (-wnd[pos], dist[pos], tie(pos), pos))

    center = (box.radius,) * d
    in_animal[center] = True
    total = float(wnd[center])
    sites = [center]
    for axis in range(d):
        for delta in (-1, 1):
            push(center[:axis] + (center[axis] + delta,) + center[axis + 1 :])

    totals: dict[int, float] = {}
    if 1 in marks:
        totals[1] = total
    since_rebuild = 0
    for size in range(2, n + 1):
        negw, _, _, pos = heapq.heappop(heap)
        in_animal[pos] = True
        in_frontier[pos] = False
        total += -negw
        sites.append(pos)
        for axis in range(d):
            for delta in (-1, 1):
                push(pos[:axis] + (pos[axis] + delta,) + pos[axis + 1 :])
        if size in marks:
            totals[size] = total
        since_rebuild += 1
        if since_rebuild >= _REBUILD_EVERY and size < n:
            since_rebuild = 0
            dist = _high_distance(wnd, in_animal, cut)
            heap = [(-wnd[p], dist[p], tie(p), p) for (_, _, _, p) in heap if in_frontier[p]]
            heapq.heapify(heap)

    witness = tuple(sorted(tuple(int(c) - box.radius for c in p) for p in sites))
    touched = any(abs(c) == box.radius for v in witness for c in v)
    return totals, witness, touched


def _beam_run(weights: SiteWeightField, n: int, width: int, seed: int) -> tuple[float, tuple[Vertex, ...]]:
    """Synchronized beam search keeping the `width` best partial animals per size."""
    box = weights.box
    wnd = weights.weights.reshape(box.shape)
    d = box.dimension
    cut = _high_cut(weights.weights)
    dist = _high_distance(wnd, np.zeros(box.shape, dtype=bool), cut)
    center = (box.radius,) * d

    def expansions(sites: frozenset) -> set:
        out = set()
        for pos in sites:
            for axis in range(d):
                for delta in (-1, 1):
                    q = pos[:axis] + (pos[axis] + delta,) + pos[axis + 1 :]
                    if all(0 <= c < box.side for c in q) and q not in sites:
                        out.add(q)
        return out

    beam: dict[frozenset, float] = {frozenset([center]): float(wnd[center])}
    for _ in range(n - 1):
        candidates: dict[frozenset, float] = {}
        for sites, total in beam.items():
            for q in expansions(sites):
                grown = sites | {q}
                cand = frozenset(grown)
                if cand not in candidates:
                    candidates[cand] = total + float(wnd[q])
        ranked = sorted(
            candidates.items(),
            key=lambda kv: (-kv[1], min(dist[p] for p in kv[0]), tuple(sorted(kv[0]))),
        )
        beam = dict(ranked[:width])
    best_total = max(beam.values())
    ordered = min(
        (sites for sites, total in beam.items() if total == best_total),
        key=lambda s: tuple(sorted(s)),
    )
    witness = tuple(sorted(tuple(int(c) - box.radius for c in p) for p in ordered))
    return float(best_total), witness


def heuristic_animal_max(
    weights: SiteWeightField, n: int, beam: int = 1, seed: int = 0
) -> tuple[float, tuple[Vertex, ...]]:
    """Heuristic lower bound on W(n): best result over beam widths 1..beam.

    Taking the running best across widths makes the value nondecreasing in the
    beam parameter by construction; width 1 is the directed greedy.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > weights.box.n_vertices:
        raise ValueError("box cannot host an animal of this size")
    totals, witness, _ = _greedy_run(weights, n, seed)
    best_value, best_witness = totals[n], witness
    for width in range(2, beam + 1):
        value, wit = _beam_run(weights, n, width, seed)
        if value > best_value or (value == best_value and wit < best_witness):
            best_value, best_witness = value, wit
    return best_value, best_witness


@dataclass(frozen=True)
class AnimalWeightSeries:
    """Replica means of W(n)/n over a size grid with a plateau diagnostic."""

    model: WeightModel
    n_grid: tuple[int, ...]
    mean_ratios: np.ndarray = field(repr=False)
    ci_low: np.ndarray = field(repr=False)
    ci_high: np.ndarray = field(repr=False)
    mode: str
    replicas: int
    boundary_touched: int
    w_estimate: float
    plateau_rel_change: float


def estimate_W_limit(
    model: WeightModel,
    d: int,
    n_grid: Sequence[int],
    replicas: int,
    seed: int,
    box_radius: int,
    threads: int = 1,
) -> AnimalWeightSeries:
    """Monte Carlo W(n)/n trace under heuristic (greedy) maximization."""
    n_grid = tuple(sorted(int(n) for n in n_grid))
    box = LatticeBox(d, box_radius)

    def one(r: int):
        sd = derive_seed(seed, DOMAIN_REPLICA, r)
        wf = model.sample(box, sd)
        totals, _, touched = _greedy_run(wf, n_grid[-1], sd, checkpoints=n_grid)
        return totals, touched

    results = parallel_map(one, list(range(replicas)), threads)
    ratios = np.array([[totals[n] / n for n in n_grid] for totals, _ in results])
    touched_count = sum(1 for _, t in results if t)
    means = ratios.mean(axis=0)
    sd = ratios.std(axis=0, ddof=1) if replicas > 1 else np.zeros(len(n_grid))
    half = 1.96 * sd / math.sqrt(replicas)
    rel = abs(means[-1] - means[-2]) / means[-2] if len(n_grid) > 1 and means[-2] > 0 else math.nan
    return AnimalWeightSeries(
        model=model,
        n_grid=n_grid,
        mean_ratios=means,
        ci_low=means - half,
        ci_high=means + half,
        mode="heuristic",
        replicas=int(replicas),
        boundary_touched=touched_count,
        w_estimate=float(means[-1]),
        plateau_rel_change=float(rel),
    )


def deviation_frequency(
    model: WeightModel,
    d: int,
    n: int,
    w_ref: float,
    replicas: int,
    seed: int,
    box_radius: int,
    threads: int = 1,
) -> tuple[float, float, float]:
    """Empirical frequency of {W(n)/n >= w_ref + 1} with its binomial interval.

    Only bounded weight models are admissible (the large-deviation regime
    needs a declared bound)."""
    if model.bound is None:
        raise ValueError("deviation frequency requires a bounded weight model")
    box = LatticeBox(d, box_radius)

    def one(r: int) -> bool:
        sd = derive_seed(seed, DOMAIN_REPLICA, r)
        wf = model.sample(box, sd)
        totals, _, _ = _greedy_run(wf, n, sd)
        return totals[n] / n >= w_ref + 1.0

    hits = sum(parallel_map(one, list(range(replicas)), threads))
    return binomial_ci(int(hits), replicas)
