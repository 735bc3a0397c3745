"""Color-cluster decompositions, color truncation, Bernoulli site percolation,
the path chain inequality, tail estimation, and marginal domination checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from . import _kernels
from ._util import binomial_ci
from .coloring import (
    DOMAIN_BERNOULLI,
    DOMAIN_REPLICA,
    PC_SITE,
    ColorField,
    ColoringLaw,
    LawRegionParams,
    derive_seed,
    is_in_region,
    vertex_uniforms,
)
from .lattice import LatticeBox, LatticePath, is_self_avoiding
from .passage import path_passage_time

HARD_GROWTH_CAP = 10**6


@dataclass(frozen=True)
class ClusterDecomposition:
    """Partition of a box into maximal monochromatic connected clusters.

    Cluster ids are canonical: the smallest flat index in the cluster.
    """

    box: LatticeBox
    labels: np.ndarray = field(repr=False)
    sizes: np.ndarray = field(repr=False)
    n_clusters: int

    def cluster_id(self, v: Sequence[int]) -> int:
        return int(self.labels[self.box.flat_index(v)])

    def cluster_size(self, v: Sequence[int]) -> int:
        return int(self.sizes[self.box.flat_index(v)])


def _components_same_color(colors: np.ndarray, box: LatticeBox) -> tuple[np.ndarray, np.ndarray, int]:
    """(canonical labels, per-vertex sizes, count) of same-color components."""
    shape = box.shape
    n = box.n_vertices
    grid = colors.reshape(shape)
    idx = np.arange(n, dtype=np.int64).reshape(shape)
    rows = []
    cols = []
    for axis in range(box.dimension):
        lo = [slice(None)] * box.dimension
        hi = [slice(None)] * box.dimension
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        eq = grid[tuple(lo)] == grid[tuple(hi)]
        rows.append(idx[tuple(lo)][eq].ravel())
        cols.append(idx[tuple(hi)][eq].ravel())
    r = np.concatenate(rows) if rows else np.empty(0, np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, np.int64)
    graph = sparse.coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(n, n))
    n_comp, comp = csgraph.connected_components(graph, directed=False)
    minidx = np.full(n_comp, n, dtype=np.int64)
    np.minimum.at(minidx, comp, np.arange(n, dtype=np.int64))
    counts = np.bincount(comp, minlength=n_comp)
    return minidx[comp], counts[comp].astype(np.int64), int(n_comp)


def decompose_clusters(field_: ColorField) -> ClusterDecomposition:
    labels, sizes, n_comp = _components_same_color(field_.colors, field_.box)
    return ClusterDecomposition(box=field_.box, labels=labels, sizes=sizes, n_clusters=n_comp)


def truncated_color_field(field_: ColorField, S: int) -> ColorField:
    """Colors above S merged into the single color S+1."""
    if S < 1:
        raise ValueError("S must be >= 1")
    merged = np.minimum(field_.colors.astype(np.int64), S + 1).astype(field_.colors.dtype)
    return ColorField(box=field_.box, law=field_.law, colors=merged)


@dataclass(frozen=True)
class TruncatedDecomposition:
    """Decomposition after the color-S truncation map."""

    S: int
    base: ClusterDecomposition
    merged: ClusterDecomposition
    merged_field: ColorField = field(repr=False)

    def truncated_size(self, v: Sequence[int]) -> int:
        """|C_v^s| summed over s <= S+1: the truncated cluster containing v."""
        return self.merged.cluster_size(v)


def truncate_colors(dec: ClusterDecomposition, field_: ColorField, S: int) -> TruncatedDecomposition:
    merged_field = truncated_color_field(field_, S)
    merged = decompose_clusters(merged_field)
    return TruncatedDecomposition(S=int(S), base=dec, merged=merged, merged_field=merged_field)


@dataclass(frozen=True)
class ChainReport:
    """The four chained quantities of the cluster inequality, plus the
    S-truncated refinement, all exact rationals where division occurs."""

    n_vertices: int
    passage_time: int
    clusters_touched: int
    reciprocal_sum: Fraction
    jensen_term: Fraction
    full_cluster_term: Fraction
    truncated_term: Fraction

    def as_floats(self) -> tuple[float, ...]:
        return (
            float(1 + self.passage_time),
            float(self.clusters_touched),
            float(self.jensen_term),
            float(self.full_cluster_term),
            float(self.truncated_term),
        )


def chain_inequality_check(field_: ColorField, r: LatticePath, S: int) -> ChainReport:
    """Verify 1 + T(r) >= #clusters touched >= Jensen term >= cluster-mass terms.

    All quantities are computed exactly; a violation raises AssertionError
    since the chain holds pathwise for every coloring.
    """
    if not is_self_avoiding(r):
        raise ValueError("path must be self-avoiding")
    box = field_.box
    flat = [box.flat_index(v) for v in r.vertices]
    dec = decompose_clusters(field_)
    trunc = truncate_colors(dec, field_, S)

    t_r = path_passage_time(field_, r)
    labels = [int(dec.labels[i]) for i in flat]
    touched = len(set(labels))
    counts: dict[int, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    reciprocal_sum = sum((Fraction(1, counts[lab]) for lab in labels), Fraction(0))
    n = len(flat)
    jensen = Fraction(n, sum(counts[lab] for lab in labels))
    full = Fraction(n, int(sum(int(dec.sizes[i]) for i in flat)))
    truncated = Fraction(n, int(sum(int(trunc.merged.sizes[i]) for i in flat)))

    report = ChainReport(
        n_vertices=n,
        passage_time=t_r,
        clusters_touched=touched,
        reciprocal_sum=reciprocal_sum,
        jensen_term=jensen,
        full_cluster_term=full,
        truncated_term=truncated,
    )
    if reciprocal_sum != touched:
        raise AssertionError(f"cluster count mismatch: {reciprocal_sum} != {touched}")
    if not (1 + t_r >= touched and Fraction(touched) >= jensen >= full >= truncated):
        raise AssertionError(f"chain inequality violated: {report}")
    return report


# ---------------------------------------------------------------------------
# Bernoulli site percolation


@dataclass(frozen=True)
class BernoulliField:
    """Occupied/vacant field of parameter theta with its cluster decomposition."""

    box: LatticeBox
    theta: float
    seed: int
    occupied: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    sizes: np.ndarray = field(repr=False)
    n_clusters: int

    def occupation_density(self) -> float:
        return float(self.occupied.mean())

    def cluster_size(self, v: Sequence[int]) -> int:
        """|C_v|; zero on vacant vertices."""
        return int(self.sizes[self.box.flat_index(v)])


def bernoulli_uniform_seed(seed: int) -> int:
    return derive_seed(seed, DOMAIN_BERNOULLI)


def sample_bernoulli_field(box: LatticeBox, theta: float, seed: int) -> BernoulliField:
    """Occupied iff the domain-separated counter uniform is below theta."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    u = vertex_uniforms(box, bernoulli_uniform_seed(seed))
    occ = (u < theta).reshape(box.shape)
    structure = ndimage.generate_binary_structure(box.dimension, 1)
    labels, n_comp = ndimage.label(occ, structure=structure)
    counts = np.bincount(labels.ravel(), minlength=n_comp + 1)
    counts[0] = 0
    sizes = counts[labels.ravel()].astype(np.int64)
    return BernoulliField(
        box=box,
        theta=float(theta),
        seed=int(seed),
        occupied=occ.ravel(),
        labels=labels.ravel().astype(np.int64),
        sizes=sizes,
        n_clusters=int(n_comp),
    )


@dataclass(frozen=True)
class TailCurve:
    """Monte Carlo estimates of P(|C_0| >= n) with binomial intervals."""

    theta: float
    dimension: int
    n_grid: tuple[int, ...]
    estimates: np.ndarray = field(repr=False)
    ci_low: np.ndarray = field(repr=False)
    ci_high: np.ndarray = field(repr=False)
    replicas: int
    capped: int
    subcritical: bool


def cluster_tail_estimate(
    theta: float,
    d: int,
    n_grid: Sequence[int],
    replicas: int,
    seed: int,
    cap: int | None = None,
    pc_table: dict[int, float] | None = None,
) -> TailCurve:
    """Estimate P(|C_0| >= n) by lazy origin-cluster growth.

    Growth stops at the cap; capped samples count as >= n for every n in the
    grid (the grid never exceeds the cap) and are reported separately.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    n_grid = tuple(sorted(int(n) for n in n_grid))
    if n_grid[0] < 1:
        raise ValueError("grid sizes must be >= 1")
    table = PC_SITE if pc_table is None else pc_table
    subcritical = d in table and theta < table[d]
    if cap is None:
        cap = n_grid[-1]
    cap = min(int(cap), HARD_GROWTH_CAP)
    if cap < n_grid[-1]:
        raise ValueError("cap below the largest requested size")
    seeds = np.array(
        [bernoulli_uniform_seed(derive_seed(seed, DOMAIN_REPLICA, r)) for r in range(replicas)],
        dtype=np.uint64,
    )
    sizes = _kernels.bernoulli_sizes_batch(seeds, float(theta), np.int64(d), np.int64(cap))
    est = np.empty(len(n_grid))
    lo = np.empty(len(n_grid))
    hi = np.empty(len(n_grid))
    for i, n in enumerate(n_grid):
        p, a, b = binomial_ci(int((sizes >= n).sum()), replicas)
        est[i], lo[i], hi[i] = p, a, b
    return TailCurve(
        theta=float(theta),
        dimension=int(d),
        n_grid=n_grid,
        estimates=est,
        ci_low=lo,
        ci_high=hi,
        replicas=int(replicas),
        capped=int((sizes >= cap).sum()),
        subcritical=bool(subcritical),
    )


@dataclass(frozen=True)
class DominationRow:
    color: int
    m: int
    p_color: float
    p_bernoulli: float
    sigma: float
    violated: bool


@dataclass(frozen=True)
class DominationReport:
    law: ColoringLaw
    params: LawRegionParams
    replicas: int
    rows: tuple[DominationRow, ...]

    @property
    def any_violation(self) -> bool:
        return any(row.violated for row in self.rows)


def marginal_domination_check(
    p: ColoringLaw,
    params: LawRegionParams,
    d: int,
    sizes: Sequence[int],
    replicas: int,
    seed: int,
    z: float = 4.0,
    pc_table: dict[int, float] | None = None,
) -> DominationReport:
    """Compare P(|C_0^s| >= m) against Bernoulli-theta cluster tails per color.

    Refuses laws outside E_{theta,S}, where the domination premise fails.
    Violations are flagged when the color estimate exceeds the Bernoulli
    estimate by more than z combined standard errors.
    """
    params.validate_subcritical(d, pc_table)
    if not is_in_region(p, params):
        raise ValueError("law lies outside the (theta, S) region; premise fails")
    if p.all_distinct:
        raise ValueError("sentinel law has no finite color marginals")
    sizes = sorted(int(m) for m in sizes)
    cap = max(max(sizes), 1)
    color_seeds = np.array([derive_seed(seed, DOMAIN_REPLICA, r) for r in range(replicas)], dtype=np.uint64)
    bern_seeds = np.array(
        [bernoulli_uniform_seed(derive_seed(seed, DOMAIN_REPLICA, r)) for r in range(replicas)],
        dtype=np.uint64,
    )
    trunc_colors, trunc_sizes = _kernels.color_cluster_batch(
        color_seeds, p.cumulative, np.int64(params.S), np.int64(d), np.int64(cap)
    )
    bern_sizes = _kernels.bernoulli_sizes_batch(bern_seeds, float(params.theta), np.int64(d), np.int64(cap))

    rows = []
    for s in range(1, params.S + 2):
        s_sizes = np.where(trunc_colors == s, trunc_sizes, 0)
        for m in sizes:
            pc_hat = float((s_sizes >= m).mean())
            pb_hat = float((bern_sizes >= m).mean())
            var = pc_hat * (1 - pc_hat) / replicas + pb_hat * (1 - pb_hat) / replicas
            sigma = math.sqrt(var)
            violated = pc_hat - pb_hat > z * sigma
            rows.append(
                DominationRow(color=s, m=m, p_color=pc_hat, p_bernoulli=pb_hat, sigma=sigma, violated=violated)
            )
    return DominationReport(law=p, params=params, replicas=int(replicas), rows=tuple(rows))
