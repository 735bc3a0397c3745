"""Directional seminorm estimation, positivity classification, asymptotic-shape
polytopes, Hausdorff distances, and the continuity and shape-theorem sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from ._util import parallel_map
from .coloring import (
    DOMAIN_REPLICA,
    DOMAIN_SHAPE,
    PC_SITE,
    ColoringLaw,
    colors_from_uniforms,
    derive_seed,
    vertex_uniforms,
)
from .lattice import LatticeBox, min_over_box_faces, nearest_sites
from .passage import _geometry

DEFAULT_EPS_ZERO = 0.02
_UNIT_TOL = 1e-12


class Positivity(Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    CRITICAL_UNDECIDED = "critical-undecided"


def positivity_classify(
    law: ColoringLaw, d: int, pc_table: dict[int, float] | None = None, tol: float = 1e-6
) -> Positivity:
    """Classify mu positivity by comparing |p| with the configured p_c(d, site)."""
    table = PC_SITE if pc_table is None else pc_table
    if d not in table:
        raise ValueError(f"no site-percolation threshold configured for d={d}")
    pc = table[d]
    if not 0.0 < pc < 1.0:
        raise ValueError(f"configured p_c({d})={pc} is not in (0, 1)")
    sup = law.sup_norm
    if abs(sup - pc) < tol:
        return Positivity.CRITICAL_UNDECIDED
    return Positivity.POSITIVE if sup < pc else Positivity.ZERO


def directions_2d(count: int = 64) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def icosphere_directions(subdivisions: int = 1) -> np.ndarray:
    """Unit vectors from a subdivided icosahedron (12, 42, 162, ... points)."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            verts += [(a, b, 0.0), (0.0, a, b), (b, 0.0, a)]
    verts = np.array(verts)
    verts /= np.linalg.norm(verts, axis=1)[:, None]

    def _key(v):
        return tuple(np.round(v, 9))

    faces = []
    # faces = triples of mutually nearest vertices (icosahedral edge length)
    edge = 2.0 / math.sqrt(phi * math.sqrt(5.0))
    nv = len(verts)
    for i in range(nv):
        for j in range(i + 1, nv):
            if abs(np.linalg.norm(verts[i] - verts[j]) - edge) > 1e-9:
                continue
            for k in range(j + 1, nv):
                if (
                    abs(np.linalg.norm(verts[i] - verts[k]) - edge) < 1e-9
                    and abs(np.linalg.norm(verts[j] - verts[k]) - edge) < 1e-9
                ):
                    faces.append((i, j, k))
    pts = {_key(v): v for v in verts}
    tris = [tuple(verts[i] for i in f) for f in faces]
    for _ in range(subdivisions):
        new_tris = []
        for a, b, c in tris:
            ab = (a + b) / np.linalg.norm(a + b)
            bc = (b + c) / np.linalg.norm(b + c)
            ca = (c + a) / np.linalg.norm(c + a)
            for v in (ab, bc, ca):
                pts[_key(v)] = v
            new_tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        tris = new_tris
    out = np.array(sorted(pts.values(), key=lambda v: tuple(v)))
    return out / np.linalg.norm(out, axis=1)[:, None]


def default_directions(d: int, count: int = 64) -> np.ndarray:
    if d == 2:
        return directions_2d(count)
    if d == 3:
        return icosphere_directions(1)
    raise ValueError(f"no default direction set for d={d}")


@dataclass(frozen=True)
class EstimatorConfig:
    """Parameters of the directional Monte Carlo estimators."""

    dimension: int
    n_schedule: tuple[int, ...]
    replicas: int
    base_seed: int
    directions: np.ndarray | None = None
    margin: float = 1.5
    k_list: tuple[float, ...] | None = None
    eps_zero: float = DEFAULT_EPS_ZERO

    def __post_init__(self) -> None:
        if self.margin <= 1.0:
            raise ValueError("margin must exceed 1")
        if len(self.n_schedule) == 0 or any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise ValueError("n schedule must be strictly increasing and nonempty")
        if self.replicas < 1:
            raise ValueError("need at least one replica")
        if self.directions is None:
            object.__setattr__(self, "directions", default_directions(self.dimension))
        dirs = np.asarray(self.directions, dtype=np.float64)
        if dirs.ndim != 2 or dirs.shape[1] != self.dimension or dirs.shape[0] < 1:
            raise ValueError("directions must be a (D, dimension) array")
        norms = np.linalg.norm(dirs, axis=1)
        if np.abs(norms - 1.0).max() > _UNIT_TOL:
            raise ValueError("directions must be unit vectors")
        object.__setattr__(self, "directions", dirs)
        if self.k_list is not None:
            ks = tuple(float(k) for k in self.k_list)
            if len(ks) == 0 or any(k < 1 for k in ks):
                raise ValueError("k list must be nonempty with k >= 1")
            object.__setattr__(self, "k_list", ks)

    @property
    def n_max(self) -> int:
        return self.n_schedule[-1]

    @property
    def box_radius(self) -> int:
        return int(math.ceil(self.margin * self.n_max))

    def replica_seed(self, r: int) -> int:
        return derive_seed(self.base_seed, DOMAIN_REPLICA, r)


def _schedule_targets(cfg: EstimatorConfig, box: LatticeBox) -> dict[int, np.ndarray]:
    """Flat target indices per schedule point, one per direction."""
    out = {}
    for n in cfg.n_schedule:
        sites = nearest_sites(n * cfg.directions)
        out[n] = box.flat_indices(sites)
    return out


@dataclass(frozen=True)
class SeminormEstimate:
    """Per-direction estimates of the directional seminorm at the largest n."""

    law: ColoringLaw
    cfg: EstimatorConfig
    directions: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    kept: np.ndarray = field(repr=False)
    discarded: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    keep_mask: np.ndarray = field(repr=False)
    trace: dict[int, tuple[np.ndarray, np.ndarray]] = field(repr=False, default_factory=dict)

    @property
    def n_directions(self) -> int:
        return self.directions.shape[0]

    def min_value(self) -> float:
        return float(self.values.min())


def _reduce_samples(samples: np.ndarray, keep: np.ndarray) -> tuple[np.ndarray, ...]:
    """Masked per-direction mean, stderr, kept and discarded counts."""
    r, d = samples.shape
    kept = keep.sum(axis=0)
    if (kept == 0).any():
        raise ValueError("all replicas discarded for some direction; box too small")
    masked = np.where(keep, samples, 0.0)
    means = masked.sum(axis=0) / kept
    dev = np.where(keep, samples - means[None, :], 0.0)
    var = np.where(kept > 1, (dev**2).sum(axis=0) / np.maximum(kept - 1, 1), 0.0)
    stderr = np.sqrt(var / kept)
    return means, stderr, kept.astype(np.int64), (r - kept).astype(np.int64)


def _replica_passage_samples(law, cfg, box, targets, seed):
    """One replica: BFS distances at every (schedule n, direction) target."""
    uniforms = vertex_uniforms(box, seed)
    colors = colors_from_uniforms(uniforms, law)
    del uniforms
    sides, strides = _geometry(box)
    src = box.flat_index(box.origin)
    dist, _ = _kernels.bfs01(np.ascontiguousarray(colors, dtype=np.int32), sides, strides, np.int64(src), False)
    min_boundary = int(min_over_box_faces(dist.reshape(box.shape)))
    out = {n: dist[idx].astype(np.int64) for n, idx in targets.items()}
    return out, min_boundary, dist, colors


def _certificate_applies(law: ColoringLaw, d: int, pc_table: dict[int, float] | None = None) -> bool:
    """Truncation certificates only discriminate for POSITIVE-classified laws.

    When mu vanishes, in-box distances collapse toward zero everywhere and the
    boundary certificate rejects essentially every sample; those estimates are
    reported as in-box overestimates instead of being discarded.
    """
    try:
        return positivity_classify(law, d, pc_table) is Positivity.POSITIVE
    except ValueError:
        return True


def estimate_mu(law: ColoringLaw, cfg: EstimatorConfig, threads: int = 1) -> SeminormEstimate:
    """Monte Carlo estimate of the directional seminorm, T(0, n x)/n at n_max.

    A (replica, direction) sample is retained only when the in-box distance is
    certified exact against truncation: no path through the outside can beat it
    when T(0, target) does not exceed the minimal boundary distance.
    """
    box = LatticeBox(cfg.dimension, cfg.box_radius)
    targets = _schedule_targets(cfg, box)
    certify = _certificate_applies(law, cfg.dimension)

    def one(r: int):
        values, min_boundary, dist, colors = _replica_passage_samples(law, cfg, box, targets, cfg.replica_seed(r))
        return values, min_boundary

    results = parallel_map(one, list(range(cfg.replicas)), threads)

    trace: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    n_dir = cfg.directions.shape[0]
    samples_max = np.zeros((cfg.replicas, n_dir))
    keep_max = np.zeros((cfg.replicas, n_dir), dtype=bool)
    for n in cfg.n_schedule:
        samples = np.zeros((cfg.replicas, n_dir))
        keep = np.zeros((cfg.replicas, n_dir), dtype=bool)
        for r, (values, min_boundary) in enumerate(results):
            samples[r] = values[n] / n
            keep[r] = values[n] <= min_boundary if certify else True
        if n == cfg.n_max:
            samples_max, keep_max = samples, keep
        means, _, _, discarded = _reduce_samples(samples, keep)
        trace[n] = (means, discarded)

    means, stderr, kept, discarded = _reduce_samples(samples_max, keep_max)
    return SeminormEstimate(
        law=law,
        cfg=cfg,
        directions=cfg.directions,
        values=means,
        stderr=stderr,
        kept=kept,
        discarded=discarded,
        samples=samples_max,
        keep_mask=keep_max,
        trace=trace,
    )


@dataclass(frozen=True)
class KShortSeminormEstimate:
    """Per-(k, direction) estimates of the k-short seminorm on shared samples."""

    base: SeminormEstimate
    k_list: tuple[float, ...]
    values: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    hop_truncated: bool = False


def estimate_mu_k(law: ColoringLaw, cfg: EstimatorConfig, threads: int = 1) -> KShortSeminormEstimate:
    """Estimate mu^k alongside mu on the same fields so monotonicity is pathwise.

    Samples are discarded synchronously across all k and the unrestricted
    estimate, using the unrestricted truncation certificate.
    """
    if cfg.k_list is None:
        raise ValueError("config carries no k list")
    box = LatticeBox(cfg.dimension, cfg.box_radius)
    targets = _schedule_targets(cfg, box)
    tgt_max = targets[cfg.n_max]
    sides, strides = _geometry(box)
    src = box.flat_index(box.origin)
    l1s = np.abs(nearest_sites(cfg.n_max * cfg.directions)).sum(axis=1).astype(np.int64)
    ks = cfg.k_list
    budgets = np.stack([np.floor(k * l1s).astype(np.int64) for k in ks])
    stop_hops = budgets.min(axis=0)
    hop_cap = int(budgets.max())
    c_cap = int(l1s.max()) + 1

    def one(r: int):
        values, min_boundary, dist, colors = _replica_passage_samples(law, cfg, box, targets, cfg.replica_seed(r))
        curves, top = _kernels.kshort_curves(
            np.ascontiguousarray(colors, dtype=np.int32),
            sides,
            strides,
            np.int64(src),
            tgt_max,
            stop_hops,
            np.int64(hop_cap),
            np.int64(c_cap),
        )
        tk = np.zeros((len(ks), tgt_max.size), dtype=np.int64)
        for ki in range(len(ks)):
            for t in range(tgt_max.size):
                ok = np.flatnonzero(curves[t, : top + 1] <= budgets[ki, t])
                tk[ki, t] = ok[0]
        return values, min_boundary, tk

    results = parallel_map(one, list(range(cfg.replicas)), threads)

    certify = _certificate_applies(law, cfg.dimension)
    n_dir = cfg.directions.shape[0]
    samples_base = np.zeros((cfg.replicas, n_dir))
    keep = np.zeros((cfg.replicas, n_dir), dtype=bool)
    samples_k = np.zeros((len(ks), cfg.replicas, n_dir))
    trace: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for r, (values, min_boundary, tk) in enumerate(results):
        samples_base[r] = values[cfg.n_max] / cfg.n_max
        keep[r] = values[cfg.n_max] <= min_boundary if certify else True
        samples_k[:, r, :] = tk / cfg.n_max

    means, stderr, kept, discarded = _reduce_samples(samples_base, keep)
    trace[cfg.n_max] = (means, discarded)
    base = SeminormEstimate(
        law=law,
        cfg=cfg,
        directions=cfg.directions,
        values=means,
        stderr=stderr,
        kept=kept,
        discarded=discarded,
        samples=samples_base,
        keep_mask=keep,
        trace=trace,
    )
    k_means = np.zeros((len(ks), n_dir))
    k_stderr = np.zeros((len(ks), n_dir))
    for ki in range(len(ks)):
        m, se, _, _ = _reduce_samples(samples_k[ki], keep)
        k_means[ki] = m
        k_stderr[ki] = se
    return KShortSeminormEstimate(
        base=base,
        k_list=ks,
        values=k_means,
        stderr=k_stderr,
        samples=samples_k,
        hop_truncated=hop_cap > box.radius,
    )


# ---------------------------------------------------------------------------
# shape geometry


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Counterclockwise convex hull (monotone chain), strict turns only."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if pts.shape[0] < 3:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) > 1 and np.cross(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _point_polygon_distances(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Euclidean distance of each point to a CCW convex polygon (0 inside)."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    edge = b - a
    rel = points[:, None, :] - a[None, :, :]
    cross = edge[None, :, 0] * rel[:, :, 1] - edge[None, :, 1] * rel[:, :, 0]
    inside = (cross >= 0).all(axis=1)
    seg_len2 = (edge**2).sum(axis=1)
    t = np.clip((rel * edge[None, :, :]).sum(axis=2) / seg_len2[None, :], 0.0, 1.0)
    foot = a[None, :, :] + t[:, :, None] * edge[None, :, :]
    d = np.sqrt(((points[:, None, :] - foot) ** 2).sum(axis=2)).min(axis=1)
    d[inside] = 0.0
    return d


def polygon_hausdorff(p: np.ndarray, q: np.ndarray) -> float:
    """Exact Hausdorff distance between convex CCW polygons (max at vertices)."""
    if len(p) == 0 or len(q) == 0:
        raise ValueError("empty polygon")
    if len(q) < 3 or len(p) < 3:
        # degenerate hulls: fall back to pointwise sets
        dpq = np.array([np.linalg.norm(q - v, axis=1).min() for v in p]).max()
        dqp = np.array([np.linalg.norm(p - v, axis=1).min() for v in q]).max()
        return float(max(dpq, dqp))
    return float(max(_point_polygon_distances(p, q).max(), _point_polygon_distances(q, p).max()))


@dataclass(frozen=True)
class ShapeBall:
    """Polytope estimate of the seminorm unit ball {x : mu(x) <= 1}."""

    dimension: int
    directions: np.ndarray = field(repr=False)
    mu_values: np.ndarray = field(repr=False)
    alpha: float
    degenerate: bool
    vertices: np.ndarray | None = field(repr=False, default=None)


def build_shape_ball(est: SeminormEstimate, eps_zero: float | None = None) -> ShapeBall:
    """Convex hull of {x_i / mu(x_i)}; degenerate when any estimate is near zero."""
    if est.n_directions < 2 * est.cfg.dimension:
        raise ValueError("need at least 2d directions for a shape estimate")
    eps = est.cfg.eps_zero if eps_zero is None else eps_zero
    alpha = float(est.values.min())
    if alpha <= eps:
        return ShapeBall(
            dimension=est.cfg.dimension,
            directions=est.directions,
            mu_values=est.values,
            alpha=alpha,
            degenerate=True,
        )
    pts = est.directions / est.values[:, None]
    if est.cfg.dimension == 2:
        verts = convex_hull_2d(pts)
    else:
        from scipy.spatial import ConvexHull

        hull = ConvexHull(pts)
        verts = pts[hull.vertices]
    return ShapeBall(
        dimension=est.cfg.dimension,
        directions=est.directions,
        mu_values=est.values,
        alpha=alpha,
        degenerate=False,
        vertices=verts,
    )


def shape_ball_from_points(dimension: int, points: np.ndarray) -> ShapeBall:
    """Shape ball directly from a point cloud (used for B(t)/t polytopes)."""
    if dimension == 2:
        verts = convex_hull_2d(points)
    else:
        from scipy.spatial import ConvexHull

        hull = ConvexHull(points)
        verts = points[hull.vertices]
    radii = np.linalg.norm(verts, axis=1)
    return ShapeBall(
        dimension=dimension,
        directions=verts / radii[:, None],
        mu_values=1.0 / radii,
        alpha=float((1.0 / radii).min()),
        degenerate=False,
        vertices=verts,
    )


def support_function(shape: ShapeBall, directions: np.ndarray) -> np.ndarray:
    if shape.vertices is None:
        raise ValueError("degenerate shape has no support function")
    return (directions @ shape.vertices.T).max(axis=1)


def hausdorff_distance(a: ShapeBall, b: ShapeBall) -> float:
    """Exact polygon Hausdorff distance in d=2; support-sampled value in d=3."""
    if a.degenerate or b.degenerate:
        raise ValueError("Hausdorff distance undefined for degenerate shapes")
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    if a.dimension == 2:
        return polygon_hausdorff(a.vertices, b.vertices)
    value, _ = hausdorff_support_gap(a, b)
    return value


def hausdorff_support_gap(a: ShapeBall, b: ShapeBall, directions: np.ndarray | None = None) -> tuple[float, float]:
    """(sampled support gap, discretization bound) for convex bodies in d >= 3.

    For convex compacts the Hausdorff distance equals the sup over unit
    directions of |h_A - h_B|; sampling gives a lower value, off by at most
    (R_A + R_B) times the covering radius of the sample.
    """
    if a.degenerate or b.degenerate:
        raise ValueError("degenerate shape")
    if directions is None:
        directions = np.concatenate([a.directions, -a.directions, b.directions, -b.directions])
        directions = np.unique(np.round(directions, 12), axis=0)
    gaps = np.abs(support_function(a, directions) - support_function(b, directions))
    ra = np.linalg.norm(a.vertices, axis=1).max()
    rb = np.linalg.norm(b.vertices, axis=1).max()
    dots = directions @ directions.T
    np.fill_diagonal(dots, -1.0)
    nearest = np.clip(dots.max(axis=1), -1.0, 1.0)
    covering = float(np.sqrt(2.0 - 2.0 * nearest).max())
    return float(gaps.max()), (ra + rb) * covering


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    law: ColoringLaw
    sup_distance: float
    l1_distance: float
    sup_gap: float
    sup_gap_se: float
    hausdorff: float
    hausdorff_se: float
    degenerate: bool


@dataclass(frozen=True)
class SweepReport:
    p_law: ColoringLaw
    cfg: EstimatorConfig
    p_estimate: SeminormEstimate
    q_estimates: tuple[SeminormEstimate, ...]
    rows: tuple[SweepRow, ...]


def continuity_sweep(
    p: ColoringLaw, q_sequence: Sequence[ColoringLaw], cfg: EstimatorConfig, threads: int = 1
) -> SweepReport:
    """Coupled seminorm and shape sweep as q varies.

    Every law in {p} + q_sequence is colored from the same per-replica uniform
    field, so reported gaps isolate the law perturbation; a (replica, direction)
    sample is kept only when certified for all laws at once.
    """
    laws = [p] + list(q_sequence)
    box = LatticeBox(cfg.dimension, cfg.box_radius)
    targets = {cfg.n_max: _schedule_targets(cfg, box)[cfg.n_max]}
    sides, strides = _geometry(box)
    src = box.flat_index(box.origin)
    n_dir = cfg.directions.shape[0]

    certify = [_certificate_applies(law, cfg.dimension) for law in laws]

    def one(r: int):
        uniforms = vertex_uniforms(box, cfg.replica_seed(r))
        per_law = np.zeros((len(laws), n_dir), dtype=np.int64)
        keep = np.ones(n_dir, dtype=bool)
        for li, law in enumerate(laws):
            colors = colors_from_uniforms(uniforms, law)
            dist, _ = _kernels.bfs01(
                np.ascontiguousarray(colors, dtype=np.int32), sides, strides, np.int64(src), False
            )
            min_boundary = int(min_over_box_faces(dist.reshape(box.shape)))
            vals = dist[targets[cfg.n_max]].astype(np.int64)
            per_law[li] = vals
            if certify[li]:
                keep &= vals <= min_boundary
        return per_law, keep

    results = parallel_map(one, list(range(cfg.replicas)), threads)

    samples = np.zeros((len(laws), cfg.replicas, n_dir))
    keep = np.zeros((cfg.replicas, n_dir), dtype=bool)
    for r, (per_law, k) in enumerate(results):
        samples[:, r, :] = per_law / cfg.n_max
        keep[r] = k

    estimates = []
    for li, law in enumerate(laws):
        means, stderr, kept, discarded = _reduce_samples(samples[li], keep)
        estimates.append(
            SeminormEstimate(
                law=law,
                cfg=cfg,
                directions=cfg.directions,
                values=means,
                stderr=stderr,
                kept=kept,
                discarded=discarded,
                samples=samples[li],
                keep_mask=keep,
                trace={cfg.n_max: (means, discarded)},
            )
        )

    p_est = estimates[0]
    shapes_available = cfg.directions.shape[0] >= 2 * cfg.dimension
    p_shape = build_shape_ball(p_est) if shapes_available else None
    rows = []
    for li in range(1, len(laws)):
        q_est = estimates[li]
        gap = np.abs(q_est.values - p_est.values)
        j = int(np.argmax(gap))
        diff = samples[li] - samples[0]
        dm, dse, _, _ = _reduce_samples(diff, keep)
        sup_gap = float(gap[j])
        sup_gap_se = float(dse[j])
        if not shapes_available:
            dh, dh_se, degen = math.nan, math.nan, False
        else:
            q_shape = build_shape_ball(q_est)
            if p_shape.degenerate or q_shape.degenerate:
                dh, dh_se, degen = math.inf, math.nan, True
            else:
                dh = hausdorff_distance(p_shape, q_shape)
                radial_se = dse / (p_est.values * q_est.values)
                dh_se = float(radial_se.max())
                degen = False
        rows.append(
            SweepRow(
                law=laws[li],
                sup_distance=p.sup_distance(laws[li]),
                l1_distance=p.l1_distance(laws[li]),
                sup_gap=sup_gap,
                sup_gap_se=sup_gap_se,
                hausdorff=dh,
                hausdorff_se=dh_se,
                degenerate=degen,
            )
        )
    return SweepReport(
        p_law=p, cfg=cfg, p_estimate=p_est, q_estimates=tuple(estimates[1:]), rows=tuple(rows)
    )


@dataclass(frozen=True)
class ShapeCheckRow:
    t: int
    mean_dh: float
    se_dh: float
    mean_dh_prev: float
    discarded: int


@dataclass(frozen=True)
class ShapeCheckReport:
    law: ColoringLaw
    cfg: EstimatorConfig
    box_radius: int
    shape: ShapeBall
    rows: tuple[ShapeCheckRow, ...]


def _reached_hull_points(dist: np.ndarray, box: LatticeBox, t: int) -> np.ndarray:
    """Surface vertices of {T <= t}, scaled by 1/t (hull candidates only)."""
    from scipy import ndimage

    mask = (dist <= t).reshape(box.shape)
    interior = ndimage.binary_erosion(mask, border_value=0)
    surface = mask & ~interior
    coords = np.argwhere(surface).astype(np.float64) - box.radius
    return coords / t


def shape_theorem_check(
    law: ColoringLaw,
    t_grid: Sequence[int],
    cfg: EstimatorConfig,
    box_radius: int | None = None,
    replicas: int | None = None,
    threads: int = 1,
    pc_table: dict[int, float] | None = None,
) -> ShapeCheckReport:
    """Compare B(t)/t polytopes against the estimated shape ball across t.

    Requires a POSITIVE classification; the box is sized adaptively by the
    estimated alpha since B(t) reaches roughly t/alpha lattice units.
    """
    if positivity_classify(law, cfg.dimension, pc_table) is not Positivity.POSITIVE:
        raise ValueError("shape comparison requires a POSITIVE-classified law")
    t_grid = sorted(int(t) for t in t_grid)
    if t_grid[0] <= 0:
        raise ValueError("thresholds must be positive")
    est = estimate_mu(law, cfg, threads=threads)
    shape = build_shape_ball(est)
    if shape.degenerate:
        raise ValueError("estimated shape is degenerate; cannot compare")
    radius = box_radius if box_radius is not None else int(math.ceil(cfg.margin * t_grid[-1] / shape.alpha))
    box = LatticeBox(cfg.dimension, radius)
    reps = cfg.replicas if replicas is None else replicas
    sides, strides = _geometry(box)
    src = box.flat_index(box.origin)

    def one(r: int):
        seed = derive_seed(cfg.base_seed, DOMAIN_SHAPE, r)
        uniforms = vertex_uniforms(box, seed)
        colors = colors_from_uniforms(uniforms, law)
        del uniforms
        dist, _ = _kernels.bfs01(np.ascontiguousarray(colors, dtype=np.int32), sides, strides, np.int64(src), False)
        min_boundary = int(min_over_box_faces(dist.reshape(box.shape)))
        out = []
        prev_pts = None
        for t in t_grid:
            if min_boundary <= t:
                out.append((math.nan, math.nan))
                prev_pts = None
                continue
            pts = _reached_hull_points(dist, box, t)
            ball = shape_ball_from_points(cfg.dimension, pts)
            dh = hausdorff_distance(ball, shape)
            dh_prev = math.nan
            if prev_pts is not None:
                dh_prev = hausdorff_distance(ball, shape_ball_from_points(cfg.dimension, prev_pts))
            prev_pts = pts
            out.append((dh, dh_prev))
        return out

    results = parallel_map(one, list(range(reps)), threads)
    rows = []
    for ti, t in enumerate(t_grid):
        vals = np.array([res[ti][0] for res in results])
        prevs = np.array([res[ti][1] for res in results])
        ok = ~np.isnan(vals)
        if not ok.any():
            raise ValueError(f"every replica discarded at t={t}; box too small")
        mean = float(vals[ok].mean())
        se = float(vals[ok].std(ddof=1) / math.sqrt(ok.sum())) if ok.sum() > 1 else 0.0
        okp = ~np.isnan(prevs)
        mean_prev = float(prevs[okp].mean()) if okp.any() else math.nan
        rows.append(
            ShapeCheckRow(t=t, mean_dh=mean, se_dh=se, mean_dh_prev=mean_prev, discarded=int((~ok).sum()))
        )
    return ShapeCheckReport(law=law, cfg=cfg, box_radius=radius, shape=shape, rows=tuple(rows))
