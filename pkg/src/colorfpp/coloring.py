"""Coloring laws, counter-based uniform fields, the shared-uniform coupling,
disagreement bounds between coupled laws, and the (theta, S) law regions."""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .lattice import LatticeBox

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# colors of the all-distinct sentinel live in a range no finite law can reach
ALL_DISTINCT_BASE = 2**30

# domain-separation tags for derived seed streams
DOMAIN_REPLICA = 0x7265706C
DOMAIN_BERNOULLI = 0x6265726E
DOMAIN_SHAPE = 0x73686170
DOMAIN_WEIGHTS = 0x77656967

PROB_SUM_TOL = 1e-12

# literature values, classification thresholds only, never test ground truth
PC_SITE = {2: 0.592746, 3: 0.311608}


def mix64_int(z: int) -> int:
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *streams: int) -> int:
    """Derive an independent 64-bit seed from base and stream tags."""
    h = mix64_int(base & MASK64)
    for s in streams:
        h = mix64_int(h ^ (s & MASK64))
    return h


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def vertex_uniforms(box: LatticeBox, seed: int) -> np.ndarray:
    """Per-vertex uniforms in [0,1) keyed on (seed, coordinates), flat row-major.

    Hash chain over coordinate axes; bit-identical to _kernels.point_uniform.
    """
    h0 = mix64_int(seed & MASK64)
    axis_coords = np.arange(-box.radius, box.radius + 1, dtype=np.int64).astype(np.uint64)
    acc = np.full((1,) * box.dimension, h0, dtype=np.uint64)
    for axis in range(box.dimension):
        shape = [1] * box.dimension
        shape[axis] = box.side
        acc = _mix64_np(acc ^ axis_coords.reshape(shape))
    u = (acc >> np.uint64(11)).astype(np.float64) * (1.0 / float(1 << 53))
    return np.ascontiguousarray(u).ravel()


@dataclass(frozen=True)
class ColoringLaw:
    """A finite coloring law (p_1, ..., p_m), or the all-distinct sentinel.

    The sentinel stands for the |p| -> 0 limit: every vertex gets its own
    color, sup norm 0, and all its mass counts as tail beyond any finite S.
    """

    probabilities: tuple[float, ...] = ()
    all_distinct: bool = False

    def __post_init__(self) -> None:
        if self.all_distinct:
            if self.probabilities:
                raise ValueError("all-distinct sentinel takes no probabilities")
            return
        p = self.probabilities
        if len(p) == 0:
            raise ValueError("law needs at least one color")
        if len(p) >= ALL_DISTINCT_BASE:
            raise ValueError("support too large")
        if any(not 0.0 <= x <= 1.0 for x in p):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(sum(p) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {sum(p)!r}, not 1")

    @property
    def support_size(self) -> int:
        return len(self.probabilities)

    @property
    def sup_norm(self) -> float:
        if self.all_distinct:
            return 0.0
        return max(self.probabilities)

    def tail_mass(self, S: int) -> float:
        """Mass on colors beyond S; the sentinel's mass is all tail."""
        if self.all_distinct:
            return 1.0
        return float(sum(self.probabilities[S:]))

    def l1_distance(self, other: "ColoringLaw") -> float:
        if self.all_distinct or other.all_distinct:
            if self.all_distinct and other.all_distinct:
                return 0.0
            return 2.0  # total variation limit: disjoint supports
        a, b = self.probabilities, other.probabilities
        m = max(len(a), len(b))
        return float(sum(abs((a[i] if i < len(a) else 0.0) - (b[i] if i < len(b) else 0.0)) for i in range(m)))

    def sup_distance(self, other: "ColoringLaw") -> float:
        if self.all_distinct or other.all_distinct:
            if self.all_distinct and other.all_distinct:
                return 0.0
            other_fin = other if not other.all_distinct else self
            return other_fin.sup_norm
        a, b = self.probabilities, other.probabilities
        m = max(len(a), len(b))
        return float(max(abs((a[i] if i < len(a) else 0.0) - (b[i] if i < len(b) else 0.0)) for i in range(m)))

    @property
    def cumulative(self) -> np.ndarray:
        """Compensated cumulative sums with the final entry forced to 1."""
        cum = getattr(self, "_cum_cache", None)
        if cum is None:
            if self.all_distinct:
                cum = np.array([], dtype=np.float64)
            else:
                cum = _kernels.kahan_cumsum(np.asarray(self.probabilities, dtype=np.float64))
                cum[-1] = 1.0
            object.__setattr__(self, "_cum_cache", cum)
        return cum

    def to_json(self) -> dict:
        if self.all_distinct:
            return {"mode": "all_distinct"}
        return {"probabilities": list(self.probabilities)}

    @classmethod
    def from_json(cls, obj: dict) -> "ColoringLaw":
        if obj.get("mode") == "all_distinct":
            return cls(all_distinct=True)
        return cls(probabilities=tuple(float(x) for x in obj["probabilities"]))

    @classmethod
    def load(cls, path: str | Path) -> "ColoringLaw":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def uniform(cls, m: int) -> "ColoringLaw":
        return cls(probabilities=(1.0 / m,) * m)


@dataclass(frozen=True)
class UniformField:
    """Per-vertex uniforms on a box; values depend only on (seed, coordinates)."""

    box: LatticeBox
    seed: int
    values: np.ndarray = field(repr=False)

    def value_at(self, v) -> float:
        return float(self.values[self.box.flat_index(v)])


def sample_uniform_field(box: LatticeBox, seed: int) -> UniformField:
    return UniformField(box=box, seed=seed, values=vertex_uniforms(box, seed))


@dataclass(frozen=True)
class ColorField:
    """Colors on a box; in sentinel mode every vertex has a distinct color."""

    box: LatticeBox
    law: ColoringLaw
    colors: np.ndarray = field(repr=False)

    def color_at(self, v) -> int:
        return int(self.colors[self.box.flat_index(v)])


def color_from_uniform(u_val: float, law: ColoringLaw) -> int:
    """The unique color i with cumulative(i-1) <= u_val < cumulative(i)."""
    if not 0.0 <= u_val < 1.0:
        raise ValueError(f"uniform value {u_val!r} outside [0, 1)")
    if law.all_distinct:
        raise ValueError("sentinel law has no per-uniform color map")
    cum = law.cumulative
    return bisect_right(cum, u_val) + 1


def colors_from_uniforms(uniforms: np.ndarray, law: ColoringLaw) -> np.ndarray:
    if law.all_distinct:
        return ALL_DISTINCT_BASE + np.arange(uniforms.size, dtype=np.int32)
    idx = np.searchsorted(law.cumulative, uniforms, side="right")
    return (idx + 1).astype(np.int32)


def color_field_from_uniform(uf: UniformField, law: ColoringLaw) -> ColorField:
    return ColorField(box=uf.box, law=law, colors=colors_from_uniforms(uf.values, law))


def sample_color_field(box: LatticeBox, law: ColoringLaw, seed: int) -> ColorField:
    return color_field_from_uniform(sample_uniform_field(box, seed), law)


def couple_fields(uf: UniformField, laws: list[ColoringLaw]) -> list[ColorField]:
    """Color fields for several laws built vertexwise from the same uniforms."""
    return [color_field_from_uniform(uf, law) for law in laws]


def disagreement_exact(p: ColoringLaw, q: ColoringLaw) -> float:
    """Lebesgue measure of the u-set where the coupled colors differ."""
    if p.all_distinct or q.all_distinct:
        return 0.0 if (p.all_distinct and q.all_distinct) else 1.0
    cp, cq = p.cumulative, q.cumulative
    total = 0.0
    lo = 0.0
    i = j = 0
    while i < cp.size and j < cq.size:
        hi = min(cp[i], cq[j])
        if hi > lo and i != j:
            total += hi - lo
        lo = hi
        if cp[i] <= hi:
            i += 1
        if cq[j] <= hi:
            j += 1
    return total


def disagreement_bound(p: ColoringLaw, q: ColoringLaw, S: int) -> float:
    """Coupling disagreement bound: 2 sum_{i<=S} (S+1-i)|p_i-q_i| + tail mass of p."""
    if S < 1:
        raise ValueError("S must be >= 1")
    pa = p.probabilities
    qa = q.probabilities
    acc = 0.0
    for i in range(1, S + 1):
        pi = pa[i - 1] if i <= len(pa) else 0.0
        qi = qa[i - 1] if i <= len(qa) else 0.0
        acc += (S + 1 - i) * abs(pi - qi)
    return 2.0 * acc + p.tail_mass(S)


@dataclass(frozen=True)
class LawRegionParams:
    """Parameters (theta, S) of the open law region |p| < theta, tail(S) < theta."""

    theta: float
    S: int

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.S < 5:
            raise ValueError("S must be >= 5")

    def validate_subcritical(self, d: int, pc_table: dict[int, float] | None = None) -> None:
        table = PC_SITE if pc_table is None else pc_table
        if d not in table:
            raise ValueError(f"no site-percolation threshold configured for d={d}")
        if not self.theta < table[d]:
            raise ValueError(f"theta={self.theta} is not below p_c({d})={table[d]}")


def is_in_region(p: ColoringLaw, params: LawRegionParams) -> bool:
    return p.sup_norm < params.theta and p.tail_mass(params.S) < params.theta
