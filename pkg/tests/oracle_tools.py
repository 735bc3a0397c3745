"""Independent brute-force oracles used only by the test suite.

These deliberately avoid the production algorithms: exhaustive self-avoiding
path enumeration (as a DFS prefix tree), pure-python flood fill, and the naive
connected-subset filter for lattice animals.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from numba import njit

from colorfpp.lattice import LatticeBox, neighbors


def adjacency(box: LatticeBox) -> tuple[np.ndarray, np.ndarray]:
    """(flat neighbor list, offsets) in the fixed lattice neighbor order."""
    nbrs = []
    offsets = [0]
    for idx in range(box.n_vertices):
        for w in neighbors(box.vertex_at(idx), box):
            nbrs.append(box.flat_index(w))
        offsets.append(len(nbrs))
    return np.array(nbrs, dtype=np.int32), np.array(offsets, dtype=np.int64)


@njit(cache=True)
def build_saw_tree(nbr_flat, nbr_off, source, n_vertices):
    """DFS prefix tree of every self-avoiding walk from source.

    Returns (parent, vertex) arrays in preorder; node 0 is the trivial walk.
    """
    cap = 1 << 16
    parent = np.empty(cap, np.int32)
    vertex = np.empty(cap, np.int32)
    parent[0] = -1
    vertex[0] = source
    count = 1

    on_trail = np.zeros(n_vertices, np.uint8)
    on_trail[source] = 1
    stack_node = np.empty(n_vertices + 1, np.int64)
    stack_ptr = np.empty(n_vertices + 1, np.int64)
    stack_node[0] = 0
    stack_ptr[0] = 0
    sp = 0
    while sp >= 0:
        node = stack_node[sp]
        v = vertex[node]
        ptr = stack_ptr[sp]
        if ptr >= nbr_off[v + 1] - nbr_off[v]:
            on_trail[v] = 0
            sp -= 1
            continue
        stack_ptr[sp] = ptr + 1
        w = nbr_flat[nbr_off[v] + ptr]
        if on_trail[w]:
            continue
        if count == cap:
            cap *= 2
            np_parent = np.empty(cap, np.int32)
            np_vertex = np.empty(cap, np.int32)
            np_parent[:count] = parent[:count]
            np_vertex[:count] = vertex[:count]
            parent = np_parent
            vertex = np_vertex
        parent[count] = node
        vertex[count] = w
        on_trail[w] = 1
        sp += 1
        stack_node[sp] = count
        stack_ptr[sp] = 0
        count += 1
    return parent[:count].copy(), vertex[:count].copy()


@njit(cache=True)
def saw_min_costs(parent, vertex, colors, n_vertices, max_depth):
    """best[v * (max_depth+1) + h] = min cost over SAWs source->v with h edges."""
    big = np.int32(2**30)
    best = np.full(n_vertices * (max_depth + 1), big, np.int32)
    cost = np.empty(parent.size, np.int32)
    depth = np.empty(parent.size, np.int32)
    cost[0] = 0
    depth[0] = 0
    best[vertex[0] * (max_depth + 1)] = 0
    for i in range(1, parent.size):
        p = parent[i]
        c = cost[p] + (np.int32(0) if colors[vertex[p]] == colors[vertex[i]] else np.int32(1))
        cost[i] = c
        depth[i] = depth[p] + 1
        slot = vertex[i] * (max_depth + 1) + depth[i]
        if c < best[slot]:
            best[slot] = c
    return best


class SawOracle:
    """Exhaustive SAP tables for one box, reusable across color fields."""

    def __init__(self, box: LatticeBox):
        self.box = box
        self.max_depth = box.n_vertices - 1
        self.nbr_flat, self.nbr_off = adjacency(box)
        self._trees: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def tree(self, source_idx: int):
        if source_idx not in self._trees:
            self._trees[source_idx] = build_saw_tree(
                self.nbr_flat, self.nbr_off, source_idx, self.box.n_vertices
            )
        return self._trees[source_idx]

    def tables(self, source_idx: int, colors: np.ndarray) -> np.ndarray:
        parent, vertex = self.tree(source_idx)
        best = saw_min_costs(
            parent, vertex, colors.astype(np.int32), self.box.n_vertices, self.max_depth
        )
        return best.reshape(self.box.n_vertices, self.max_depth + 1)

    def passage_time(self, tables: np.ndarray, target_idx: int) -> int:
        return int(tables[target_idx].min())

    def k_short_time(self, tables: np.ndarray, target_idx: int, budget: int) -> int:
        upto = tables[target_idx, : budget + 1]
        return int(upto.min())


def flood_fill_labels(colors: np.ndarray, box: LatticeBox) -> list[set[int]]:
    """Same-color connected components as vertex-index sets (pure python)."""
    seen = [False] * box.n_vertices
    comps = []
    for start in range(box.n_vertices):
        if seen[start]:
            continue
        comp = {start}
        seen[start] = True
        stack = [start]
        while stack:
            cur = stack.pop()
            for w in neighbors(box.vertex_at(cur), box):
                wi = box.flat_index(w)
                if not seen[wi] and colors[wi] == colors[cur]:
                    seen[wi] = True
                    comp.add(wi)
                    stack.append(wi)
        comps.append(comp)
    return comps


def naive_origin_animals(box: LatticeBox, n: int) -> list[tuple[int, ...]]:
    """Connected origin-containing n-subsets by filtering all combinations."""
    origin = box.flat_index(box.origin)
    others = [i for i in range(box.n_vertices) if i != origin]
    nbr_sets = {i: {box.flat_index(w) for w in neighbors(box.vertex_at(i), box)} for i in range(box.n_vertices)}
    out = []
    for rest in combinations(others, n - 1):
        subset = set(rest) | {origin}
        stack = [origin]
        seen = {origin}
        while stack:
            cur = stack.pop()
            for w in nbr_sets[cur] & subset:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) == n:
            out.append(tuple(sorted(subset)))
    return out


def assert_valid_animal(witness, n: int, box: LatticeBox) -> None:
    assert len(witness) == n
    assert box.origin in witness
    sites = set(witness)
    assert len(sites) == n
    stack = [box.origin]
    seen = {box.origin}
    while stack:
        cur = stack.pop()
        for w in neighbors(cur, box):
            if w in sites and w not in seen:
                seen.add(w)
                stack.append(w)
    assert len(seen) == n, "witness is disconnected"
