"""Numba kernels for the hot loops: counter-based uniforms, 0-1 BFS, the
hop-constrained cost-layer sweep, and lazy origin-cluster growth.

All kernels operate on flat row-major arrays and are deterministic functions
of their inputs; they hold no global state and release the GIL.
"""

from __future__ import annotations

import numba as nb
import numpy as np
from numba import njit, types
from numba.typed import Dict

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / float(1 << 53)


@njit(nb.uint64(nb.uint64), cache=True, nogil=True, inline="always")
def mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(nb.float64(nb.uint64, nb.int64[:]), cache=True, nogil=True)
def point_uniform(seed, coords):
    """Uniform in [0, 1) keyed on (seed, coords); bit-identical to the numpy path."""
    h = mix64(seed)
    for i in range(coords.size):
        h = mix64(h ^ np.uint64(coords[i]))
    return float(h >> np.uint64(11)) * _INV53


@njit(cache=True, nogil=True)
def _grow_right(dq, tail):
    cap = dq.size
    out = np.empty(2 * cap, np.int32)
    out[:tail] = dq[:tail]
    return out


@njit(cache=True, nogil=True)
def _grow_left(dq, head, tail):
    cap = dq.size
    out = np.empty(2 * cap, np.int32)
    shift = cap
    out[head + shift : tail + shift] = dq[head:tail]
    return out, head + shift, tail + shift


@njit(cache=True, nogil=True)
def bfs01(colors, sides, strides, src, want_pred):
    """Single-source 0-1 BFS (deque variant, 0-edges pushed front).

    Edge cost between flat-adjacent u, v is 0 iff colors[u] == colors[v].
    Returns (dist int32, pred int32); pred is a length-1 dummy when not wanted.
    """
    n = colors.size
    d = sides.size
    INF = np.int32(2**30)
    dist = np.full(n, INF, np.int32)
    pred = np.full(n if want_pred else 1, -1, np.int32)
    done = np.zeros(n, np.uint8)

    cap = 2 * n + 64
    dq = np.empty(cap, np.int32)
    head = cap // 2
    tail = cap // 2

    dist[src] = 0
    dq[tail] = np.int32(src)
    tail += 1

    while head < tail:
        v = np.int64(dq[head])
        head += 1
        if done[v]:
            continue
        done[v] = 1
        dv = dist[v]
        for axis in range(d):
            st = strides[axis]
            coord = (v // st) % sides[axis]
            for k in range(2):
                if k == 0:
                    if coord == 0:
                        continue
                    w = v - st
                else:
                    if coord == sides[axis] - 1:
                        continue
                    w = v + st
                if done[w]:
                    continue
                c = np.int32(0) if colors[v] == colors[w] else np.int32(1)
                nd = dv + c
                if nd < dist[w]:
                    dist[w] = nd
                    if want_pred:
                        pred[w] = np.int32(v)
                    if c == 0:
                        if head == 0:
                            dq, head, tail = _grow_left(dq, head, tail)
                        head -= 1
                        dq[head] = np.int32(w)
                    else:
                        if tail == dq.size:
                            dq = _grow_right(dq, tail)
                        dq[tail] = np.int32(w)
                        tail += 1
    return dist, pred


@njit(cache=True, nogil=True)
def kshort_curves(colors, sides, strides, src, targets, stop_hops, hop_cap, c_cap):
    """Minimum hops H_c(v) over paths from src with passage cost <= c, per cost level.

    Sweeps cost levels c = 0, 1, ...; each level seeds labels from the previous
    level (crossing one more unequal-color edge) and closes them under 0-cost
    edges with a bucket BFS on hop counts. Hop labels above hop_cap are clipped
    to hop_cap + 1 (infinity), which is sound because any useful path keeps all
    intermediate hop counts below its final budget <= hop_cap.

    Returns (curves, top) with curves[t, c] = H_c(targets[t]) for c <= top;
    iteration stops once every target satisfies H_c <= stop_hops[t].
    """
    n = colors.size
    d = sides.size
    nt = targets.size
    INFH = np.int32(hop_cap + 1)
    curves = np.full((nt, c_cap + 2), INFH, np.int32)

    h_prev = np.full(n, INFH, np.int32)
    h_cur = np.full(n, INFH, np.int32)

    heads = np.full(hop_cap + 2, np.int64(-1), np.int64)
    ecap = n + 64
    enode = np.empty(ecap, np.int32)
    enext = np.empty(ecap, np.int64)

    top = np.int64(-1)
    for c in range(c_cap + 1):
        if c == 0:
            h_cur[src] = 0
        else:
            # cross one unequal-color edge from the previous level
            for v in range(n):
                best = h_prev[v]
                for axis in range(d):
                    st = strides[axis]
                    coord = (v // st) % sides[axis]
                    if coord > 0:
                        w = v - st
                        if colors[w] != colors[v] and h_prev[w] < best:
                            best = h_prev[w] + 1
                    if coord < sides[axis] - 1:
                        w = v + st
                        if colors[w] != colors[v] and h_prev[w] < best:
                            best = h_prev[w] + 1
                h_cur[v] = best if best <= hop_cap else INFH

        # close under 0-cost edges: multi-source bucket BFS on hop counts
        for h in range(hop_cap + 2):
            heads[h] = -1
        used = np.int64(0)
        for v in range(n):
            hv = h_cur[v]
            if hv <= hop_cap:
                if used == enode.size:
                    newnode = np.empty(2 * enode.size, np.int32)
                    newnext = np.empty(2 * enode.size, np.int64)
                    newnode[:used] = enode
                    newnext[:used] = enext
                    enode = newnode
                    enext = newnext
                enode[used] = np.int32(v)
                enext[used] = heads[hv]
                heads[hv] = used
                used += 1
        for h in range(hop_cap + 1):
            e = heads[h]
            while e != -1:
                v = np.int64(enode[e])
                e = enext[e]
                if h_cur[v] != h:
                    continue
                nh = np.int32(h + 1)
                if nh > hop_cap:
                    continue
                for axis in range(d):
                    st = strides[axis]
                    coord = (v // st) % sides[axis]
                    for k in range(2):
                        if k == 0:
                            if coord == 0:
                                continue
                            w = v - st
                        else:
                            if coord == sides[axis] - 1:
                                continue
                            w = v + st
                        if colors[w] == colors[v] and nh < h_cur[w]:
                            h_cur[w] = nh
                            if used == enode.size:
                                newnode = np.empty(2 * enode.size, np.int32)
                                newnext = np.empty(2 * enode.size, np.int64)
                                newnode[:used] = enode
                                newnext[:used] = enext
                                enode = newnode
                                enext = newnext
                            enode[used] = np.int32(w)
                            enext[used] = heads[nh]
                            heads[nh] = used
                            used += 1

        all_done = True
        for t in range(nt):
            curves[t, c] = h_cur[targets[t]]
            if h_cur[targets[t]] > stop_hops[t]:
                all_done = False
        top = c
        if all_done:
            break
        tmp = h_prev
        h_prev = h_cur
        h_cur = tmp
    return curves, top


_key_type = types.int64
_val_type = types.uint8


@njit(cache=True, nogil=True)
def _pack(coords, span):
    key = np.int64(0)
    for i in range(coords.size):
        key = key * span + (coords[i] + span // 2)
    return key


@njit(cache=True, nogil=True)
def bernoulli_cluster_size(seed, theta, d, cap):
    """Size of the origin's occupied cluster, grown lazily; returns cap when hit.

    Occupation of vertex v is point_uniform(seed, v) < theta, matching the
    full-box field construction exactly.
    """
    coords = np.zeros(d, np.int64)
    if point_uniform(seed, coords) >= theta:
        return 0
    span = np.int64(2 * cap + 3)
    visited = Dict.empty(_key_type, _val_type)
    stack = np.zeros((64, d), np.int64)
    nstack = 1
    visited[_pack(coords, span)] = np.uint8(1)
    size = 0
    while nstack > 0 and size < cap:
        nstack -= 1
        for i in range(d):
            coords[i] = stack[nstack, i]
        size += 1
        for axis in range(d):
            for delta in (-1, 1):
                coords[axis] += delta
                key = _pack(coords, span)
                if key not in visited:
                    visited[key] = np.uint8(1)
                    if point_uniform(seed, coords) < theta:
                        if nstack == stack.shape[0]:
                            bigger = np.empty((2 * nstack, d), np.int64)
                            bigger[:nstack] = stack
                            stack = bigger
                        for i in range(d):
                            stack[nstack, i] = coords[i]
                        nstack += 1
                coords[axis] -= delta
    return size


@njit(cache=True, nogil=True)
def color_cluster_size(seed, cum, trunc_above, d, cap):
    """(truncated color, cluster size) of the origin under the merged-color map.

    Colors above trunc_above collapse to trunc_above + 1 before connectivity is
    taken, matching truncate_colors; pass a huge trunc_above for plain clusters.
    """
    coords = np.zeros(d, np.int64)
    u0 = point_uniform(seed, coords)
    c0 = np.searchsorted(cum, u0, side="right") + 1
    t0 = c0 if c0 <= trunc_above else trunc_above + 1
    span = np.int64(2 * cap + 3)
    visited = Dict.empty(_key_type, _val_type)
    stack = np.zeros((64, d), np.int64)
    nstack = 1
    visited[_pack(coords, span)] = np.uint8(1)
    size = 0
    while nstack > 0 and size < cap:
        nstack -= 1
        for i in range(d):
            coords[i] = stack[nstack, i]
        size += 1
        for axis in range(d):
            for delta in (-1, 1):
                coords[axis] += delta
                key = _pack(coords, span)
                if key not in visited:
                    visited[key] = np.uint8(1)
                    u = point_uniform(seed, coords)
                    cw = np.searchsorted(cum, u, side="right") + 1
                    tw = cw if cw <= trunc_above else trunc_above + 1
                    if tw == t0:
                        if nstack == stack.shape[0]:
                            bigger = np.empty((2 * nstack, d), np.int64)
                            bigger[:nstack] = stack
                            stack = bigger
                        for i in range(d):
                            stack[nstack, i] = coords[i]
                        nstack += 1
                coords[axis] -= delta
    return t0, size


@njit(cache=True, nogil=True)
def bernoulli_sizes_batch(seeds, theta, d, cap):
    out = np.empty(seeds.size, np.int64)
    for i in range(seeds.size):
        out[i] = bernoulli_cluster_size(seeds[i], theta, d, cap)
    return out


@njit(cache=True, nogil=True)
def color_cluster_batch(seeds, cum, trunc_above, d, cap):
    colors = np.empty(seeds.size, np.int64)
    sizes = np.empty(seeds.size, np.int64)
    for i in range(seeds.size):
        c, s = color_cluster_size(seeds[i], cum, trunc_above, d, cap)
        colors[i] = c
        sizes[i] = s
    return colors, sizes


@njit(cache=True, nogil=True)
def kahan_cumsum(values):
    """Compensated running sums of a probability vector."""
    out = np.empty(values.size, np.float64)
    total = 0.0
    comp = 0.0
    for i in range(values.size):
        y = values[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out
