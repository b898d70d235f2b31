"""Vectorized pure-numpy kernels.

Mirrors the numba backend's arithmetic exactly: the same closest-point
region cascade (Ericson's point/triangle classification) with the same
operation order, so distances computed here match the numba kernels and
brute force matches BVH traversal bit-for-bit.
"""
from __future__ import annotations

import numpy as np

# relative slack on the pruning bound; avoids discarding a winning triangle
# whose box lower bound rounds a few ulps above the current best
_PRUNE_SLACK = 1.0 + 1e-12

_CHUNK_ELEMS = 1_000_000


def _sqdist_flat(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    """Squared point-triangle distances for flat component arrays."""
    abx = bx - ax; aby = by - ay; abz = bz - az
    acx = cx - ax; acy = cy - ay; acz = cz - az
    apx = px - ax; apy = py - ay; apz = pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz

    out = np.empty(ax.shape, dtype=np.float64)
    remain = np.ones(ax.shape, dtype=bool)

    # vertex A
    sel = (d1 <= 0.0) & (d2 <= 0.0)
    if sel.any():
        out[sel] = apx[sel] * apx[sel] + apy[sel] * apy[sel] + apz[sel] * apz[sel]
        remain &= ~sel

    bpx = px - bx; bpy = py - by; bpz = pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz

    # vertex B
    sel = remain & (d3 >= 0.0) & (d4 <= d3)
    if sel.any():
        out[sel] = bpx[sel] * bpx[sel] + bpy[sel] * bpy[sel] + bpz[sel] * bpz[sel]
        remain &= ~sel

    # edge AB
    vc = d1 * d4 - d3 * d2
    sel = remain & (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    if sel.any():
        v = d1[sel] / (d1[sel] - d3[sel])
        ex = apx[sel] - v * abx[sel]
        ey = apy[sel] - v * aby[sel]
        ez = apz[sel] - v * abz[sel]
        out[sel] = ex * ex + ey * ey + ez * ez
        remain &= ~sel

    cpx = px - cx; cpy = py - cy; cpz = pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz

    # vertex C
    sel = remain & (d6 >= 0.0) & (d5 <= d6)
    if sel.any():
        out[sel] = cpx[sel] * cpx[sel] + cpy[sel] * cpy[sel] + cpz[sel] * cpz[sel]
        remain &= ~sel

    # edge AC
    vb = d5 * d2 - d1 * d6
    sel = remain & (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    if sel.any():
        w = d2[sel] / (d2[sel] - d6[sel])
        ex = apx[sel] - w * acx[sel]
        ey = apy[sel] - w * acy[sel]
        ez = apz[sel] - w * acz[sel]
        out[sel] = ex * ex + ey * ey + ez * ez
        remain &= ~sel

    # edge BC
    va = d3 * d6 - d5 * d4
    sel = remain & (va <= 0.0) & ((d4 - d3) >= 0.0) & ((d5 - d6) >= 0.0)
    if sel.any():
        w = (d4[sel] - d3[sel]) / ((d4[sel] - d3[sel]) + (d5[sel] - d6[sel]))
        ex = bpx[sel] - w * (cx[sel] - bx[sel])
        ey = bpy[sel] - w * (cy[sel] - by[sel])
        ez = bpz[sel] - w * (cz[sel] - bz[sel])
        out[sel] = ex * ex + ey * ey + ez * ez
        remain &= ~sel

    # interior
    if remain.any():
        denom = va[remain] + vb[remain] + vc[remain]
        v = vb[remain] / denom
        w = vc[remain] / denom
        ex = apx[remain] - v * abx[remain] - w * acx[remain]
        ey = apy[remain] - v * aby[remain] - w * acy[remain]
        ez = apz[remain] - v * abz[remain] - w * acz[remain]
        out[remain] = ex * ex + ey * ey + ez * ez
    return out


def paired_sqdist(tri_a, tri_b, tri_c, points):
    return _sqdist_flat(
        tri_a[:, 0], tri_a[:, 1], tri_a[:, 2],
        tri_b[:, 0], tri_b[:, 1], tri_b[:, 2],
        tri_c[:, 0], tri_c[:, 1], tri_c[:, 2],
        points[:, 0], points[:, 1], points[:, 2],
    )


def _sqdist_grid(ta, tb, tc, queries):
    """(k, m) squared distances between k queries and m triangles."""
    k, m = len(queries), len(ta)
    comps = []
    for arr in (ta, tb, tc):
        for j in range(3):
            comps.append(np.broadcast_to(arr[:, j], (k, m)).ravel())
    for j in range(3):
        comps.append(np.broadcast_to(queries[:, j][:, None], (k, m)).ravel())
    return _sqdist_flat(*comps).reshape(k, m)


def brute_nearest(ta, tb, tc, queries):
    m = len(ta)
    nq = len(queries)
    out_d = np.empty(nq, dtype=np.float64)
    out_i = np.empty(nq, dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMS // max(m, 1))
    for s in range(0, nq, chunk):
        q = queries[s:s + chunk]
        d = _sqdist_grid(ta, tb, tc, q)
        idx = np.argmin(d, axis=1)
        out_i[s:s + chunk] = idx
        out_d[s:s + chunk] = d[np.arange(len(q)), idx]
    return out_d, out_i


def _box_sqdist(queries, lo, hi):
    px, py, pz = queries[:, 0], queries[:, 1], queries[:, 2]
    dx = np.maximum(np.maximum(lo[:, 0] - px, px - hi[:, 0]), 0.0)
    dy = np.maximum(np.maximum(lo[:, 1] - py, py - hi[:, 1]), 0.0)
    dz = np.maximum(np.maximum(lo[:, 2] - pz, pz - hi[:, 2]), 0.0)
    return dx * dx + dy * dy + dz * dz


def _leaf_update(queries, best, qi, starts, counts, ta, tb, tc, leaf_size):
    """Evaluate leaf triangles for (query, leaf) pairs and fold into best."""
    offsets = np.arange(leaf_size, dtype=np.int64)
    slot = starts[:, None] + offsets[None, :]
    mask = offsets[None, :] < counts[:, None]
    slot = np.where(mask, slot, 0)
    q = queries[qi]
    comps = []
    for arr in (ta, tb, tc):
        g = arr[slot]                      # (P, L, 3)
        for j in range(3):
            comps.append(g[:, :, j].ravel())
    for j in range(3):
        comps.append(np.broadcast_to(q[:, j][:, None], slot.shape).ravel())
    d = _sqdist_flat(*comps).reshape(slot.shape)
    d = np.where(mask, d, np.inf)
    np.minimum.at(best, qi, d.min(axis=1))


def bvh_nearest(queries, node_min, node_max, node_left, node_right,
                node_start, node_count, ta, tb, tc):
    """Batched BVH traversal, wave by wave over (query, node) pairs."""
    nq = len(queries)
    best = np.full(nq, np.inf)
    leaf_size = int(node_count.max())

    # greedy descent to one leaf per query seeds the pruning bound
    node = np.zeros(nq, dtype=np.int64)
    active = np.nonzero(node_left[node] != -1)[0]
    while len(active):
        l = node_left[node[active]]
        r = node_right[node[active]]
        dl = _box_sqdist(queries[active], node_min[l], node_max[l])
        dr = _box_sqdist(queries[active], node_min[r], node_max[r])
        node[active] = np.where(dl <= dr, l, r)
        active = active[node_left[node[active]] != -1]
    _leaf_update(queries, best, np.arange(nq, dtype=np.int64),
                 node_start[node], node_count[node], ta, tb, tc, leaf_size)

    qi = np.arange(nq, dtype=np.int64)
    nd = np.zeros(nq, dtype=np.int64)
    while len(qi):
        lb = _box_sqdist(queries[qi], node_min[nd], node_max[nd])
        keep = lb <= best[qi] * _PRUNE_SLACK
        qi = qi[keep]
        nd = nd[keep]
        if not len(qi):
            break
        is_leaf = node_left[nd] == -1
        if is_leaf.any():
            qs = qi[is_leaf]
            ns = nd[is_leaf]
            _leaf_update(queries, best, qs, node_start[ns], node_count[ns],
                         ta, tb, tc, leaf_size)
        qi_in = qi[~is_leaf]
        nd_in = nd[~is_leaf]
        qi = np.concatenate([qi_in, qi_in])
        nd = np.concatenate([node_left[nd_in], node_right[nd_in]])
    return best
