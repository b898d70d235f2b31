"""Numba-compiled kernels. Arithmetic mirrors numpy_backend exactly."""
from __future__ import annotations

import numpy as np
from numba import njit, prange

_PRUNE_SLACK = 1.0 + 1e-12
_STACK_DEPTH = 128


@njit(cache=True)
def _tri_sqdist(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    abx = bx - ax; aby = by - ay; abz = bz - az
    acx = cx - ax; acy = cy - ay; acz = cz - az
    apx = px - ax; apy = py - ay; apz = pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return apx * apx + apy * apy + apz * apz

    bpx = px - bx; bpy = py - by; bpz = pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bpx * bpx + bpy * bpy + bpz * bpz

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        ex = apx - v * abx
        ey = apy - v * aby
        ez = apz - v * abz
        return ex * ex + ey * ey + ez * ez

    cpx = px - cx; cpy = py - cy; cpz = pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cpx * cpx + cpy * cpy + cpz * cpz

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        ex = apx - w * acx
        ey = apy - w * acy
        ez = apz - w * acz
        return ex * ex + ey * ey + ez * ez

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        ex = bpx - w * (cx - bx)
        ey = bpy - w * (cy - by)
        ez = bpz - w * (cz - bz)
        return ex * ex + ey * ey + ez * ez

    denom = va + vb + vc
    v = vb / denom
    w = vc / denom
    ex = apx - v * abx - w * acx
    ey = apy - v * aby - w * acy
    ez = apz - v * abz - w * acz
    return ex * ex + ey * ey + ez * ez


@njit(cache=True, parallel=True)
def paired_sqdist(tri_a, tri_b, tri_c, points):
    n = points.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in prange(n):
        out[i] = _tri_sqdist(
            tri_a[i, 0], tri_a[i, 1], tri_a[i, 2],
            tri_b[i, 0], tri_b[i, 1], tri_b[i, 2],
            tri_c[i, 0], tri_c[i, 1], tri_c[i, 2],
            points[i, 0], points[i, 1], points[i, 2],
        )
    return out


@njit(cache=True, parallel=True)
def brute_nearest(ta, tb, tc, queries):
    nq = queries.shape[0]
    m = ta.shape[0]
    out_d = np.empty(nq, dtype=np.float64)
    out_i = np.empty(nq, dtype=np.int64)
    for i in prange(nq):
        px = queries[i, 0]; py = queries[i, 1]; pz = queries[i, 2]
        best = np.inf
        besti = -1
        for t in range(m):
            d = _tri_sqdist(ta[t, 0], ta[t, 1], ta[t, 2],
                            tb[t, 0], tb[t, 1], tb[t, 2],
                            tc[t, 0], tc[t, 1], tc[t, 2], px, py, pz)
            if d < best:
                best = d
                besti = t
        out_d[i] = best
        out_i[i] = besti
    return out_d, out_i


@njit(cache=True)
def _box_sqdist(px, py, pz, lo0, lo1, lo2, hi0, hi1, hi2):
    dx = max(max(lo0 - px, px - hi0), 0.0)
    dy = max(max(lo1 - py, py - hi1), 0.0)
    dz = max(max(lo2 - pz, pz - hi2), 0.0)
    return dx * dx + dy * dy + dz * dz


@njit(cache=True, parallel=True)
def bvh_nearest(queries, node_min, node_max, node_left, node_right,
                node_start, node_count, ta, tb, tc):
    nq = queries.shape[0]
    out = np.empty(nq, dtype=np.float64)
    for i in prange(nq):
        px = queries[i, 0]; py = queries[i, 1]; pz = queries[i, 2]
        best = np.inf
        stack = np.empty(_STACK_DEPTH, dtype=np.int64)
        top = 0
        stack[0] = 0
        while top >= 0:
            node = stack[top]
            top -= 1
            lb = _box_sqdist(px, py, pz,
                             node_min[node, 0], node_min[node, 1], node_min[node, 2],
                             node_max[node, 0], node_max[node, 1], node_max[node, 2])
            if lb > best * _PRUNE_SLACK:
                continue
            left = node_left[node]
            if left == -1:
                s = node_start[node]
                e = s + node_count[node]
                for t in range(s, e):
                    d = _tri_sqdist(ta[t, 0], ta[t, 1], ta[t, 2],
                                    tb[t, 0], tb[t, 1], tb[t, 2],
                                    tc[t, 0], tc[t, 1], tc[t, 2], px, py, pz)
                    if d < best:
                        best = d
            else:
                right = node_right[node]
                dl = _box_sqdist(px, py, pz,
                                 node_min[left, 0], node_min[left, 1], node_min[left, 2],
                                 node_max[left, 0], node_max[left, 1], node_max[left, 2])
                dr = _box_sqdist(px, py, pz,
                                 node_min[right, 0], node_min[right, 1], node_min[right, 2],
                                 node_max[right, 0], node_max[right, 1], node_max[right, 2])
                # push the farther child first so the nearer one is popped first
                if dl <= dr:
                    top += 1; stack[top] = right
                    top += 1; stack[top] = left
                else:
                    top += 1; stack[top] = left
                    top += 1; stack[top] = right
        out[i] = best
    return out
