"""Flat-array bounding volume hierarchy over triangles.

Built once in numpy (deterministic median split), traversed by either
kernel backend.  Nodes are stored as parallel arrays so the numba kernels
can walk them without objects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 8


@dataclass(frozen=True)
class TriangleBVH:
    node_min: np.ndarray   # (n_nodes, 3)
    node_max: np.ndarray   # (n_nodes, 3)
    node_left: np.ndarray  # (n_nodes,) child index, -1 for leaves
    node_right: np.ndarray
    node_start: np.ndarray  # (n_nodes,) first triangle slot (leaves)
    node_count: np.ndarray  # (n_nodes,) triangle count, 0 for internal nodes
    tri_index: np.ndarray   # (n_tris,) slot -> original triangle index
    tri_a: np.ndarray       # (n_tris, 3) permuted triangle vertices
    tri_b: np.ndarray
    tri_c: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_left)

    @property
    def n_triangles(self) -> int:
        return len(self.tri_index)


def build_bvh(vertices: np.ndarray, triangles: np.ndarray,
              leaf_size: int = LEAF_SIZE) -> TriangleBVH:
    """Median-split BVH; identical input yields an identical structure.

    Splits on the widest axis of the centroid bounds with a stable sort, so
    the tree (and therefore every query) is reproducible.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    m = len(triangles)
    if m == 0:
        raise ValueError("cannot build an index over an empty triangle list")

    ta = vertices[triangles[:, 0]]
    tb = vertices[triangles[:, 1]]
    tc = vertices[triangles[:, 2]]
    cent = (ta + tb + tc) / 3.0
    lo = np.minimum(np.minimum(ta, tb), tc)
    hi = np.maximum(np.maximum(ta, tb), tc)

    perm = np.arange(m, dtype=np.int64)
    node_min, node_max = [], []
    node_left, node_right = [], []
    node_start, node_count = [], []

    # each stack entry is (node_id, start, end); children are allocated when
    # their parent is processed
    stack = [(0, 0, m)]
    node_min.append(None); node_max.append(None)
    node_left.append(-1); node_right.append(-1)
    node_start.append(0); node_count.append(0)

    while stack:
        node_id, start, end = stack.pop()
        idx = perm[start:end]
        node_min[node_id] = lo[idx].min(axis=0)
        node_max[node_id] = hi[idx].max(axis=0)
        if end - start <= leaf_size:
            node_start[node_id] = start
            node_count[node_id] = end - start
            continue
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        order = np.argsort(c[:, axis], kind="stable")
        perm[start:end] = idx[order]
        mid = start + (end - start) // 2

        left_id = len(node_left)
        right_id = left_id + 1
        for lst, fill in ((node_min, None), (node_max, None)):
            lst.extend([fill, fill])
        node_left.extend([-1, -1]); node_right.extend([-1, -1])
        node_start.extend([0, 0]); node_count.extend([0, 0])
        node_left[node_id] = left_id
        node_right[node_id] = right_id
        stack.append((left_id, start, mid))
        stack.append((right_id, mid, end))

    return TriangleBVH(
        node_min=np.array(node_min, dtype=np.float64),
        node_max=np.array(node_max, dtype=np.float64),
        node_left=np.array(node_left, dtype=np.int64),
        node_right=np.array(node_right, dtype=np.int64),
        node_start=np.array(node_start, dtype=np.int64),
        node_count=np.array(node_count, dtype=np.int64),
        tri_index=perm,
        tri_a=np.ascontiguousarray(ta[perm]),
        tri_b=np.ascontiguousarray(tb[perm]),
        tri_c=np.ascontiguousarray(tc[perm]),
    )
