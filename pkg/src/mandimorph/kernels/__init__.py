"""Numeric kernels with selectable backend.

The hot inner loops (point-to-triangle distances, BVH traversal) exist twice:
a numba ``@njit`` implementation and a vectorized pure-numpy fallback.  Both
evaluate the same arithmetic in the same order, so brute-force and indexed
queries agree bit-for-bit within a backend.

Selection: the ``MANDIMORPH_BACKEND`` environment variable (``numba`` or
``numpy``) wins; otherwise numba is used when importable.  ``set_backend``
overrides at runtime (used by tests and the benchmark).
"""
from __future__ import annotations

import os

import numpy as np

from . import numpy_backend
from .bvh import TriangleBVH, build_bvh

_ENV_VAR = "MANDIMORPH_BACKEND"
_VALID = ("numba", "numpy")

_backend_name: str | None = None
_numba_backend = None


def _try_numba():
    global _numba_backend
    if _numba_backend is None:
        from . import numba_backend
        _numba_backend = numba_backend
    return _numba_backend


def available_backends() -> tuple[str, ...]:
    try:
        _try_numba()
    except ImportError:
        return ("numpy",)
    return ("numba", "numpy")


def set_backend(name: str) -> None:
    """Force a kernel backend ('numba' or 'numpy') for this process."""
    global _backend_name
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {_VALID}")
    if name == "numba":
        _try_numba()
    _backend_name = name


def get_backend() -> str:
    global _backend_name
    if _backend_name is None:
        env = os.environ.get(_ENV_VAR, "").strip().lower()
        if env:
            set_backend(env)
        else:
            try:
                _try_numba()
                _backend_name = "numba"
            except ImportError:
                _backend_name = "numpy"
    return _backend_name


def _impl():
    return _try_numba() if get_backend() == "numba" else numpy_backend


def paired_point_triangle_sqdist(tri_a, tri_b, tri_c, points) -> np.ndarray:
    """Squared point-triangle distance for paired arrays of shape (..., 3)."""
    tri_a, tri_b, tri_c, points = np.broadcast_arrays(tri_a, tri_b, tri_c, points)
    shape = points.shape[:-1]
    flat = [np.ascontiguousarray(x.reshape(-1, 3), dtype=np.float64)
            for x in (tri_a, tri_b, tri_c, points)]
    return _impl().paired_sqdist(*flat).reshape(shape)


def nearest_triangle_brute(tri_a, tri_b, tri_c, queries):
    """Exhaustive nearest-triangle search.

    Returns ``(sqdist, tri_idx)`` arrays of length ``len(queries)``; ties go to
    the lowest triangle index.
    """
    tri_a = np.ascontiguousarray(tri_a, dtype=np.float64)
    tri_b = np.ascontiguousarray(tri_b, dtype=np.float64)
    tri_c = np.ascontiguousarray(tri_c, dtype=np.float64)
    queries = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float64)
    return _impl().brute_nearest(tri_a, tri_b, tri_c, queries)


def nearest_sqdist_bvh(bvh: TriangleBVH, queries) -> np.ndarray:
    """Per-query min squared distance to any triangle, via the BVH."""
    queries = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float64)
    return _impl().bvh_nearest(
        queries,
        bvh.node_min, bvh.node_max, bvh.node_left, bvh.node_right,
        bvh.node_start, bvh.node_count, bvh.tri_a, bvh.tri_b, bvh.tri_c,
    )


def closest_point_and_bary(a, b, c, p):
    """Closest point on one triangle plus its barycentric coordinates.

    Plain-numpy scalar path shared by both backends; used where the actual
    foot point is needed (surface snapping), not just the distance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)

    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab @ ap
    d2 = ac @ ap
    if d1 <= 0.0 and d2 <= 0.0:
        return a.copy(), np.array([1.0, 0.0, 0.0])
    bp = p - b
    d3 = ab @ bp
    d4 = ac @ bp
    if d3 >= 0.0 and d4 <= d3:
        return b.copy(), np.array([0.0, 1.0, 0.0])
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return a + v * ab, np.array([1.0 - v, v, 0.0])
    cp = p - c
    d5 = ab @ cp
    d6 = ac @ cp
    if d6 >= 0.0 and d5 <= d6:
        return c.copy(), np.array([0.0, 0.0, 1.0])
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return a + w * ac, np.array([1.0 - w, 0.0, w])
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return b + w * (c - b), np.array([0.0, 1.0 - w, w])
    denom = va + vb + vc
    v = vb / denom
    w = vc / denom
    return a + v * ab + w * ac, np.array([1.0 - v - w, v, w])


__all__ = [
    "TriangleBVH",
    "build_bvh",
    "available_backends",
    "get_backend",
    "set_backend",
    "paired_point_triangle_sqdist",
    "nearest_triangle_brute",
    "nearest_sqdist_bvh",
    "closest_point_and_bary",
]
