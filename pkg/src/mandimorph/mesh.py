"""Triangle mesh container, validation, OBJ/PLY I/O and geometric queries.

Coordinates are millimeters throughout.  Meshes are immutable after
construction (the arrays are locked), so they are safe to share across
threads and to use as cache keys.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import MeshParseError, MeshValidationError

MIN_TRIANGLE_AREA = 1e-12  # mm^2


def _triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    cross = np.cross(b - a, c - a)
    return 0.5 * np.sqrt((cross * cross).sum(axis=1))


class TriangleMesh:
    """Indexed triangle surface.

    Parameters
    ----------
    vertices : (n, 3) array of float
        Vertex coordinates in millimeters.
    triangles : (m, 3) array of int
        Vertex indices; every triangle must be non-degenerate.
    name : str, optional
        Identifier used in reports (defaults to a size-based tag).
    """

    def __init__(self, vertices, triangles, name: str | None = None,
                 validate: bool = True):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshValidationError("vertices must be an (n, 3) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshValidationError("triangles must be an (m, 3) array")
        if validate:
            self._validate(vertices, triangles)
        vertices.setflags(write=False)
        triangles.setflags(write=False)
        self.vertices = vertices
        self.triangles = triangles
        self.name = name or f"mesh-{len(vertices)}v-{len(triangles)}t"
        self._cache: dict = {}

    @staticmethod
    def _validate(vertices: np.ndarray, triangles: np.ndarray) -> None:
        if len(triangles) == 0:
            raise MeshValidationError("mesh has no triangles")
        if not np.isfinite(vertices).all():
            raise MeshValidationError("non-finite vertex coordinates")
        if len(vertices) == 0:
            raise MeshValidationError("mesh has no vertices")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshValidationError("triangle index out of range")
        repeated = ((triangles[:, 0] == triangles[:, 1])
                    | (triangles[:, 1] == triangles[:, 2])
                    | (triangles[:, 2] == triangles[:, 0]))
        if repeated.any():
            raise MeshValidationError(
                f"{int(repeated.sum())} triangles repeat a vertex index")
        areas = _triangle_areas(vertices, triangles)
        if (areas <= MIN_TRIANGLE_AREA).any():
            n_bad = int((areas <= MIN_TRIANGLE_AREA).sum())
            raise MeshValidationError(f"{n_bad} degenerate (zero-area) triangles")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def triangle_corners(self):
        """Per-triangle corner arrays (a, b, c), each (m, 3), cached."""
        if "corners" not in self._cache:
            t = self.triangles
            self._cache["corners"] = (
                np.ascontiguousarray(self.vertices[t[:, 0]]),
                np.ascontiguousarray(self.vertices[t[:, 1]]),
                np.ascontiguousarray(self.vertices[t[:, 2]]),
            )
        return self._cache["corners"]

    def unique_edges(self) -> np.ndarray:
        """Undirected unique edges as an (e, 2) index array, sorted."""
        if "edges" not in self._cache:
            t = self.triangles
            e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            e.sort(axis=1)
            self._cache["edges"] = np.unique(e, axis=0)
        return self._cache["edges"]

    def edge_multiplicity(self) -> np.ndarray:
        """How many triangles share each unique edge (order matches unique_edges)."""
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts

    def __repr__(self):
        return f"TriangleMesh({self.name!r}, {self.n_vertices} vertices, {self.n_triangles} triangles)"


@dataclass(frozen=True)
class SurfacePoint:
    """A point constrained to the mesh surface.

    ``position`` is derived from the barycentric weights and is stored for
    convenience; it always equals the weighted triangle-corner combination.
    """
    triangle_index: int
    barycentric: np.ndarray  # (3,) non-negative, sums to 1
    position: np.ndarray     # (3,) mm


def surface_point(mesh: TriangleMesh, triangle_index: int, barycentric) -> SurfacePoint:
    """Build a validated SurfacePoint from a triangle index and weights."""
    bary = np.asarray(barycentric, dtype=np.float64)
    if bary.shape != (3,):
        raise MeshValidationError("barycentric weights must have shape (3,)")
    if (bary < -1e-9).any() or abs(bary.sum() - 1.0) > 1e-9:
        raise MeshValidationError(
            f"invalid barycentric weights {bary} (must be >= 0 and sum to 1)")
    if not 0 <= triangle_index < mesh.n_triangles:
        raise MeshValidationError(f"triangle index {triangle_index} out of range")
    bary = np.clip(bary, 0.0, None)
    bary = bary / bary.sum()
    tri = mesh.triangles[triangle_index]
    pos = (bary[0] * mesh.vertices[tri[0]]
           + bary[1] * mesh.vertices[tri[1]]
           + bary[2] * mesh.vertices[tri[2]])
    bary.setflags(write=False)
    pos.setflags(write=False)
    return SurfacePoint(int(triangle_index), bary, pos)


def snap_to_surface(mesh: TriangleMesh, point) -> SurfacePoint:
    """Globally nearest point on the mesh surface to ``point``.

    Exhaustive over all triangles (vectorized), so the result is exact:
    the returned surface point minimizes the distance over every triangle.
    """
    p = np.asarray(point, dtype=np.float64)
    ta, tb, tc = mesh.triangle_corners()
    _, idx = kernels.nearest_triangle_brute(ta, tb, tc, p[None, :])
    tri = int(idx[0])
    _, bary = kernels.closest_point_and_bary(ta[tri], tb[tri], tc[tri], p)
    return surface_point(mesh, tri, bary)


def surface_area(mesh: TriangleMesh) -> float:
    """Total surface area in mm^2."""
    return float(_triangle_areas(mesh.vertices, mesh.triangles).sum())


def bounding_box(mesh: TriangleMesh) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned (min_corner, max_corner) in mm."""
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


def mean_edge_length(mesh: TriangleMesh) -> float:
    e = mesh.unique_edges()
    d = mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]]
    return float(np.sqrt((d * d).sum(axis=1)).mean())


# ---------------------------------------------------------------------------
# file I/O

def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        fmt = fmt.lower()
        if fmt not in ("obj", "ply"):
            raise MeshParseError(f"unsupported mesh format {fmt!r}")
        return fmt
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("obj", "ply"):
        return suffix
    raise MeshParseError(f"cannot infer mesh format from {path.name!r}")


def load_mesh(path, fmt: str | None = None) -> TriangleMesh:
    """Load an OBJ or ASCII-PLY triangle mesh.

    Degenerate triangles (zero area or repeated indices) are dropped with a
    warning; the count is available as ``mesh.dropped_degenerate``.
    """
    path = Path(path)
    if not path.is_file():
        raise MeshParseError(f"mesh file not found: {path}")
    fmt = _infer_format(path, fmt)
    if fmt == "obj":
        vertices, triangles, _ = _parse_obj(path)
    else:
        vertices, triangles, _ = _parse_ply(path)
    if len(triangles) == 0:
        raise MeshParseError(f"{path.name}: no faces found")
    if triangles.min(initial=0) < 0 or triangles.max(initial=-1) >= len(vertices):
        raise MeshParseError(f"{path.name}: face index out of range")

    repeated = ((triangles[:, 0] == triangles[:, 1])
                | (triangles[:, 1] == triangles[:, 2])
                | (triangles[:, 2] == triangles[:, 0]))
    areas = _triangle_areas(vertices, triangles)
    bad = repeated | (areas <= MIN_TRIANGLE_AREA)
    n_dropped = int(bad.sum())
    if n_dropped:
        warnings.warn(f"{path.name}: dropped {n_dropped} degenerate triangles",
                      stacklevel=2)
        triangles = triangles[~bad]
    if len(triangles) == 0:
        raise MeshParseError(f"{path.name}: all faces degenerate")

    mesh = TriangleMesh(vertices, triangles, name=path.stem)
    mesh.dropped_degenerate = n_dropped
    if (mesh.edge_multiplicity() > 2).any():
        n_nm = int((mesh.edge_multiplicity() > 2).sum())
        warnings.warn(f"{path.name}: {n_nm} non-manifold edges", stacklevel=2)
    return mesh


def load_vertex_colors(path) -> np.ndarray | None:
    """Per-vertex RGB (uint8) from an ASCII PLY, or None when absent."""
    path = Path(path)
    _, _, colors = _parse_ply(path)
    return colors


def _parse_obj(path: Path):
    vertices, faces = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshParseError(f"{path.name}:{lineno}: malformed vertex line")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshParseError(f"{path.name}:{lineno}: {exc}") from exc
            elif tag == "f":
                refs = parts[1:]
                if len(refs) != 3:
                    raise MeshParseError(
                        f"{path.name}:{lineno}: only triangular faces are supported "
                        f"(got {len(refs)} vertices)")
                idx = []
                for ref in refs:
                    try:
                        i = int(ref.split("/")[0])
                    except ValueError as exc:
                        raise MeshParseError(f"{path.name}:{lineno}: {exc}") from exc
                    if i == 0:
                        raise MeshParseError(f"{path.name}:{lineno}: OBJ indices are 1-based")
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                faces.append(idx)
            # all other directives ignored
    return (np.array(vertices, dtype=np.float64).reshape(-1, 3),
            np.array(faces, dtype=np.int64).reshape(-1, 3),
            None)


def _parse_ply(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = iter(fh.read().splitlines())
    try:
        if next(lines).strip() != "ply":
            raise MeshParseError(f"{path.name}: missing 'ply' magic line")
    except StopIteration:
        raise MeshParseError(f"{path.name}: empty file") from None

    elements: list[tuple[str, int, list[str]]] = []
    fmt_seen = False
    for line in lines:
        parts = line.strip().split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] != "ascii":
                raise MeshParseError(f"{path.name}: only ASCII PLY is supported")
            fmt_seen = True
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise MeshParseError(f"{path.name}: property before element")
            elements[-1][2].append(parts[-1])
        elif parts[0] == "end_header":
            break
    else:
        raise MeshParseError(f"{path.name}: unterminated PLY header")
    if not fmt_seen:
        raise MeshParseError(f"{path.name}: missing PLY format line")

    vertices = triangles = None
    colors = None
    for name, count, props in elements:
        rows = []
        for _ in range(count):
            try:
                rows.append(next(lines).split())
            except StopIteration:
                raise MeshParseError(f"{path.name}: truncated {name} data") from None
        if name == "vertex":
            try:
                ix, iy, iz = props.index("x"), props.index("y"), props.index("z")
            except ValueError:
                raise MeshParseError(f"{path.name}: vertex element lacks x/y/z") from None
            try:
                data = np.array(rows, dtype=np.float64)
            except ValueError as exc:
                raise MeshParseError(f"{path.name}: bad vertex data: {exc}") from exc
            vertices = data[:, [ix, iy, iz]]
            if {"red", "green", "blue"} <= set(props):
                ir, ig, ib = (props.index(k) for k in ("red", "green", "blue"))
                colors = data[:, [ir, ig, ib]].astype(np.uint8)
        elif name == "face":
            tri = []
            for lineno, row in enumerate(rows):
                if int(row[0]) != 3:
                    raise MeshParseError(
                        f"{path.name}: face {lineno} has {row[0]} vertices, expected 3")
                tri.append([int(row[1]), int(row[2]), int(row[3])])
            triangles = np.array(tri, dtype=np.int64).reshape(-1, 3)
    if vertices is None:
        raise MeshParseError(f"{path.name}: no vertex element")
    if triangles is None:
        triangles = np.zeros((0, 3), dtype=np.int64)
    return vertices, triangles, colors


def _fmt(x: float) -> str:
    # repr() of a Python float is the shortest string that round-trips exactly
    return repr(float(x))


def save_mesh(mesh: TriangleMesh, path, fmt: str | None = None,
              colors: np.ndarray | None = None) -> None:
    """Write a mesh as OBJ or ASCII PLY.

    Coordinates are written with full round-trip precision, so
    ``load_mesh(save_mesh(m))`` reproduces the arrays exactly.  ``colors``
    (one RGB uint8 triple per vertex) are only representable in PLY; when
    saving OBJ they are ignored with a warning.
    """
    path = Path(path)
    fmt = _infer_format(path, fmt)
    if colors is not None:
        colors = np.asarray(colors)
        if colors.shape != (mesh.n_vertices, 3):
            raise MeshValidationError(
                f"colors must be ({mesh.n_vertices}, 3), got {colors.shape}")
    if fmt == "obj":
        if colors is not None:
            warnings.warn("OBJ has no standard per-vertex colors; colors ignored",
                          stacklevel=2)
        _write_obj(mesh, path)
    else:
        _write_ply(mesh, path, colors)


def _write_obj(mesh: TriangleMesh, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def _write_ply(mesh: TriangleMesh, path: Path, colors: np.ndarray | None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {mesh.n_vertices}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if colors is not None:
            fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        fh.write(f"element face {mesh.n_triangles}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("end_header\n")
        if colors is None:
            for v in mesh.vertices:
                fh.write(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        else:
            for v, c in zip(mesh.vertices, colors):
                fh.write(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])} "
                         f"{int(c[0])} {int(c[1])} {int(c[2])}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")
