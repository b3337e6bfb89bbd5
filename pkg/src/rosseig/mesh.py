"""Triangle meshing of smooth planar domains for the 2-D conformal models.

Meshes live in chart coordinates.  The generator samples the boundary curve
uniformly by arclength, fills the interior with a hexagonal lattice, Delaunay
triangulates, discards triangles outside the domain, and relaxes interior
vertices by Laplacian smoothing with periodic re-triangulation.  Domains that
are mirror symmetric about the x-axis can be meshed as a half domain and
reflected, which makes the symmetry exact to the bit level; the built-in
curves (geodesic disks, ellipses, two-lobe peanuts) use that path.

Quality contract: conforming triangulation, counterclockwise triangles,
minimum angle >= 15 degrees, maximum edge length <= ``target_h``.  A small
ladder of interior-margin parameters is retried before giving up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

__all__ = [
    "Mesh",
    "MeshQualityError",
    "GeometryError",
    "CircleCurve",
    "EllipseCurve",
    "PeanutCurve",
    "PolylineCurve",
    "mesh_domain",
    "write_mesh",
    "read_mesh",
]


class MeshQualityError(RuntimeError):
    """The generator could not reach the quality contract."""


class GeometryError(ValueError):
    """Invalid input geometry (e.g. a self-intersecting boundary)."""


# ---------------------------------------------------------------------------
# Boundary curves
# ---------------------------------------------------------------------------


class _Curve:
    """Closed parametric curve; t runs over [0, 1)."""

    symmetric_x = False

    def point(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def sample(self, n: int) -> np.ndarray:
        t = np.arange(n) / n
        return self.point(t)

    def arclength_sample(self, spacing: float, refine: int = 4096) -> np.ndarray:
        """Points spaced uniformly in arclength, count even, first at t=0."""
        t = np.linspace(0.0, 1.0, refine + 1)
        pts = self.point(t)
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        s = np.concatenate(([0.0], np.cumsum(seg)))
        total = s[-1]
        n = max(8, int(math.ceil(total / spacing)))
        n += n % 2  # even count keeps x-symmetric curves symmetric
        targets = np.arange(n) * total / n
        tt = np.interp(targets, s, t)
        return self.point(tt)


@dataclass
class CircleCurve(_Curve):
    radius: float
    center: tuple[float, float] = (0.0, 0.0)
    symmetric_x = True

    def point(self, t):
        th = 2.0 * math.pi * np.asarray(t)
        return np.stack(
            [self.center[0] + self.radius * np.cos(th),
             self.center[1] + self.radius * np.sin(th)], axis=-1)


@dataclass
class EllipseCurve(_Curve):
    ax: float
    ay: float
    center: tuple[float, float] = (0.0, 0.0)
    symmetric_x = True

    def point(self, t):
        th = 2.0 * math.pi * np.asarray(t)
        return np.stack(
            [self.center[0] + self.ax * np.cos(th),
             self.center[1] + self.ay * np.sin(th)], axis=-1)


@dataclass
class PeanutCurve(_Curve):
    """Two-lobe curve rho(theta) = size * (1 + pinch * cos(2 theta))."""

    size: float
    pinch: float
    center: tuple[float, float] = (0.0, 0.0)
    symmetric_x = True

    def __post_init__(self):
        if not 0.0 < self.pinch <= 0.6:
            raise GeometryError(f"peanut pinch must lie in (0, 0.6], got {self.pinch}")

    def point(self, t):
        th = 2.0 * math.pi * np.asarray(t)
        rho = self.size * (1.0 + self.pinch * np.cos(2.0 * th))
        return np.stack(
            [self.center[0] + rho * np.cos(th),
             self.center[1] + rho * np.sin(th)], axis=-1)


@dataclass
class PolylineCurve(_Curve):
    """Closed polyline through the given points (self-intersection checked)."""

    points: np.ndarray
    symmetric_x = False

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 3:
            raise GeometryError("polyline needs at least 3 points")
        if np.allclose(self.points[0], self.points[-1]):
            self.points = self.points[:-1]
        if _polyline_self_intersects(self.points):
            raise GeometryError("boundary polyline is self-intersecting")

    def point(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float)) % 1.0
        pts = np.vstack([self.points, self.points[:1]])
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        s = np.concatenate(([0.0], np.cumsum(seg)))
        x = t * s[-1]
        i = np.clip(np.searchsorted(s, x, side="right") - 1, 0, len(seg) - 1)
        w = (x - s[i]) / seg[i]
        out = pts[i] * (1.0 - w[:, None]) + pts[i + 1] * w[:, None]
        return out


def _cross2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _segments_intersect(p1, p2, q1, q2):
    d1 = _cross2(q2 - q1, p1 - q1)
    d2 = _cross2(q2 - q1, p2 - q1)
    d3 = _cross2(p2 - p1, q1 - p1)
    d4 = _cross2(p2 - p1, q2 - p1)
    return (d1 * d2 < 0.0) and (d3 * d4 < 0.0)


def _polyline_self_intersects(pts) -> bool:
    n = len(pts)
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_intersect(a1, a2, pts[j], pts[(j + 1) % n]):
                return True
    return False


# ---------------------------------------------------------------------------
# Point-in-polygon and distances (vectorized)
# ---------------------------------------------------------------------------


def _points_in_polygon(pts, poly):
    """Crossing-number test; poly is (n,2), closed implicitly."""
    x, y = pts[:, 0], pts[:, 1]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(len(pts), dtype=bool)
    for xa, ya, xb, yb in zip(x0, y0, x1, y1):
        cross = ((ya > y) != (yb > y)) & (
            x < (xb - xa) * (y - ya) / (yb - ya + 1e-300) + xa)
        inside ^= cross
    return inside


def _dist_to_polyline(pts, poly, closed=True):
    """Unsigned distance from each point to the polyline, chunked."""
    if closed:
        a = poly
        b = np.roll(poly, -1, axis=0)
    else:
        a = poly[:-1]
        b = poly[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab) + 1e-300
    out = np.empty(len(pts))
    chunk = max(1, 2_000_000 // max(len(a), 1))
    for lo in range(0, len(pts), chunk):
        p = pts[lo:lo + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pij,ij->pi", ap, ab) / denom, 0.0, 1.0)
        proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.linalg.norm(p[:, None, :] - proj, axis=2)
        out[lo:lo + chunk] = d.min(axis=1)
    return out


# ---------------------------------------------------------------------------
# Mesh container
# ---------------------------------------------------------------------------


@dataclass
class Mesh:
    """Conforming triangulation: vertices (nv,2), CCW triangles (nt,3)."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_flag: np.ndarray = field(default=None)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self._orient_ccw()
        if self.boundary_flag is None:
            self.boundary_flag = np.zeros(len(self.vertices), dtype=bool)
            for e in self.boundary_edges():
                self.boundary_flag[list(e)] = True

    def _orient_ccw(self):
        v = self.vertices
        t = self.triangles
        e1 = v[t[:, 1]] - v[t[:, 0]]
        e2 = v[t[:, 2]] - v[t[:, 0]]
        flip = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) < 0.0
        t[flip, 1], t[flip, 2] = t[flip, 2].copy(), t[flip, 1].copy()

    @property
    def nv(self) -> int:
        return len(self.vertices)

    @property
    def nt(self) -> int:
        return len(self.triangles)

    def edges(self):
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.sort(e, axis=1)

    def boundary_edges(self) -> list[tuple[int, int]]:
        e = self.edges()
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return [tuple(int(i) for i in row) for row in uniq[counts == 1]]

    def boundary_loop(self) -> list[int]:
        """Boundary vertices ordered along the (single) closed loop."""
        edges = self.boundary_edges()
        adj: dict[int, list[int]] = {}
        for i, j in edges:
            adj.setdefault(i, []).append(j)
            adj.setdefault(j, []).append(i)
        if any(len(v) != 2 for v in adj.values()):
            raise MeshQualityError("boundary is not a single closed polyline")
        start = min(adj)
        loop = [start, adj[start][0]]
        while loop[-1] != start:
            nexts = adj[loop[-1]]
            loop.append(nexts[0] if nexts[0] != loop[-2] else nexts[1])
            if len(loop) > len(edges) + 1:
                raise MeshQualityError("boundary loop does not close")
        if len(loop) - 1 != len(edges):
            raise MeshQualityError("boundary has more than one component")
        return loop

    def h_max(self) -> float:
        e = self.edges()
        d = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
        return float(d.max())

    def min_angle_deg(self) -> float:
        v = self.vertices
        t = self.triangles
        p = [v[t[:, i]] for i in range(3)]
        ang_min = np.full(self.nt, np.inf)
        for i in range(3):
            a = p[(i + 1) % 3] - p[i]
            b = p[(i + 2) % 3] - p[i]
            cosang = np.einsum("ij,ij->i", a, b) / (
                np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            ang = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
            ang_min = np.minimum(ang_min, ang)
        return float(ang_min.min())

    def areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        e1 = v[t[:, 1]] - v[t[:, 0]]
        e2 = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def write_mesh(mesh: Mesh, path):
    """Text format: 'nv nt', nv lines 'x y', nt lines 'i j k' (0-based)."""
    with open(path, "w") as f:
        f.write(f"{mesh.nv} {mesh.nt}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")


def read_mesh(path) -> Mesh:
    with open(path) as f:
        nv, nt = (int(tok) for tok in f.readline().split())
        verts = np.array([[float(t) for t in f.readline().split()] for _ in range(nv)])
        tris = np.array([[int(t) for t in f.readline().split()] for _ in range(nt)])
    return Mesh(vertices=verts, triangles=tris)


# ---------------------------------------------------------------------------
# Generator
# ---------------------------------------------------------------------------

_MARGINS = (0.55, 0.45, 0.65, 0.5, 0.7)


def _hex_lattice(bbox, h, rows_from_zero=False):
    """Hexagonal lattice with spacing h; rows mirror-symmetric about y=0."""
    (xmin, ymin), (xmax, ymax) = bbox
    dy = h * math.sqrt(3.0) / 2.0
    j0 = 1 if rows_from_zero else int(math.floor(ymin / dy)) - 1
    j1 = int(math.ceil(ymax / dy)) + 1
    pts = []
    for j in range(j0, j1 + 1):
        y = j * dy
        if y < ymin - dy or y > ymax + dy:
            continue
        off = 0.5 * h if (j % 2) else 0.0
        i0 = int(math.floor((xmin - off) / h)) - 1
        i1 = int(math.ceil((xmax - off) / h)) + 1
        xs = off + np.arange(i0, i1 + 1) * h
        pts.append(np.stack([xs, np.full(xs.size, y)], axis=1))
    return np.vstack(pts) if pts else np.zeros((0, 2))


def _triangulate_inside(points, poly):
    tri = Delaunay(points)
    cent = points[tri.simplices].mean(axis=1)
    keep = _points_in_polygon(cent, poly)
    return tri.simplices[keep]


def _smooth(points, tris, movable, axis_slide, rounds=3):
    """Laplacian smoothing; ``movable`` vertices move, ``axis_slide`` keep y."""
    n = len(points)
    for _ in range(rounds):
        acc = np.zeros((n, 2))
        cnt = np.zeros(n)
        for a, b in ((0, 1), (1, 2), (2, 0)):
            np.add.at(acc, tris[:, a], points[tris[:, b]])
            np.add.at(acc, tris[:, b], points[tris[:, a]])
            cnt_idx = np.concatenate([tris[:, a], tris[:, b]])
            np.add.at(cnt, cnt_idx, 1.0)
        has = cnt > 0
        avg = np.where(has[:, None], acc / np.maximum(cnt, 1.0)[:, None], points)
        newy = np.where(axis_slide, 0.0, avg[:, 1])
        points = np.where(movable[:, None], np.stack([avg[:, 0], newy], axis=1),
                          points)
    return points


def _quality_ok(mesh: Mesh, target_h: float) -> bool:
    if mesh.min_angle_deg() < 15.0:
        return False
    if mesh.h_max() > target_h:
        return False
    try:
        mesh.boundary_loop()
    except MeshQualityError:
        return False
    return True


def _build_plain(curve, target_h, h, margin, rng):
    bnd = curve.arclength_sample(h)
    poly = bnd
    bbox = (poly.min(axis=0), poly.max(axis=0))
    lat = _hex_lattice(bbox, h)
    if rng is not None:
        lat = lat + rng.uniform(-0.08 * h, 0.08 * h, size=lat.shape)
    keep = _points_in_polygon(lat, poly)
    lat = lat[keep]
    if len(lat):
        lat = lat[_dist_to_polyline(lat, poly) >= margin * h]
    pts = np.vstack([bnd, lat])
    movable = np.zeros(len(pts), dtype=bool)
    movable[len(bnd):] = True
    axis_slide = np.zeros(len(pts), dtype=bool)
    for _ in range(4):
        tris = _triangulate_inside(pts, poly)
        pts = _smooth(pts, tris, movable, axis_slide)
    tris = _triangulate_inside(pts, poly)
    return Mesh(vertices=pts, triangles=tris)


def _build_mirror(curve, target_h, h, margin):
    """Mesh the upper half against y=0 and reflect; symmetry is exact."""
    full = curve.arclength_sample(h)
    n = len(full)
    upper = full[: n // 2 + 1].copy()
    upper[0, 1] = 0.0
    upper[-1, 1] = 0.0
    upper[1:-1, 1] = np.abs(upper[1:-1, 1])
    x_right, x_left = upper[0, 0], upper[-1, 0]
    # half-domain polygon: arc (right -> left above axis) then axis back
    n_axis = max(2, int(math.ceil((x_right - x_left) / h)))
    axis_closure = np.stack(
        [np.linspace(x_left, x_right, n_axis + 1)[1:-1], np.zeros(n_axis - 1)],
        axis=1)
    poly = np.vstack([upper, axis_closure])
    # interior axis points (slide along y=0 when smoothing)
    axis_pts = axis_closure.copy()
    if len(axis_pts):
        axis_pts = axis_pts[_dist_to_polyline(axis_pts, upper, closed=False) >= margin * h]
    bbox = ((x_left, 0.0), (x_right, upper[:, 1].max()))
    lat = _hex_lattice(bbox, h, rows_from_zero=True)
    keep = _points_in_polygon(lat, poly)
    lat = lat[keep]
    if len(lat):
        lat = lat[_dist_to_polyline(lat, upper, closed=False) >= margin * h]
        lat = lat[lat[:, 1] >= 0.5 * h]
    pts = np.vstack([upper, axis_pts, lat])
    movable = np.zeros(len(pts), dtype=bool)
    movable[len(upper):] = True
    axis_slide = np.zeros(len(pts), dtype=bool)
    axis_slide[len(upper):len(upper) + len(axis_pts)] = True
    for _ in range(4):
        tris = _triangulate_inside(pts, poly)
        pts = _smooth(pts, tris, movable, axis_slide)
    tris = _triangulate_inside(pts, poly)

    # reflect: vertices with y > 0 get mirror copies; y == 0 shared
    on_axis = pts[:, 1] == 0.0
    mirror_index = np.full(len(pts), -1, dtype=np.int64)
    mirror_index[on_axis] = np.nonzero(on_axis)[0]
    extra = np.nonzero(~on_axis)[0]
    mirror_index[extra] = len(pts) + np.arange(len(extra))
    lower = pts[extra] * np.array([1.0, -1.0])
    all_pts = np.vstack([pts, lower])
    mirrored = mirror_index[tris][:, [0, 2, 1]]  # reflection flips orientation
    all_tris = np.vstack([tris, mirrored])
    return Mesh(vertices=all_pts, triangles=all_tris)


def mesh_domain(model, curve, target_h: float, seed: int | None = None,
                mirror_x: str | bool = "auto") -> Mesh:
    """Mesh the region bounded by ``curve`` (chart coordinates) at resolution target_h.

    ``mirror_x='auto'`` uses the exact mirror construction for curves that
    declare x-axis symmetry.  ``seed`` adds a small deterministic jitter to the
    interior lattice (plain construction only).  All vertices must stay inside
    the model chart; that is enforced at assembly time.
    """
    if not target_h > 0.0:
        raise ValueError(f"target_h must be positive, got {target_h!r}")
    use_mirror = curve.symmetric_x if mirror_x == "auto" else bool(mirror_x)
    rng = np.random.default_rng(seed) if seed is not None else None
    last_reason = ""
    for margin in _MARGINS:
        h = 0.8 * target_h  # smoothing stretches boundary-adjacent edges
        for _ in range(4):
            if use_mirror:
                mesh = _build_mirror(curve, target_h, h, margin)
            else:
                mesh = _build_plain(curve, target_h, h, margin, rng)
            if _quality_ok(mesh, target_h):
                if model is not None:
                    rho = np.linalg.norm(mesh.vertices, axis=1)
                    if np.any(rho >= model.chart_bound * (1.0 + 1e-12)):
                        raise GeometryError(
                            f"domain leaves the model chart (max rho {rho.max():.6g} "
                            f">= {model.chart_bound:.6g})")
                return mesh
            last_reason = (f"min angle {mesh.min_angle_deg():.2f} deg, "
                           f"h_max {mesh.h_max():.4g} vs target {target_h:.4g}")
            if mesh.h_max() <= target_h:
                break  # angle problem; shrinking will not help, next margin
            h *= 0.95 * target_h / mesh.h_max()
    raise MeshQualityError(
        f"mesh quality contract not met after retries ({last_reason})")
