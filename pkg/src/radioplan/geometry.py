"""Batched geometry kernels for ray tracing over box-and-plane scenes.

A scene compiles to flat arrays: every reflecting surface becomes a finite
rectangle (plane obstacles, the six faces of each box obstacle, and the six
synthesized boundary walls), while transmission tests run against box slabs
plus the non-box rectangles so that each physical wall crossing is counted
exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .scene import Box, PlaneRect, Scene

# Parametric margin excluding segment endpoints from crossing counts: a
# reflection point sits exactly on its surface and must not register as a
# wall penetration of that same surface.
SEGMENT_INTERIOR_EPS = 1e-7

# Minimum ray-advance distance (meters) so a ray leaving a surface does not
# immediately re-hit it.
RAY_MIN_ADVANCE = 1e-7

_PLANE_DENOM_EPS = 1e-12


@dataclass
class RectSet:
    """Flat arrays describing finite rectangles (one row per rectangle)."""

    origin: np.ndarray      # (R, 3) corner point
    edge_u: np.ndarray      # (R, 3) unit edge direction
    edge_v: np.ndarray      # (R, 3) unit edge direction, orthogonal to edge_u
    len_u: np.ndarray       # (R,)
    len_v: np.ndarray       # (R,)
    normal: np.ndarray      # (R, 3) unit normal (sign not meaningful)
    plane_d: np.ndarray     # (R,) normal . origin
    reflection_loss_db: np.ndarray   # (R,)
    transmission_loss_db: np.ndarray  # (R,)
    ids: tuple[str, ...]    # owning obstacle id per rectangle

    def __len__(self) -> int:
        return self.origin.shape[0]


@dataclass
class BoxSet:
    """Flat arrays describing solid boxes used for penetration counting."""

    lo: np.ndarray  # (B, 3)
    hi: np.ndarray  # (B, 3)
    transmission_loss_db: np.ndarray  # (B,)
    ids: tuple[str, ...]

    def __len__(self) -> int:
        return self.lo.shape[0]


@dataclass
class SceneGeometry:
    """Compiled scene: reflection rectangles + transmission test sets."""

    rects: RectSet        # all reflecting surfaces
    trans_rects: RectSet  # plane obstacles + boundary (box faces excluded)
    boxes: BoxSet         # box obstacles
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray


def _empty_rectset() -> RectSet:
    z3 = np.zeros((0, 3))
    z = np.zeros(0)
    return RectSet(z3, z3, z3, z, z, z3, z, z, z, ())


def _rect_rows(corners: np.ndarray, refl_db: float, trans_db: float, rid: str):
    o = corners[0]
    e1 = corners[1] - corners[0]
    e2 = corners[3] - corners[0]
    lu = float(np.linalg.norm(e1))
    lv = float(np.linalg.norm(e2))
    u = e1 / lu
    v = e2 / lv
    n = np.cross(u, v)
    n = n / np.linalg.norm(n)
    return o, u, v, lu, lv, n, float(n @ o), refl_db, trans_db, rid


def _box_face_corners(lo: np.ndarray, hi: np.ndarray):
    """Yield the 4 corners (in perimeter order) of each of the 6 faces."""
    for axis in range(3):
        a, b = (axis + 1) % 3, (axis + 2) % 3
        for value in (lo[axis], hi[axis]):
            c = np.zeros((4, 3))
            c[:, axis] = value
            c[0, a], c[0, b] = lo[a], lo[b]
            c[1, a], c[1, b] = hi[a], lo[b]
            c[2, a], c[2, b] = hi[a], hi[b]
            c[3, a], c[3, b] = lo[a], hi[b]
            yield c


def _build_rectset(rows: list) -> RectSet:
    if not rows:
        return _empty_rectset()
    return RectSet(
        origin=np.array([r[0] for r in rows], dtype=float),
        edge_u=np.array([r[1] for r in rows], dtype=float),
        edge_v=np.array([r[2] for r in rows], dtype=float),
        len_u=np.array([r[3] for r in rows], dtype=float),
        len_v=np.array([r[4] for r in rows], dtype=float),
        normal=np.array([r[5] for r in rows], dtype=float),
        plane_d=np.array([r[6] for r in rows], dtype=float),
        reflection_loss_db=np.array([r[7] for r in rows], dtype=float),
        transmission_loss_db=np.array([r[8] for r in rows], dtype=float),
        ids=tuple(r[9] for r in rows),
    )


@lru_cache(maxsize=16)
def compile_geometry(scene: Scene) -> SceneGeometry:
    """Flatten a scene into the batched arrays the tracer consumes."""
    all_rows: list = []
    plane_rows: list = []
    box_lo, box_hi, box_loss, box_ids = [], [], [], []

    for ob in scene.obstacles:
        refl = ob.material.reflection_loss_db
        trans = ob.material.transmission_loss_db
        if isinstance(ob.shape, Box):
            lo = np.asarray(ob.shape.lo, dtype=float)
            hi = np.asarray(ob.shape.hi, dtype=float)
            box_lo.append(lo)
            box_hi.append(hi)
            box_loss.append(trans)
            box_ids.append(ob.id)
            for corners in _box_face_corners(lo, hi):
                all_rows.append(_rect_rows(corners, refl, trans, ob.id))
        elif isinstance(ob.shape, PlaneRect):
            corners = np.asarray(ob.shape.corners, dtype=float)
            row = _rect_rows(corners, refl, trans, ob.id)
            all_rows.append(row)
            plane_rows.append(row)

    if scene.boundary_enabled:
        lo = np.asarray(scene.bounds.lo, dtype=float)
        hi = np.asarray(scene.bounds.hi, dtype=float)
        refl = scene.boundary_material.reflection_loss_db
        trans = scene.boundary_material.transmission_loss_db
        for i, corners in enumerate(_box_face_corners(lo, hi)):
            row = _rect_rows(corners, refl, trans, f"boundary-{i}")
            all_rows.append(row)
            plane_rows.append(row)

    boxes = BoxSet(
        lo=np.array(box_lo, dtype=float).reshape(-1, 3),
        hi=np.array(box_hi, dtype=float).reshape(-1, 3),
        transmission_loss_db=np.array(box_loss, dtype=float),
        ids=tuple(box_ids),
    )
    return SceneGeometry(
        rects=_build_rectset(all_rows),
        trans_rects=_build_rectset(plane_rows),
        boxes=boxes,
        bounds_lo=np.asarray(scene.bounds.lo, dtype=float),
        bounds_hi=np.asarray(scene.bounds.hi, dtype=float),
    )


def fibonacci_sphere(count: int) -> np.ndarray:
    """`count` unit vectors spread evenly over the sphere (deterministic)."""
    if count < 1:
        raise ValueError("ray count must be >= 1")
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    phi = i * (np.pi * (3.0 - np.sqrt(5.0)))
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def mirror_point(point: np.ndarray, normal: np.ndarray, plane_d: float) -> np.ndarray:
    """Mirror a point across the plane n.x = d."""
    return point - 2.0 * (point @ normal - plane_d) * normal


def reflect_directions(dirs: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Specular reflection of direction vectors about unit normals."""
    dots = np.sum(dirs * normals, axis=-1, keepdims=True)
    return dirs - 2.0 * dots * normals


def ray_nearest_rect_hit(
    origins: np.ndarray, dirs: np.ndarray, rects: RectSet
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest rectangle hit per ray.

    Returns (t_hit, rect_index); rays that hit nothing get t=inf, index=-1.
    """
    m = origins.shape[0]
    if len(rects) == 0 or m == 0:
        return np.full(m, np.inf), np.full(m, -1, dtype=int)
    n = rects.normal
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = dirs @ n.T                                    # (M, R)
        t = (rects.plane_d[None, :] - origins @ n.T) / denom  # (M, R)
        du = dirs @ rects.edge_u.T
        dv = dirs @ rects.edge_v.T
        ou = origins @ rects.edge_u.T - np.sum(rects.origin * rects.edge_u, axis=1)[None, :]
        ov = origins @ rects.edge_v.T - np.sum(rects.origin * rects.edge_v, axis=1)[None, :]
        s = ou + t * du
        w = ov + t * dv
    valid = (
        (np.abs(denom) > _PLANE_DENOM_EPS)
        & (t > RAY_MIN_ADVANCE)
        & (s >= 0.0) & (s <= rects.len_u[None, :])
        & (w >= 0.0) & (w <= rects.len_v[None, :])
    )
    t = np.where(valid, t, np.inf)
    idx = np.argmin(t, axis=1)
    t_hit = t[np.arange(m), idx]
    idx = np.where(np.isfinite(t_hit), idx, -1)
    return t_hit, idx


def ray_aabb_exit(origins: np.ndarray, dirs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Parametric distance at which each ray leaves the axis-aligned box."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t1 = (lo[None, :] - origins) * inv
        t2 = (hi[None, :] - origins) * inv
    tmax = np.maximum(t1, t2)
    tmax = np.where(np.isnan(tmax), np.inf, tmax)
    return np.min(tmax, axis=1)


def segment_box_crossings(
    seg_a: np.ndarray, seg_b: np.ndarray, boxes: BoxSet
) -> tuple[np.ndarray, np.ndarray]:
    """Count box-face penetrations along segments a->b.

    Entering and leaving a solid box each cross one wall, so each contributes
    one event with that box's transmission loss.  Endpoints are excluded.

    Returns (event_count, loss_db_sum), each shaped like the broadcast of the
    segment batch.
    """
    a = np.atleast_2d(seg_a)
    b = np.atleast_2d(seg_b)
    v = max(a.shape[0], b.shape[0])
    if len(boxes) == 0:
        return np.zeros(v, dtype=int), np.zeros(v)
    d = b - a
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t1 = (boxes.lo[None, :, :] - a[:, None, :]) * inv[:, None, :]
        t2 = (boxes.hi[None, :, :] - a[:, None, :]) * inv[:, None, :]
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    with np.errstate(invalid="ignore"):
        t_enter = np.max(tmin, axis=2)
        t_exit = np.min(tmax, axis=2)
        hit = t_enter <= t_exit
        eps = SEGMENT_INTERIOR_EPS
        enter_ev = hit & (t_enter > eps) & (t_enter < 1.0 - eps)
        exit_ev = hit & (t_exit > eps) & (t_exit < 1.0 - eps)
    events = enter_ev.astype(int) + exit_ev.astype(int)   # (V, B)
    loss = events @ boxes.transmission_loss_db
    return events.sum(axis=1), loss


def segment_rect_crossings(
    seg_a: np.ndarray, seg_b: np.ndarray, rects: RectSet
) -> tuple[np.ndarray, np.ndarray]:
    """Count rectangle penetrations along segments a->b (endpoints excluded).

    Returns (event_count, loss_db_sum).
    """
    a = np.atleast_2d(seg_a)
    b = np.atleast_2d(seg_b)
    v = max(a.shape[0], b.shape[0])
    if len(rects) == 0:
        return np.zeros(v, dtype=int), np.zeros(v)
    n = rects.normal
    d = b - a
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = d @ n.T                                     # (V, R)
        t = (rects.plane_d[None, :] - a @ n.T) / denom
        du = d @ rects.edge_u.T
        dv = d @ rects.edge_v.T
        au = (a @ rects.edge_u.T) - np.sum(rects.origin * rects.edge_u, axis=1)[None, :]
        av = (a @ rects.edge_v.T) - np.sum(rects.origin * rects.edge_v, axis=1)[None, :]
        s = au + t * du
        w = av + t * dv
        eps = SEGMENT_INTERIOR_EPS
        events = (
            (np.abs(denom) > _PLANE_DENOM_EPS)
            & (t > eps) & (t < 1.0 - eps)
            & (s >= 0.0) & (s <= rects.len_u[None, :])
            & (w >= 0.0) & (w <= rects.len_v[None, :])
        )
    loss = events @ rects.transmission_loss_db
    return events.sum(axis=1), loss


def segment_crossing_events(
    seg_a: np.ndarray, seg_b: np.ndarray, geom: SceneGeometry
) -> list[tuple[float, str, float]]:
    """Per-crossing detail for a single segment: (t, obstacle id, loss_db)."""
    a = np.asarray(seg_a, dtype=float)
    b = np.asarray(seg_b, dtype=float)
    d = b - a
    eps = SEGMENT_INTERIOR_EPS
    out: list[tuple[float, str, float]] = []

    boxes = geom.boxes
    if len(boxes) > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / d
            t1 = (boxes.lo - a) * inv
            t2 = (boxes.hi - a) * inv
        tmin = np.minimum(t1, t2)
        tmax = np.maximum(t1, t2)
        with np.errstate(invalid="ignore"):
            t_enter = np.max(tmin, axis=1)
            t_exit = np.min(tmax, axis=1)
            hit = t_enter <= t_exit
        for i in range(len(boxes)):
            if not hit[i]:
                continue
            for tv in (t_enter[i], t_exit[i]):
                if eps < tv < 1.0 - eps:
                    out.append((float(tv), boxes.ids[i], float(boxes.transmission_loss_db[i])))

    rects = geom.trans_rects
    if len(rects) > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = rects.normal @ d
            t = (rects.plane_d - rects.normal @ a) / denom
        for i in range(len(rects)):
            if abs(denom[i]) <= _PLANE_DENOM_EPS or not (eps < t[i] < 1.0 - eps):
                continue
            p = a + t[i] * d
            s = float((p - rects.origin[i]) @ rects.edge_u[i])
            w = float((p - rects.origin[i]) @ rects.edge_v[i])
            if 0.0 <= s <= rects.len_u[i] and 0.0 <= w <= rects.len_v[i]:
                out.append((float(t[i]), rects.ids[i], float(rects.transmission_loss_db[i])))

    out.sort(key=lambda e: e[0])
    return out


def point_to_segment_distance(
    points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray
) -> np.ndarray:
    """Distance from each point to the segment a->b (all broadcastable)."""
    p = np.atleast_2d(points)
    a = np.asarray(seg_a, dtype=float)
    b = np.asarray(seg_b, dtype=float)
    d = b - a
    len2 = np.sum(d * d, axis=-1)
    len2 = np.where(len2 < 1e-30, 1e-30, len2)
    t = np.clip(np.sum((p - a) * d, axis=-1) / len2, 0.0, 1.0)
    closest = a + t[..., None] * d
    return np.linalg.norm(p - closest, axis=-1)


def segments_to_point_distance(
    point: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray
) -> np.ndarray:
    """Distance from one point to each of many segments (M,3)->(M,)."""
    a = np.atleast_2d(seg_a)
    b = np.atleast_2d(seg_b)
    p = np.asarray(point, dtype=float)
    d = b - a
    len2 = np.sum(d * d, axis=1)
    len2 = np.where(len2 < 1e-30, 1e-30, len2)
    t = np.clip(np.sum((p[None, :] - a) * d, axis=1) / len2, 0.0, 1.0)
    closest = a + t[:, None] * d
    return np.linalg.norm(p[None, :] - closest, axis=1)
