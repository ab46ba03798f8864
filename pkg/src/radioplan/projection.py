"""Camera poses, pinhole projection, map overlays, and pose-error metrics.

Orientation is a unit quaternion in scalar-last order [qx, qy, qz, qw]
(Hamilton multiplication convention) encoding the camera-to-world rotation
R_cw; projecting a world point therefore applies the transpose.  A rotation
vector (axis times angle, radians) is accepted as an alternative input form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mapping import RadioMap
from .scene import Point3

__all__ = [
    "CameraPose",
    "Intrinsics",
    "Overlay",
    "OverlayOptions",
    "Projection",
    "quaternion_to_rotation",
    "rotation_vector_to_quaternion",
    "project_point",
    "back_project",
    "project_radio_map",
    "location_error",
    "orientation_angle_error",
    "pose_loss",
    "pose_from_dict",
    "pose_to_dict",
    "intrinsics_from_dict",
    "intrinsics_to_dict",
]


def _unit_quaternion(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ValueError("quaternion must have 4 components [qx, qy, qz, qw]")
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("zero quaternion has no direction")
    return q / n


def quaternion_to_rotation(q) -> np.ndarray:
    """Rotation matrix of a scalar-last unit quaternion (q and -q agree)."""
    x, y, z, w = _unit_quaternion(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_vector_to_quaternion(rvec) -> tuple[float, float, float, float]:
    """Axis-angle vector (radians) to scalar-last quaternion."""
    r = np.asarray(rvec, dtype=float)
    angle = float(np.linalg.norm(r))
    if angle < 1e-12:
        return (0.0, 0.0, 0.0, 1.0)
    axis = r / angle
    s = math.sin(angle / 2.0)
    return (axis[0] * s, axis[1] * s, axis[2] * s, math.cos(angle / 2.0))


@dataclass(frozen=True)
class CameraPose:
    """Camera location (world meters) and camera-to-world orientation."""

    location: Point3
    quaternion: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "location", tuple(float(v) for v in self.location))
        q = _unit_quaternion(self.quaternion)
        object.__setattr__(self, "quaternion", tuple(float(v) for v in q))

    @staticmethod
    def from_rotation_vector(location, rvec) -> "CameraPose":
        return CameraPose(location=tuple(location), quaternion=rotation_vector_to_quaternion(rvec))

    @property
    def rotation_cw(self) -> np.ndarray:
        return quaternion_to_rotation(self.quaternion)


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics, zero skew."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be > 0")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError("principal point outside the image")

    @property
    def k_matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class Projection:
    """Pixel coordinates and camera-frame depth of one projected point."""

    u: float
    v: float
    depth_m: float
    in_frame: bool


def project_point(pose: CameraPose, intr: Intrinsics, p_w) -> Projection | None:
    """Project a world point to the image plane.

    Returns None for points at or behind the camera (depth <= 0); otherwise
    the pixel position, its depth, and whether it landed inside the frame.
    """
    p = np.asarray(p_w, dtype=float)
    d = pose.rotation_cw.T @ (p - np.asarray(pose.location))
    uv = intr.k_matrix @ d
    depth = uv[2]
    if depth <= 0:
        return None
    u = uv[0] / depth
    v = uv[1] / depth
    in_frame = (0 <= u <= intr.width) and (0 <= v <= intr.height)
    return Projection(u=float(u), v=float(v), depth_m=float(depth), in_frame=in_frame)


def back_project(pose: CameraPose, intr: Intrinsics, u: float, v: float, depth_m: float) -> np.ndarray:
    """Inverse of project_point for a known depth."""
    if depth_m <= 0:
        raise ValueError("depth must be > 0")
    p_c = np.array(
        [(u - intr.cx) * depth_m / intr.fx, (v - intr.cy) * depth_m / intr.fy, depth_m]
    )
    return pose.rotation_cw @ p_c + np.asarray(pose.location)


@dataclass(frozen=True)
class OverlayOptions:
    """What part of the map to project.

    z_height_m selects one horizontal voxel layer; None projects every
    voxel (dense, mostly useful on small maps).
    """

    z_height_m: float | None = None


@dataclass(frozen=True)
class Overlay:
    """Sparse projected-map pixels: (u, v, rsrp_dbm, depth_m) per bucket."""

    pixels: tuple[tuple[int, int, float, float], ...]
    frame_size: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "frame_size": list(self.frame_size),
            "pixels": [[u, v, dbm, depth] for u, v, dbm, depth in self.pixels],
        }


def project_radio_map(
    radio_map: RadioMap,
    pose: CameraPose,
    intr: Intrinsics,
    opts: OverlayOptions = OverlayOptions(),
) -> Overlay:
    """Rasterize voxel centers into pixel buckets, nearest depth winning."""
    grid = radio_map.grid
    if opts.z_height_m is None:
        centers = grid.centers()
        values = radio_map.values.ravel()
    else:
        k = grid.layer_for_z(opts.z_height_m)
        xs, ys = grid.axis_centers(0), grid.axis_centers(1)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        z = grid.axis_centers(2)[k]
        centers = np.stack([gx, gy, np.full_like(gx, z)], axis=-1).reshape(-1, 3)
        values = radio_map.values[:, :, k].ravel()

    d = (centers - np.asarray(pose.location)[None, :]) @ pose.rotation_cw
    depth = d[:, 2]
    front = depth > 0
    if not front.any():
        return Overlay(pixels=(), frame_size=(intr.width, intr.height))
    d, depth, values = d[front], depth[front], values[front]
    u = intr.fx * d[:, 0] / depth + intr.cx
    v = intr.fy * d[:, 1] / depth + intr.cy
    ok = (u >= 0) & (u <= intr.width) & (v >= 0) & (v <= intr.height)
    if not ok.any():
        return Overlay(pixels=(), frame_size=(intr.width, intr.height))
    u, v, depth, values = u[ok], v[ok], depth[ok], values[ok]
    px = np.minimum(np.floor(u).astype(int), intr.width - 1)
    py = np.minimum(np.floor(v).astype(int), intr.height - 1)

    # nearest depth wins each pixel bucket
    order = np.lexsort((depth, py, px))
    px, py, depth, values = px[order], py[order], depth[order], values[order]
    bucket = px.astype(np.int64) * (intr.height + 1) + py
    first = np.ones(bucket.size, dtype=bool)
    first[1:] = bucket[1:] != bucket[:-1]
    pixels = tuple(
        (int(a), int(b), float(val), float(dep))
        for a, b, val, dep in zip(px[first], py[first], values[first], depth[first])
    )
    return Overlay(pixels=pixels, frame_size=(intr.width, intr.height))


def location_error(estimated: CameraPose, reference: CameraPose) -> float:
    """Euclidean distance between pose locations, meters."""
    a = np.asarray(estimated.location)
    b = np.asarray(reference.location)
    return float(np.linalg.norm(a - b))


def orientation_angle_error(q_estimated, q_reference) -> float:
    """Rotation angle between two unit quaternions, degrees in [0, 180].

    Uses 2*arccos(|<q1, q2>|), so q and -q compare equal.
    """
    q1 = _unit_quaternion(q_estimated)
    q2 = _unit_quaternion(q_reference)
    dot = min(abs(float(np.dot(q1, q2))), 1.0)
    return math.degrees(2.0 * math.acos(dot))


def pose_loss(
    estimated: CameraPose,
    reference: CameraPose,
    mode: str = "W_Euc_Euc",
    beta: float = 1.0,
) -> float:
    """Weighted pose loss: location distance plus an orientation term.

    mode "W_Euc_Euc" adds beta times the plain quaternion Euclidean
    distance (sign-sensitive by definition); "W_Euc_Ang" adds beta times
    the rotation angle error in radians.
    """
    loc = location_error(estimated, reference)
    if mode == "W_Euc_Euc":
        dq = np.asarray(estimated.quaternion) - np.asarray(reference.quaternion)
        return loc + beta * float(np.linalg.norm(dq))
    if mode == "W_Euc_Ang":
        ang = orientation_angle_error(estimated.quaternion, reference.quaternion)
        return loc + beta * math.radians(ang)
    raise ValueError(f"unknown pose loss mode {mode!r}")


def pose_from_dict(doc: dict) -> CameraPose:
    try:
        return CameraPose(location=doc["location"], quaternion=doc["quaternion"])
    except KeyError as e:
        raise ValueError(f"pose missing field {e}") from e


def pose_to_dict(pose: CameraPose) -> dict:
    return {"location": list(pose.location), "quaternion": list(pose.quaternion)}


def intrinsics_from_dict(doc: dict) -> Intrinsics:
    try:
        return Intrinsics(
            fx=float(doc["fx"]),
            fy=float(doc["fy"]),
            cx=float(doc["cx"]),
            cy=float(doc["cy"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
        )
    except KeyError as e:
        raise ValueError(f"intrinsics missing field {e}") from e


def intrinsics_to_dict(intr: Intrinsics) -> dict:
    return {
        "fx": intr.fx,
        "fy": intr.fy,
        "cx": intr.cx,
        "cy": intr.cy,
        "width": intr.width,
        "height": intr.height,
    }
