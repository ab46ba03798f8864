"""Shooting-and-bouncing ray tracer for received-power prediction.

Rays launch from the antenna along a deterministic Fibonacci-sphere fan and
walk the scene, branching into specular reflections and straight-through
wall penetrations.  Each distinct reflection-surface sequence a ray visits
becomes a path candidate; candidate geometry is then recomputed exactly by
mirroring the antenna across the surfaces of the sequence, so reported path
lengths do not depend on launch density.

Propagation model: free-space path loss plus scalar per-interaction dB
losses (no phase), combined by power summation.  This favors reproducible
aggregate coverage prediction over fast-fading fidelity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import SceneGeometry, compile_geometry
from .scene import Point3, Scene

SPEED_OF_LIGHT = 299_792_458.0

DEFAULT_MIN_POWER_DBM = -150.0
DEFAULT_NEAR_FIELD_M = 0.25

_REFINE_T_EPS = 1e-9


@dataclass(frozen=True)
class AntennaConfig:
    """Omnidirectional transmit antenna."""

    position: Point3
    tx_power_dbm: float = 20.0
    gain_dbi: float = 4.7
    frequency_hz: float = 3.75e9

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be > 0")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    def moved_to(self, position) -> "AntennaConfig":
        return AntennaConfig(
            position=tuple(float(v) for v in position),
            tx_power_dbm=self.tx_power_dbm,
            gain_dbi=self.gain_dbi,
            frequency_hz=self.frequency_hz,
        )


@dataclass(frozen=True)
class TraceParams:
    """Ray-launch and path-acceptance parameters."""

    ray_count: int = 20000
    max_bounces: int = 3
    max_transmissions: int = 2
    rx_capture_radius_m: float = 0.25
    min_power_dbm: float = DEFAULT_MIN_POWER_DBM

    def __post_init__(self):
        if self.ray_count < 1:
            raise ValueError("ray_count must be >= 1")
        if self.max_bounces < 0 or self.max_transmissions < 0:
            raise ValueError("bounce/transmission budgets must be >= 0")
        if self.rx_capture_radius_m <= 0:
            raise ValueError("rx_capture_radius_m must be > 0")


@dataclass(frozen=True)
class PropagationPath:
    """One antenna-to-receiver path with its interaction bookkeeping."""

    vertices: tuple[Point3, ...]
    bounce_count: int
    reflection_events: tuple[tuple[str, float], ...]
    transmission_events: tuple[tuple[str, float], ...]
    total_length_m: float


def free_space_path_loss_db(distance_m, frequency_hz) -> np.ndarray | float:
    """FSPL(d) = 20 log10(4 pi d / lambda)."""
    wavelength = SPEED_OF_LIGHT / frequency_hz
    return 20.0 * np.log10(4.0 * np.pi * np.asarray(distance_m, dtype=float) / wavelength)


def path_power_dbm(path: PropagationPath, antenna: AntennaConfig) -> float:
    """Received power of a single path at the antenna's carrier."""
    if path.total_length_m <= 0:
        raise ValueError("degenerate path: total length must be > 0")
    loss = float(free_space_path_loss_db(path.total_length_m, antenna.frequency_hz))
    loss += sum(db for _, db in path.reflection_events)
    loss += sum(db for _, db in path.transmission_events)
    return antenna.tx_power_dbm + antenna.gain_dbi - loss


def received_power_dbm(
    paths: list[PropagationPath],
    antenna: AntennaConfig,
    min_power_dbm: float = DEFAULT_MIN_POWER_DBM,
) -> float:
    """Power-sum combination of path contributions, floored for empty sets."""
    if not paths:
        return min_power_dbm
    linear = sum(10.0 ** (path_power_dbm(p, antenna) / 10.0) for p in paths)
    return max(10.0 * math.log10(linear), min_power_dbm)


# ---------------------------------------------------------------------------
# Sequence discovery (the shooting-and-bouncing walk)
# ---------------------------------------------------------------------------


class _SequenceTrie:
    """Maps (parent node, surface) pairs to node ids; node 0 is the root."""

    def __init__(self):
        self.parent = [-1]
        self.surface = [-1]
        self._lookup: dict[tuple[int, int], int] = {}

    def child(self, parent_id: int, surface_idx: int) -> int:
        key = (parent_id, surface_idx)
        node = self._lookup.get(key)
        if node is None:
            node = len(self.parent)
            self.parent.append(parent_id)
            self.surface.append(surface_idx)
            self._lookup[key] = node
        return node

    def sequence(self, node_id: int) -> tuple[int, ...]:
        out = []
        while node_id > 0:
            out.append(self.surface[node_id])
            node_id = self.parent[node_id]
        return tuple(reversed(out))

    def all_sequences(self) -> list[tuple[int, ...]]:
        return [self.sequence(i) for i in range(len(self.parent))]


def _discover_sequences(
    geom: SceneGeometry,
    antenna_pos: np.ndarray,
    params: TraceParams,
    capture_point: np.ndarray | None = None,
) -> tuple[list[tuple[int, ...]], set[tuple[int, ...]]]:
    """Walk the launch fan through the scene.

    Returns (all reflection sequences visited by any ray, sequences whose
    carrying segment passed within the capture radius of capture_point).
    The direct sequence () is always present.
    """
    trie = _SequenceTrie()
    captured_nodes: set[int] = {0}
    rects = geom.rects

    if len(rects) > 0:
        dirs = geometry.fibonacci_sphere(params.ray_count)
        origins = np.tile(antenna_pos, (dirs.shape[0], 1))
        bounces = np.zeros(dirs.shape[0], dtype=int)
        trans = np.zeros(dirs.shape[0], dtype=int)
        nodes = np.zeros(dirs.shape[0], dtype=int)
        max_depth = params.max_bounces + params.max_transmissions
        diag = float(np.linalg.norm(geom.bounds_hi - geom.bounds_lo))

        for _ in range(max_depth + 1):
            if origins.shape[0] == 0:
                break
            t_hit, hit_idx = geometry.ray_nearest_rect_hit(origins, dirs, rects)
            t_exit = geometry.ray_aabb_exit(origins, dirs, geom.bounds_lo, geom.bounds_hi)
            t_seg = np.minimum(np.minimum(t_hit, t_exit), 2.0 * diag)
            t_seg = np.maximum(t_seg, 0.0)

            if capture_point is not None:
                seg_ends = origins + t_seg[:, None] * dirs
                dist = geometry.segments_to_point_distance(capture_point, origins, seg_ends)
                for node in np.unique(nodes[dist <= params.rx_capture_radius_m]):
                    captured_nodes.add(int(node))

            has_hit = hit_idx >= 0
            if not has_hit.any():
                break
            t_safe = np.where(np.isfinite(t_hit), t_hit, 0.0)
            hit_pts = origins + t_safe[:, None] * dirs

            # reflection children open new sequences
            r_mask = has_hit & (bounces < params.max_bounces)
            r_children = None
            if r_mask.any():
                pairs = np.stack([nodes[r_mask], hit_idx[r_mask]], axis=1)
                uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
                child_of_pair = np.array(
                    [trie.child(int(p), int(s)) for p, s in uniq], dtype=int
                )
                r_children = (
                    hit_pts[r_mask],
                    geometry.reflect_directions(dirs[r_mask], rects.normal[hit_idx[r_mask]]),
                    bounces[r_mask] + 1,
                    trans[r_mask],
                    child_of_pair[inverse],
                )

            # transmission children keep the sequence and direction
            t_mask = has_hit & (trans < params.max_transmissions)
            t_children = None
            if t_mask.any():
                t_children = (
                    hit_pts[t_mask] + geometry.RAY_MIN_ADVANCE * dirs[t_mask],
                    dirs[t_mask],
                    bounces[t_mask],
                    trans[t_mask] + 1,
                    nodes[t_mask],
                )

            parts = [c for c in (r_children, t_children) if c is not None]
            if not parts:
                break
            origins = np.concatenate([p[0] for p in parts])
            dirs = np.concatenate([p[1] for p in parts])
            bounces = np.concatenate([p[2] for p in parts])
            trans = np.concatenate([p[3] for p in parts])
            nodes = np.concatenate([p[4] for p in parts])

    sequences = sorted(set(trie.all_sequences()), key=lambda s: (len(s), s))
    captured = {trie.sequence(n) for n in captured_nodes}
    return sequences, captured


# ---------------------------------------------------------------------------
# Exact per-sequence evaluation (image mirroring)
# ---------------------------------------------------------------------------


def _evaluate_sequence(
    seq: tuple[int, ...],
    geom: SceneGeometry,
    antenna_pos: np.ndarray,
    points: np.ndarray,
    max_transmissions: int,
):
    """Exact geometry of the paths with reflection sequence `seq`.

    Returns (valid mask (V,), total length (V,), interaction loss dB (V,),
    reflection points list of (V, 3) arrays ordered along the path).
    """
    rects = geom.rects
    images = [antenna_pos]
    refl_loss = 0.0
    for s in seq:
        images.append(
            geometry.mirror_point(images[-1], rects.normal[s], float(rects.plane_d[s]))
        )
        refl_loss += float(rects.reflection_loss_db[s])

    v = points.shape[0]
    valid = np.ones(v, dtype=bool)
    total_len = np.linalg.norm(points - images[-1][None, :], axis=1)

    end = points
    reflection_points: list[np.ndarray] = []
    for i in range(len(seq), 0, -1):
        s = seq[i - 1]
        img = images[i]
        n = rects.normal[s]
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = (end - img[None, :]) @ n
            t = (float(rects.plane_d[s]) - img @ n) / denom
        ok = (np.abs(denom) > 1e-12) & (t > _REFINE_T_EPS) & (t < 1.0 - _REFINE_T_EPS)
        t = np.where(ok, t, 0.5)
        pts = img[None, :] + t[:, None] * (end - img[None, :])
        local_u = (pts - rects.origin[s][None, :]) @ rects.edge_u[s]
        local_v = (pts - rects.origin[s][None, :]) @ rects.edge_v[s]
        ok &= (local_u >= 0.0) & (local_u <= float(rects.len_u[s]))
        ok &= (local_v >= 0.0) & (local_v <= float(rects.len_v[s]))
        valid &= ok
        reflection_points.insert(0, pts)
        end = pts

    if not valid.any():
        return valid, total_len, np.zeros(v), reflection_points

    loss = np.full(v, refl_loss)
    count = np.zeros(v, dtype=int)
    starts = [np.broadcast_to(antenna_pos, points.shape)] + reflection_points
    ends = reflection_points + [points]
    for seg_a, seg_b in zip(starts, ends):
        c1, l1 = geometry.segment_box_crossings(seg_a, seg_b, geom.boxes)
        c2, l2 = geometry.segment_rect_crossings(seg_a, seg_b, geom.trans_rects)
        count += c1 + c2
        loss += l1 + l2
    valid &= count <= max_transmissions
    return valid, total_len, loss, reflection_points


def _refine_path(
    seq: tuple[int, ...],
    geom: SceneGeometry,
    antenna_pos: np.ndarray,
    rx: np.ndarray,
    params: TraceParams,
) -> PropagationPath | None:
    """Exact single-receiver path for one sequence, or None if infeasible."""
    pts = rx[None, :]
    valid, total_len, _, reflection_points = _evaluate_sequence(
        seq, geom, antenna_pos, pts, params.max_transmissions
    )
    if not bool(valid[0]):
        return None
    vertices = [antenna_pos] + [p[0] for p in reflection_points] + [rx]
    events: list[tuple[str, float]] = []
    for seg_a, seg_b in zip(vertices[:-1], vertices[1:]):
        events.extend(
            (oid, db) for _, oid, db in geometry.segment_crossing_events(seg_a, seg_b, geom)
        )
    rects = geom.rects
    return PropagationPath(
        vertices=tuple(tuple(float(x) for x in v) for v in vertices),
        bounce_count=len(seq),
        reflection_events=tuple(
            (rects.ids[s], float(rects.reflection_loss_db[s])) for s in seq
        ),
        transmission_events=tuple(events),
        total_length_m=float(total_len[0]),
    )


def trace_paths(
    scene: Scene, antenna: AntennaConfig, rx, params: TraceParams
) -> list[PropagationPath]:
    """All propagation paths from the antenna that reach the receive point.

    Paths are discovered by the launch fan (a candidate needs one ray of its
    reflection sequence to pass within the capture radius of rx), then
    recomputed exactly; the direct path is always checked.  Duplicates by
    (reflection sequence, transmission sequence) are merged.  Results are
    sorted by length, shortest first.
    """
    rx_arr = np.asarray(rx, dtype=float)
    if not scene.bounds.contains(rx_arr):
        raise ValueError(f"receive point {tuple(rx_arr)} outside scene bounds")
    a = np.asarray(antenna.position, dtype=float)
    if not scene.bounds.contains(a):
        raise ValueError(f"antenna position {antenna.position} outside scene bounds")
    geom = compile_geometry(scene)
    _, captured = _discover_sequences(geom, a, params, capture_point=rx_arr)
    paths = []
    for seq in sorted(captured, key=lambda s: (len(s), s)):
        path = _refine_path(seq, geom, a, rx_arr, params)
        if path is not None:
            paths.append(path)
    paths.sort(key=lambda p: (p.total_length_m, p.bounce_count))
    return paths


def received_power_at_points(
    scene: Scene,
    antenna: AntennaConfig,
    points: np.ndarray,
    params: TraceParams,
    near_field_m: float = DEFAULT_NEAR_FIELD_M,
    workers: int = 1,
) -> np.ndarray:
    """Received power in dBm at many points (the radio-map kernel).

    Sequences are discovered once per antenna position, then every point is
    evaluated against every sequence exactly, so a point's value does not
    depend on grid resolution or on `workers`.  Points closer to the antenna
    than `near_field_m` are clamped to the free-space power at that radius.
    """
    geom = compile_geometry(scene)
    a = np.asarray(antenna.position, dtype=float)
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    sequences, _ = _discover_sequences(geom, a, params)

    def eval_chunk(chunk: np.ndarray) -> np.ndarray:
        linear = np.zeros(chunk.shape[0])
        for seq in sequences:
            valid, length, loss, _ = _evaluate_sequence(
                seq, geom, a, chunk, params.max_transmissions
            )
            if not valid.any():
                continue
            length = np.maximum(length, 1e-9)
            p_dbm = (
                antenna.tx_power_dbm
                + antenna.gain_dbi
                - free_space_path_loss_db(length, antenna.frequency_hz)
                - loss
            )
            linear[valid] += 10.0 ** (p_dbm[valid] / 10.0)
        with np.errstate(divide="ignore"):
            dbm = 10.0 * np.log10(linear)
        dbm = np.maximum(dbm, params.min_power_dbm)
        near = np.linalg.norm(chunk - a[None, :], axis=1) < near_field_m
        if near.any():
            dbm[near] = (
                antenna.tx_power_dbm
                + antenna.gain_dbi
                - float(free_space_path_loss_db(near_field_m, antenna.frequency_hz))
            )
        return dbm

    if workers <= 1 or points.shape[0] < 2:
        return eval_chunk(points)
    chunks = np.array_split(points, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(eval_chunk, chunks))
    return np.concatenate(results)
