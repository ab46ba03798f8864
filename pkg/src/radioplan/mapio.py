"""Map serialization: flat binary container, CSV slices, PNG renderings.

Container format: the voxel array as little-endian 32-bit floats in C order
(k fastest), in a file of its own, next to a JSON sidecar `<file>.json`
carrying grid metadata, the map kind, and (for radio maps) the antenna.
Writes go through a temp file plus rename so readers never see a torn file.

PNG color scale (fixed, used by every renderer here): values are clipped to
[vmin, vmax] = [-120, -30] dBm by default and mapped through the ramp
navy (low) -> azure -> spring green -> yellow -> red (high).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .mapping import GridSpec, MapSlice, RadioMap, WeightMap
from .projection import Overlay
from .scene import Aabb
from .tracing import AntennaConfig

__all__ = [
    "COLOR_VMIN_DBM",
    "COLOR_VMAX_DBM",
    "atomic_write_bytes",
    "save_map",
    "load_map",
    "slice_to_csv",
    "slice_to_png",
    "overlay_to_png",
]

COLOR_VMIN_DBM = -120.0
COLOR_VMAX_DBM = -30.0

_RAMP_STOPS = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
_RAMP_RGB = np.array(
    [[0, 0, 128], [0, 128, 255], [0, 255, 128], [255, 255, 0], [255, 0, 0]],
    dtype=float,
)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write via temp file + rename in the target directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".json")


def save_map(m: RadioMap | WeightMap, path: str | Path) -> None:
    """Write the binary voxel file at `path` and its JSON sidecar."""
    grid = m.grid
    meta = {
        "v": 1,
        "kind": "radio_map" if isinstance(m, RadioMap) else "weight_map",
        "dtype": "<f4",
        "order": "C",
        "dims": list(grid.dims),
        "bounds": {"min": list(grid.bounds.lo), "max": list(grid.bounds.hi)},
        "resolution_m": grid.resolution_m,
    }
    if isinstance(m, RadioMap):
        a = m.antenna
        meta["antenna"] = {
            "position": list(a.position),
            "tx_power_dbm": a.tx_power_dbm,
            "gain_dbi": a.gain_dbi,
            "frequency_hz": a.frequency_hz,
        }
    atomic_write_bytes(path, np.ascontiguousarray(m.values, dtype="<f4").tobytes())
    atomic_write_bytes(
        _sidecar_path(path), (json.dumps(meta, indent=2) + "\n").encode()
    )


def load_map(path: str | Path) -> RadioMap | WeightMap:
    meta = json.loads(_sidecar_path(path).read_text())
    if meta.get("v") != 1:
        raise ValueError(f"unsupported map container version {meta.get('v')!r}")
    if meta.get("dtype") != "<f4" or meta.get("order") != "C":
        raise ValueError("unsupported map encoding (expected <f4, C order)")
    dims = tuple(meta["dims"])
    raw = Path(path).read_bytes()
    expected = int(np.prod(dims)) * 4
    if len(raw) != expected:
        raise ValueError(f"map file is {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(float)
    grid = GridSpec(
        bounds=Aabb(lo=tuple(meta["bounds"]["min"]), hi=tuple(meta["bounds"]["max"])),
        resolution_m=float(meta["resolution_m"]),
    )
    if grid.dims != dims:
        raise ValueError(f"sidecar dims {dims} inconsistent with grid {grid.dims}")
    if meta["kind"] == "weight_map":
        return WeightMap(grid=grid, values=values)
    if meta["kind"] != "radio_map":
        raise ValueError(f"unknown map kind {meta['kind']!r}")
    a = meta["antenna"]
    antenna = AntennaConfig(
        position=tuple(a["position"]),
        tx_power_dbm=float(a["tx_power_dbm"]),
        gain_dbi=float(a["gain_dbi"]),
        frequency_hz=float(a["frequency_hz"]),
    )
    return RadioMap(grid=grid, antenna=antenna, values=values)


def slice_to_csv(sl: MapSlice, dest) -> None:
    """One slice as CSV: header row of y centers, rows labeled by x center.

    `dest` is a path or an open text file.
    """
    if hasattr(dest, "write"):
        _write_slice_csv(sl, dest)
    else:
        with open(dest, "w", newline="") as f:
            _write_slice_csv(sl, f)


def _write_slice_csv(sl: MapSlice, f) -> None:
    w = csv.writer(f)
    w.writerow([f"z={sl.z_center_m}"] + [f"{y:g}" for y in sl.y_centers])
    for i, x in enumerate(sl.x_centers):
        w.writerow([f"{x:g}"] + [repr(float(v)) for v in sl.values[i]])


def _ramp_colors(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """(N,) values -> (N, 3) uint8 via the documented color ramp."""
    t = np.clip((values - vmin) / (vmax - vmin), 0.0, 1.0)
    rgb = np.stack(
        [np.interp(t, _RAMP_STOPS, _RAMP_RGB[:, c]) for c in range(3)], axis=-1
    )
    return np.round(rgb).astype(np.uint8)


def slice_to_png(
    sl: MapSlice,
    path: str | Path,
    vmin: float = COLOR_VMIN_DBM,
    vmax: float = COLOR_VMAX_DBM,
    grayscale: bool = False,
    scale: int = 8,
) -> None:
    """Render a slice: x along image columns, y up (row 0 is max y)."""
    img_vals = sl.values.T[::-1]  # (ny, nx), row 0 = top = max y
    if grayscale:
        t = np.clip((img_vals - vmin) / (vmax - vmin), 0.0, 1.0)
        img = Image.fromarray(np.round(t * 255).astype(np.uint8), mode="L")
    else:
        rgb = _ramp_colors(img_vals.ravel(), vmin, vmax).reshape(*img_vals.shape, 3)
        img = Image.fromarray(rgb, mode="RGB")
    if scale > 1:
        img = img.resize((img.width * scale, img.height * scale), Image.NEAREST)
    img.save(path)


def overlay_to_png(
    overlay: Overlay,
    path: str | Path,
    vmin: float = COLOR_VMIN_DBM,
    vmax: float = COLOR_VMAX_DBM,
    dot_px: int = 3,
) -> None:
    """Overlay pixels on a transparent canvas at full frame size."""
    w, h = overlay.frame_size
    canvas = np.zeros((h, w, 4), dtype=np.uint8)
    if overlay.pixels:
        us = np.array([p[0] for p in overlay.pixels])
        vs = np.array([p[1] for p in overlay.pixels])
        rgb = _ramp_colors(np.array([p[2] for p in overlay.pixels]), vmin, vmax)
        r = dot_px // 2
        for u, v, c in zip(us, vs, rgb):
            canvas[max(v - r, 0) : v + r + 1, max(u - r, 0) : u + r + 1, :3] = c
            canvas[max(v - r, 0) : v + r + 1, max(u - r, 0) : u + r + 1, 3] = 255
    Image.fromarray(canvas, mode="RGBA").save(path)
