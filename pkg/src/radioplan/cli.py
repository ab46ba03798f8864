"""Command-line front end.

Thin composition over the library: validate scenes, trace paths, build and
export maps, run placement plans, and launch the HTTP service.  Every
failure prints one machine-parsable line `error: <code>: <message>` to
stderr; exit codes are 0 success, 1 runtime failure, 2 usage, 3 scene
validation.  Identical inputs and seed give byte-identical outputs.

Region syntax: `full`, `box:x0,y0,z0:x1,y1,z1`, or `ceiling:z=H:x0,y0,x1,y1`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import mapio
from .mapping import (
    GridSpec,
    WeightPolicy,
    build_radio_map,
    build_weight_map,
    coverage_cdf,
    horizontal_slice,
)
from .planning import DeploymentRegion, PlannerParams, plan, region_to_dict
from .projection import OverlayOptions, intrinsics_from_dict, pose_from_dict, project_radio_map
from .scene import SceneParseError, SceneValidationError, load_scene
from .tracing import AntennaConfig, TraceParams, path_power_dbm, received_power_dbm, trace_paths

__all__ = ["main", "parse_region"]

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: usage: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _parse_xyz(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected x,y,z — got {text!r}")
    return tuple(float(p) for p in parts)


def parse_region(text: str) -> DeploymentRegion:
    """Parse the CLI region mini-grammar."""
    if text == "full":
        return DeploymentRegion.full()
    head, _, rest = text.partition(":")
    if head == "box":
        lo_s, _, hi_s = rest.partition(":")
        if not hi_s:
            raise ValueError("box region needs two corners: box:x0,y0,z0:x1,y1,z1")
        return DeploymentRegion.box(_parse_xyz(lo_s), _parse_xyz(hi_s))
    if head == "ceiling":
        z_s, _, rect_s = rest.partition(":")
        if not z_s.startswith("z=") or not rect_s:
            raise ValueError("ceiling region syntax: ceiling:z=H:x0,y0,x1,y1")
        vals = rect_s.split(",")
        if len(vals) != 4:
            raise ValueError("ceiling rectangle needs x0,y0,x1,y1")
        x0, y0, x1, y1 = (float(v) for v in vals)
        return DeploymentRegion.ceiling(float(z_s[2:]), x0, y0, x1, y1)
    raise ValueError(f"unknown region {text!r} (use full, box:..., or ceiling:...)")


def _add_antenna_flags(p: argparse.ArgumentParser, with_position: bool = True):
    if with_position:
        p.add_argument("--antenna", required=True, metavar="X,Y,Z", help="antenna position, meters")
    p.add_argument("--tx-power", type=float, default=20.0, help="transmit power, dBm")
    p.add_argument("--gain", type=float, default=4.7, help="antenna gain, dBi")
    p.add_argument("--frequency", type=float, default=3.75e9, help="carrier frequency, Hz")


def _add_trace_flags(p: argparse.ArgumentParser):
    p.add_argument("--rays", type=int, default=20000, help="launch directions")
    p.add_argument("--max-bounces", type=int, default=3)
    p.add_argument("--max-transmissions", type=int, default=2)
    p.add_argument("--capture-radius", type=float, default=0.25, metavar="M")
    p.add_argument("--min-power", type=float, default=-150.0, metavar="DBM")


def _antenna_from(args, position) -> AntennaConfig:
    return AntennaConfig(
        position=position,
        tx_power_dbm=args.tx_power,
        gain_dbi=args.gain,
        frequency_hz=args.frequency,
    )


def _trace_params(args) -> TraceParams:
    return TraceParams(
        ray_count=args.rays,
        max_bounces=args.max_bounces,
        max_transmissions=args.max_transmissions,
        rx_capture_radius_m=args.capture_radius,
        min_power_dbm=args.min_power,
    )


def _write_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        mapio.atomic_write_bytes(out, text.encode())


def cmd_validate(args) -> int:
    scene = load_scene(args.scene)
    print(
        f"ok: {scene.name or Path(args.scene).stem}: "
        f"{len(scene.obstacles)} obstacles, {len(scene.machines)} machines, "
        f"{len(scene.trajectories)} trajectories"
    )
    return 0


def cmd_trace(args) -> int:
    scene = load_scene(args.scene)
    antenna = _antenna_from(args, _parse_xyz(args.antenna))
    params = _trace_params(args)
    paths = trace_paths(scene, antenna, _parse_xyz(args.rx), params)
    doc = {
        "v": 1,
        "received_power_dbm": received_power_dbm(paths, antenna, params.min_power_dbm),
        "paths": [
            {
                "vertices": [list(v) for v in p.vertices],
                "bounce_count": p.bounce_count,
                "reflection_events": [list(e) for e in p.reflection_events],
                "transmission_events": [list(e) for e in p.transmission_events],
                "total_length_m": p.total_length_m,
                "power_dbm": path_power_dbm(p, antenna),
            }
            for p in paths
        ],
    }
    _write_json(doc, args.out)
    return 0


def cmd_map(args) -> int:
    scene = load_scene(args.scene)
    antenna = _antenna_from(args, _parse_xyz(args.antenna))
    grid = GridSpec(scene.bounds, args.resolution)
    rmap = build_radio_map(scene, antenna, grid, _trace_params(args), workers=args.threads)
    mapio.save_map(rmap, args.out)
    print(f"wrote {args.out} ({rmap.values.size} voxels, dims {rmap.grid.dims})")
    return 0


def cmd_plan(args) -> int:
    scene = load_scene(args.scene)
    region = parse_region(args.region)
    grid = GridSpec(scene.bounds, args.resolution)
    weights = build_weight_map(scene, grid, WeightPolicy(w_base=args.w_base, r_m=args.r_m))
    antenna = _antenna_from(args, (0.0, 0.0, 0.0))
    params = PlannerParams(
        n_instances=args.instances,
        init_spread_m=args.init_spread,
        step_init_m=args.step_init,
        step_min_m=args.step_min,
        max_iters=args.max_iters,
        seed=args.seed,
    )
    result = plan(
        scene,
        region,
        weights,
        grid,
        antenna,
        _trace_params(args),
        params,
        workers=args.threads,
        utility_scale=args.utility_scale,
    )
    doc = result.to_dict()
    doc["region"] = region_to_dict(region)
    if args.map_out:
        mapio.save_map(result.radio_map, args.map_out)
        doc["map_file"] = args.map_out
    _write_json(doc, args.out)
    if args.out not in (None, "-"):
        pos = ", ".join(f"{v:.3f}" for v in result.best_position)
        print(f"best position ({pos}) utility {result.best_utility:.3f} -> {args.out}")
    return 0


def cmd_slice(args) -> int:
    rmap = mapio.load_map(args.map)
    sl = horizontal_slice(rmap, args.z)
    if args.png:
        mapio.slice_to_png(sl, args.png, grayscale=args.grayscale)
    if args.csv or not args.png:
        out = args.csv or "-"
        if out == "-":
            mapio.slice_to_csv(sl, sys.stdout)
        else:
            mapio.slice_to_csv(sl, out)
    return 0


def cmd_cdf(args) -> int:
    rmap = mapio.load_map(args.map)
    _write_json({"v": 1, "points": [[v, f] for v, f in coverage_cdf(rmap)]}, args.out)
    return 0


def cmd_overlay(args) -> int:
    rmap = mapio.load_map(args.map)
    pose = pose_from_dict(json.loads(Path(args.pose).read_text()))
    intr = intrinsics_from_dict(json.loads(Path(args.intrinsics).read_text()))
    overlay = project_radio_map(rmap, pose, intr, OverlayOptions(z_height_m=args.z))
    if args.png:
        mapio.overlay_to_png(overlay, args.png)
    _write_json(overlay.to_dict(), args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        data_dir=Path(args.data_dir),
        token=args.token,
        queue_depth=args.queue_depth,
        map_workers=args.threads,
        static_dir=Path(args.static) if args.static else None,
    )
    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="radioplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scene file")
    p.add_argument("scene")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("trace", help="paths from antenna to one receive point")
    p.add_argument("--scene", required=True)
    p.add_argument("--rx", required=True, metavar="X,Y,Z")
    _add_antenna_flags(p)
    _add_trace_flags(p)
    p.add_argument("--out", default=None, help="output JSON (default stdout)")
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("map", help="build a received-power voxel map")
    p.add_argument("--scene", required=True)
    _add_antenna_flags(p)
    _add_trace_flags(p)
    p.add_argument("--resolution", type=float, default=0.5, metavar="M")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="binary map file (sidecar written next to it)")
    p.set_defaults(fn=cmd_map)

    p = sub.add_parser("plan", help="search the best antenna position in a region")
    p.add_argument("--scene", required=True)
    p.add_argument("--region", required=True, help="full | box:...:... | ceiling:z=H:x0,y0,x1,y1")
    _add_antenna_flags(p, with_position=False)
    _add_trace_flags(p)
    p.add_argument("--resolution", type=float, default=0.5, metavar="M")
    p.add_argument("--w-base", type=float, default=1.0)
    p.add_argument("--r-m", type=float, default=1.0, help="traffic weight radius, meters")
    p.add_argument("--instances", type=int, default=8)
    p.add_argument("--init-spread", type=float, default=2.0)
    p.add_argument("--step-init", type=float, default=2.0)
    p.add_argument("--step-min", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--utility-scale", choices=("dbm", "linear"), default="dbm")
    p.add_argument("--out", default=None, help="plan result JSON (default stdout)")
    p.add_argument("--map-out", default=None, help="also save the best radio map here")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("slice", help="export one horizontal layer of a stored map")
    p.add_argument("--map", required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--csv", default=None, help="CSV path (default stdout if no --png)")
    p.add_argument("--png", default=None)
    p.add_argument("--grayscale", action="store_true")
    p.set_defaults(fn=cmd_slice)

    p = sub.add_parser("cdf", help="coverage CDF of a stored map")
    p.add_argument("--map", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_cdf)

    p = sub.add_parser("overlay", help="project a stored map through a camera pose")
    p.add_argument("--map", required=True)
    p.add_argument("--pose", required=True, help="JSON file: location + quaternion")
    p.add_argument("--intrinsics", required=True, help="JSON file: fx,fy,cx,cy,width,height")
    p.add_argument("--z", type=float, default=None, help="slice height (default: all voxels)")
    p.add_argument("--out", default=None)
    p.add_argument("--png", default=None)
    p.set_defaults(fn=cmd_overlay)

    p = sub.add_parser("serve", help="run the HTTP planning service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="./radioplan-data")
    p.add_argument("--token", default=None)
    p.add_argument("--queue-depth", type=int, default=8)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--static", default=None, help="built web UI directory, served at /ui")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SceneParseError, SceneValidationError) as e:
        print(f"error: validation: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as e:
        print(f"error: runtime: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except BrokenPipeError:
        # downstream consumer (head, less, ...) closed stdout; leave quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_RUNTIME
    except (ValueError, OSError) as e:
        print(f"error: runtime: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
