"""Walk through a full placement run on the factory scene.

The deployment region is the ceiling strip over the production area. Demand
weights come from the machine controllers and the AGV loop. We run the
multi-start search, then compare the winner against a naive corner mount.
"""

import os

from radioplan import (
    AntennaConfig,
    DeploymentRegion,
    GridSpec,
    PlannerParams,
    TraceParams,
    WeightPolicy,
    build_radio_map,
    build_weight_map,
    coverage_cdf,
    horizontal_slice,
    load_scene,
    plan,
    save_map,
    slice_to_png,
    utility,
)


def median_rsrp(rmap, weights):
    return next(v for v, f in coverage_cdf(rmap, mask=weights) if f >= 0.5)


def main():
    out = "demos/out"
    os.makedirs(out, exist_ok=True)

    scene = load_scene("scenes/factory.json")
    grid = GridSpec(scene.bounds, resolution_m=0.5)
    weights = build_weight_map(scene, grid, WeightPolicy(w_base=0.1, r_m=1.5))
    region = DeploymentRegion.ceiling(3.75, 1.0, 1.0, 14.0, 9.0)
    antenna = AntennaConfig(position=(1.0, 1.0, 3.75))  # template; position is replaced
    trace = TraceParams(ray_count=8000, max_bounces=1)
    params = PlannerParams(n_instances=4, seed=7, step_min_m=0.1)

    def tick(done, total):
        print(f"  instance {done}/{total}")

    result = plan(scene, region, weights, grid, antenna, trace, params, workers=4, progress=tick)

    print("\nper-instance results:")
    for inst in result.instances:
        x, y, z = inst.final_position
        print(
            f"  start {tuple(round(v, 2) for v in inst.init_position)}"
            f" -> ({x:5.2f}, {y:5.2f}, {z:4.2f})"
            f"  utility {inst.final_utility:12.1f}  ({inst.iterations} iters)"
        )
    print(f"\nbest: {tuple(round(v, 2) for v in result.best_position)}")

    # naive alternative: bolt it to the nearest corner
    corner = AntennaConfig(position=(1.0, 1.0, 3.75))
    corner_map = build_radio_map(scene, corner, grid, trace, workers=4)
    print(f"utility, planned  : {result.best_utility:12.1f}")
    print(f"utility, corner   : {utility(corner_map, weights):12.1f}")
    print(f"median RSRP over demand voxels, planned: {median_rsrp(result.radio_map, weights):7.2f} dBm")
    print(f"median RSRP over demand voxels, corner : {median_rsrp(corner_map, weights):7.2f} dBm")

    save_map(result.radio_map, f"{out}/planned.f32")
    slice_to_png(horizontal_slice(result.radio_map, 1.5), f"{out}/planned_z1.5.png")
    print(f"wrote {out}/planned.f32 and {out}/planned_z1.5.png")


if __name__ == "__main__":
    main()
