"""Shared scene builders and planner fixtures.

The planner fixtures are deliberately desk-scale (8 x 6 x 3 m, 0.5 m
voxels, 192 ceiling candidates) so exhaustive grid-search oracles stay
cheap.  Fixture trace settings use one bounce: enough physics to make
placement non-trivial, cheap enough to brute-force.
"""

import numpy as np
import pytest

from radioplan import (
    AntennaConfig,
    GridSpec,
    PlannerParams,
    TraceParams,
    WeightPolicy,
    scene_from_dict,
)


def build_scene(
    bounds=(10.0, 8.0, 4.0),
    obstacles=(),
    machines=(),
    trajectories=(),
    boundary=True,
    boundary_material="concrete",
    name="test-scene",
):
    """Scene from shorthand: machines as (x, y, z, weight), boxes as dicts."""
    doc = {
        "v": 1,
        "name": name,
        "bounds": {"min": [0.0, 0.0, 0.0], "max": list(bounds)},
        "obstacles": list(obstacles),
        "machines": [
            {"id": f"m{i}", "position": [x, y, z], "traffic_weight": w}
            for i, (x, y, z, w) in enumerate(machines)
        ],
        "trajectories": list(trajectories),
        "boundary": {"enabled": boundary, "material": boundary_material},
    }
    return scene_from_dict(doc)


def metal_box(oid, center, size):
    return {
        "id": oid,
        "class": "cabinet",
        "material": "metal",
        "shape": {"type": "box", "center": list(center), "size": list(size)},
    }


def concrete_box(oid, center, size):
    return {
        "id": oid,
        "class": "structure",
        "material": "concrete",
        "shape": {"type": "box", "center": list(center), "size": list(size)},
    }


@pytest.fixture
def scene_builder():
    return build_scene


# --- planner fixtures ------------------------------------------------------

FIXTURE_TRACE = TraceParams(ray_count=1500, max_bounces=1, max_transmissions=2)
FIXTURE_PLANNER = PlannerParams(seed=11)
FIXTURE_ANTENNA = AntennaConfig(position=(0.0, 0.0, 0.0))
CEILING_Z = 3.0


def single_cluster_scene():
    """One machine cluster far from the room center."""
    return build_scene(
        bounds=(8.0, 6.0, 3.0),
        machines=[
            (6.0, 4.5, 1.0, 5.0),
            (6.5, 4.0, 1.0, 5.0),
            (6.2, 4.8, 1.2, 5.0),
        ],
        name="single-cluster",
    )


def twin_cluster_scene():
    """Two equal clusters, mirror-symmetric about x = 4."""
    return build_scene(
        bounds=(8.0, 6.0, 3.0),
        machines=[
            (1.75, 3.0, 1.0, 5.0),
            (2.25, 3.0, 1.0, 5.0),
            (5.75, 3.0, 1.0, 5.0),
            (6.25, 3.0, 1.0, 5.0),
        ],
        name="twin-clusters",
    )


def cluttered_scene():
    """Machines spread around a metal block sitting on the traffic center.

    The mean machine position lands on the block, so the initial antenna
    position is shadowed and the search has to move off it.
    """
    return build_scene(
        bounds=(8.0, 6.0, 3.0),
        obstacles=[
            metal_box("block-mid", (4.0, 3.0, 1.25), (2.0, 2.0, 2.5)),
            concrete_box("pillar", (2.0, 4.5, 1.5), (0.5, 0.5, 3.0)),
        ],
        machines=[
            (6.5, 1.5, 1.0, 6.0),
            (6.5, 3.0, 1.0, 6.0),
            (6.5, 4.5, 1.0, 6.0),
            (1.5, 1.5, 1.0, 2.0),
            (1.5, 4.5, 1.0, 2.0),
        ],
        name="cluttered-room",
    )


def fixture_grid(scene):
    return GridSpec(scene.bounds, 0.5)


def fixture_weight_policy():
    # zero baseline keeps the optimum pinned over the traffic, not the room
    return WeightPolicy(w_base=0.0, r_m=1.0)


def ceiling_region_of(scene):
    from radioplan import DeploymentRegion

    hi = scene.bounds.hi
    return DeploymentRegion.ceiling(CEILING_Z, 0.0, 0.0, hi[0], hi[1])


def exhaustive_ceiling_oracle(scene, weights, grid, trace=FIXTURE_TRACE, utility_scale="dbm"):
    """Evaluate every ceiling voxel-center candidate; ties keep lowest index.

    Returns (best_xy, best_utility, tied_candidates) where tied candidates
    are all positions within 1e-9 of the maximum.
    """
    from radioplan.mapping import build_radio_map, utility

    xs = grid.axis_centers(0)
    ys = grid.axis_centers(1)
    best_u = -np.inf
    best_xy = None
    scored = []
    for x in xs:
        for y in ys:
            rmap = build_radio_map(
                scene, FIXTURE_ANTENNA.moved_to((x, y, CEILING_Z)), grid, trace
            )
            u = utility(rmap, weights, scale=utility_scale)
            scored.append(((float(x), float(y)), u))
            if u > best_u:
                best_u = u
                best_xy = (float(x), float(y))
    tied = [xy for xy, u in scored if u >= best_u - 1e-9]
    return best_xy, best_u, tied
