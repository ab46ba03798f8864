"""Planner behaviour: regions, search mechanics, and end-to-end optima.

The end-to-end checks compare against ``exhaustive_ceiling_oracle`` from
conftest, which scores every ceiling voxel center by brute force.
"""
import math

import numpy as np
import pytest

from radioplan import (
    AntennaConfig,
    DeploymentRegion,
    GridSpec,
    PlannerParams,
    TraceParams,
    WeightMap,
    WeightPolicy,
    build_radio_map,
    build_weight_map,
    plan,
    utility,
)
from radioplan.planning import (
    local_search,
    region_from_dict,
    region_to_dict,
    sample_initial_positions,
)
from radioplan.scene import Aabb

from conftest import (
    CEILING_Z,
    FIXTURE_PLANNER,
    FIXTURE_TRACE,
    build_scene,
    ceiling_region_of,
    exhaustive_ceiling_oracle,
    fixture_grid,
    fixture_weight_policy,
    single_cluster_scene,
    twin_cluster_scene,
)


class TestDeploymentRegion:
    def test_ceiling_is_degenerate_in_z(self):
        r = DeploymentRegion.ceiling(3.0, 1.0, 2.0, 5.0, 6.0)
        assert r.lo == (1.0, 2.0, 3.0)
        assert r.hi == (5.0, 6.0, 3.0)

    def test_corner_order_normalized(self):
        r = DeploymentRegion.box((4, 5, 2), (1, 2, 0))
        assert r.lo == (1.0, 2.0, 0.0)
        assert r.hi == (4.0, 5.0, 2.0)

    def test_full_needs_bounds(self):
        r = DeploymentRegion.full()
        with pytest.raises(ValueError):
            r.resolve(None)
        lo, hi = r.resolve(Aabb((0, 0, 0), (8, 6, 3)))
        assert tuple(lo) == (0, 0, 0)
        assert tuple(hi) == (8, 6, 3)

    def test_resolve_intersects_with_bounds(self):
        r = DeploymentRegion.box((-5, -5, -5), (4, 4, 4))
        lo, hi = r.resolve(Aabb((0, 0, 0), (8, 6, 3)))
        assert tuple(lo) == (0, 0, 0)
        assert tuple(hi) == (4, 4, 3)

    def test_disjoint_region_rejected(self):
        r = DeploymentRegion.box((20, 20, 20), (30, 30, 30))
        with pytest.raises(ValueError, match="intersect"):
            r.resolve(Aabb((0, 0, 0), (8, 6, 3)))

    def test_project_clamps(self):
        r = DeploymentRegion.ceiling(3.0, 0.0, 0.0, 8.0, 6.0)
        assert tuple(r.project((4.0, 2.0, 1.0))) == (4.0, 2.0, 3.0)
        assert tuple(r.project((-1.0, 9.0, 3.0))) == (0.0, 6.0, 3.0)
        assert r.contains((4.0, 2.0, 3.0))
        assert not r.contains((4.0, 2.0, 2.9))

    def test_dict_round_trip(self):
        for r in (
            DeploymentRegion.full(),
            DeploymentRegion.box((0, 0, 0), (2, 2, 2)),
            DeploymentRegion.ceiling(2.5, 0.5, 0.5, 7.5, 5.5),
        ):
            assert region_from_dict(region_to_dict(r)) == r
        with pytest.raises(ValueError):
            region_from_dict({"kind": "sphere"})


class TestInitialPositions:
    def test_first_is_projected_center(self):
        region = DeploymentRegion.ceiling(3.0, 0, 0, 8, 6)
        pts = sample_initial_positions((4.0, 3.0, 1.0), region, PlannerParams(n_instances=4, seed=1))
        assert tuple(pts[0]) == (4.0, 3.0, 3.0)
        assert len(pts) == 4

    def test_all_inside_region_and_deterministic(self):
        region = DeploymentRegion.ceiling(3.0, 0, 0, 8, 6)
        params = PlannerParams(n_instances=16, seed=7, init_spread_m=3.0)
        a = sample_initial_positions((4.0, 3.0, 1.0), region, params)
        b = sample_initial_positions((4.0, 3.0, 1.0), region, params)
        assert np.array_equal(a, b)
        for p in a:
            assert region.contains(p)

    def test_seed_changes_scatter(self):
        region = DeploymentRegion.full()
        bounds = Aabb((0, 0, 0), (8, 6, 3))
        a = sample_initial_positions((4, 3, 1.5), region, PlannerParams(seed=1), bounds)
        b = sample_initial_positions((4, 3, 1.5), region, PlannerParams(seed=2), bounds)
        assert not np.array_equal(a[1:], b[1:])


class QuadraticBowl:
    """Concave scoring surface with a known maximizer, for search tests."""

    def __init__(self, target):
        self.target = np.asarray(target, dtype=float)
        self.calls = 0

    def __call__(self, pos):
        self.calls += 1
        return -float(np.sum((np.asarray(pos) - self.target) ** 2))


class TestLocalSearch:
    def test_converges_to_bowl_minimum_on_plane(self):
        region = DeploymentRegion.ceiling(3.0, 0, 0, 8, 6)
        bowl = QuadraticBowl((5.0, 2.0, 3.0))
        params = PlannerParams(step_init_m=2.0, step_min_m=0.01, max_iters=200)
        inst = local_search((1.0, 1.0, 3.0), region, bowl, params)
        assert np.linalg.norm(np.array(inst.final_position) - bowl.target) < 0.02
        assert inst.final_utility > -1e-3
        assert inst.iterations <= 200

    def test_trace_is_strictly_monotone(self):
        region = DeploymentRegion.ceiling(3.0, 0, 0, 8, 6)
        bowl = QuadraticBowl((6.0, 1.0, 3.0))
        trace = local_search((2.0, 5.0, 3.0), region, bowl, PlannerParams()).utility_trace
        assert len(trace) >= 2
        assert all(a < b for a, b in zip(trace, trace[1:]))

    def test_start_at_optimum_is_fixed_point(self):
        region = DeploymentRegion.ceiling(3.0, 0, 0, 8, 6)
        bowl = QuadraticBowl((4.0, 3.0, 3.0))
        inst = local_search((4.0, 3.0, 3.0), region, bowl, PlannerParams())
        assert tuple(inst.final_position) == (4.0, 3.0, 3.0)
        assert len(inst.utility_trace) == 1

    def test_degenerate_axis_never_probed(self):
        region = DeploymentRegion.ceiling(3.0, 0, 0, 8, 6)
        seen = []

        def score(pos):
            seen.append(tuple(pos))
            return 0.0

        local_search((4.0, 3.0, 3.0), region, score, PlannerParams(max_iters=3))
        assert all(p[2] == 3.0 for p in seen)

    def test_iteration_budget_respected(self):
        region = DeploymentRegion.box((0, 0, 0), (8, 6, 3))
        bowl = QuadraticBowl((7.9, 5.9, 2.9))
        inst = local_search((0.1, 0.1, 0.1), region, bowl, PlannerParams(max_iters=4))
        assert inst.iterations <= 4

    def test_free_z_axis_descends_in_box_region(self):
        region = DeploymentRegion.box((0, 0, 0), (8, 6, 3))
        bowl = QuadraticBowl((4.0, 3.0, 0.5))
        inst = local_search(
            (4.0, 3.0, 2.5), region, bowl, PlannerParams(step_min_m=0.01, max_iters=200)
        )
        assert abs(inst.final_position[2] - 0.5) < 0.02


class TestPlanEndToEnd:
    def _run(self, scene, n_instances=4):
        grid = fixture_grid(scene)
        weights = build_weight_map(scene, grid, fixture_weight_policy())
        region = ceiling_region_of(scene)
        params = PlannerParams(
            n_instances=n_instances,
            seed=FIXTURE_PLANNER.seed,
            step_min_m=0.05,
            init_spread_m=2.0,
        )
        result = plan(
            scene,
            region,
            weights,
            grid,
            antenna_template=AntennaConfig(position=(0, 0, 0)),
            trace=FIXTURE_TRACE,
            params=params,
        )
        return result, grid, weights, region

    def test_matches_exhaustive_oracle_single_cluster(self):
        scene = single_cluster_scene()
        result, grid, weights, _ = self._run(scene)
        best_xy, best_u, tied = exhaustive_ceiling_oracle(scene, weights, grid)
        near_some_optimum = any(
            abs(result.best_position[0] - x) <= 0.5 and abs(result.best_position[1] - y) <= 0.5
            for x, y in tied
        )
        assert near_some_optimum, (result.best_position, tied[:4])
        assert result.best_utility >= best_u - 0.5
        assert result.best_position[2] == CEILING_Z

    def test_twin_cluster_lands_on_a_symmetric_optimum(self):
        scene = twin_cluster_scene()
        result, grid, weights, _ = self._run(scene, n_instances=6)
        _, best_u, tied = exhaustive_ceiling_oracle(scene, weights, grid)
        assert len(tied) >= 2  # symmetry produces at least a mirrored pair
        near_some_optimum = any(
            abs(result.best_position[0] - x) <= 0.5 and abs(result.best_position[1] - y) <= 0.5
            for x, y in tied
        )
        assert near_some_optimum, (result.best_position, tied)
        assert result.best_utility >= best_u - 0.5

    def test_result_invariants(self):
        scene = single_cluster_scene()
        result, grid, weights, region = self._run(scene)
        assert len(result.instances) == 4
        best = max(inst.final_utility for inst in result.instances)
        assert result.best_utility == best
        for inst in result.instances:
            assert region.contains(inst.final_position, tol=1e-9)
            assert inst.utility_trace[-1] == inst.final_utility
            assert all(a < b for a, b in zip(inst.utility_trace, inst.utility_trace[1:]))
        # the returned map is the best antenna's map, on the planning grid
        assert result.radio_map.grid == grid
        assert tuple(result.radio_map.antenna.position) == tuple(result.best_position)
        assert math.isclose(
            utility(result.radio_map, weights), result.best_utility, rel_tol=1e-9
        )

    def test_weight_scaling_preserves_argmax(self):
        scene = single_cluster_scene()
        grid = fixture_grid(scene)
        weights = build_weight_map(scene, grid, fixture_weight_policy())
        region = ceiling_region_of(scene)
        kw = dict(
            antenna_template=AntennaConfig(position=(0, 0, 0)),
            trace=FIXTURE_TRACE,
            params=PlannerParams(n_instances=2, seed=3, step_min_m=0.05),
        )
        r1 = plan(scene, region, weights, grid, **kw)
        r2 = plan(scene, region, weights.scaled(3.0), grid, **kw)
        assert np.allclose(r1.best_position, r2.best_position)
        assert math.isclose(r2.best_utility, 3.0 * r1.best_utility, rel_tol=1e-9)

    def test_all_zero_weights_rejected(self):
        scene = build_scene(bounds=(8, 6, 3))
        grid = fixture_grid(scene)
        weights = WeightMap(grid=grid, values=np.zeros(grid.dims))
        with pytest.raises(ValueError, match="weight"):
            plan(
                scene,
                ceiling_region_of(scene),
                weights,
                grid,
                antenna_template=AntennaConfig(position=(0, 0, 0)),
                trace=FIXTURE_TRACE,
                params=PlannerParams(n_instances=1),
            )

    def test_weight_grid_mismatch_rejected(self):
        scene = build_scene(bounds=(8, 6, 3))
        grid = fixture_grid(scene)
        other_grid = GridSpec(scene.bounds, 1.0)
        weights = build_weight_map(scene, other_grid, WeightPolicy(w_base=1.0))
        with pytest.raises(ValueError, match="grid"):
            plan(
                scene,
                ceiling_region_of(scene),
                weights,
                grid,
                antenna_template=AntennaConfig(position=(0, 0, 0)),
                trace=FIXTURE_TRACE,
                params=PlannerParams(n_instances=1),
            )

    def test_progress_callback_sees_every_instance(self):
        scene = single_cluster_scene()
        grid = fixture_grid(scene)
        weights = build_weight_map(scene, grid, fixture_weight_policy())
        ticks = []
        plan(
            scene,
            ceiling_region_of(scene),
            weights,
            grid,
            antenna_template=AntennaConfig(position=(0, 0, 0)),
            trace=FIXTURE_TRACE,
            params=PlannerParams(n_instances=3, seed=2, step_min_m=0.2, max_iters=8),
            progress=lambda done, total: ticks.append((done, total)),
        )
        assert ticks == [(1, 3), (2, 3), (3, 3)]

    def test_to_dict_is_json_ready(self):
        import json

        scene = single_cluster_scene()
        result, _, _, _ = self._run(scene, n_instances=2)
        blob = json.dumps(result.to_dict())
        data = json.loads(blob)
        assert data["v"] == 1
        assert len(data["instances"]) == 2
        assert data["best_utility"] == result.best_utility
