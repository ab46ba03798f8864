"""Indoor radio-network planning toolkit.

Builds 3D RSRP voxel maps over a reconstructed obstacle scene by
shooting-and-bouncing ray tracing, optimizes access-point placement inside
a user-constrained deployment region, and provides the pinhole-projection
machinery needed to overlay radio maps on camera frames.
"""

from .scene import (
    Aabb,
    Box,
    Machine,
    Material,
    Obstacle,
    PlaneRect,
    Scene,
    SceneParseError,
    SceneValidationError,
    Trajectory,
    BUILTIN_MATERIALS,
    geometric_center,
    load_scene,
    object_position_rmse,
    save_scene,
    scene_from_dict,
    scene_to_dict,
)
from .tracing import (
    AntennaConfig,
    PropagationPath,
    TraceParams,
    free_space_path_loss_db,
    path_power_dbm,
    received_power_dbm,
    trace_paths,
)
from .mapping import (
    GridSpec,
    RadioMap,
    WeightMap,
    WeightPolicy,
    build_radio_map,
    build_weight_map,
    coverage_cdf,
    horizontal_slice,
    utility,
)
from .planning import (
    DeploymentRegion,
    PlannerParams,
    PlanResult,
    SearchInstance,
    local_search,
    plan,
    sample_initial_positions,
)
from .projection import (
    CameraPose,
    Intrinsics,
    Overlay,
    OverlayOptions,
    back_project,
    location_error,
    orientation_angle_error,
    pose_loss,
    project_point,
    project_radio_map,
    quaternion_to_rotation,
    rotation_vector_to_quaternion,
)
from .mapio import (
    load_map,
    overlay_to_png,
    save_map,
    slice_to_csv,
    slice_to_png,
)

__version__ = "0.1.0"
