"""Project a radio map into a camera frame, as an AR headset or phone would
render it during a site survey.

Run demos/02_factory_map.py first to produce demos/out/factory.f32.
"""

from radioplan import (
    CameraPose,
    Intrinsics,
    OverlayOptions,
    load_map,
    overlay_to_png,
    project_radio_map,
)

rmap = load_map("demos/out/factory.f32")

# camera standing mid-hall at eye height, optical axis along world +x,
# image-right along -y, image-down along -z
pose = CameraPose(location=(1.0, 5.0, 1.6), quaternion=(-0.5, 0.5, -0.5, 0.5))
intr = Intrinsics(fx=600.0, fy=600.0, cx=480.0, cy=270.0, width=960, height=540)

overlay = project_radio_map(rmap, pose, intr, OverlayOptions(z_height_m=1.5))
print(f"{len(overlay.pixels)} occupied pixels in a {overlay.frame_size} frame")
nearest = min(overlay.pixels, key=lambda p: p[3])
print(f"nearest voxel: {nearest[3]:.2f} m at pixel ({nearest[0]}, {nearest[1]}), {nearest[2]:.1f} dBm")

overlay_to_png(overlay, "demos/out/overlay.png", dot_px=5)
print("wrote demos/out/overlay.png (transparent RGBA, ready to composite on a camera frame)")
