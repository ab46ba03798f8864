import json

import numpy as np
import pytest
from PIL import Image

from radioplan import (
    AntennaConfig,
    GridSpec,
    RadioMap,
    WeightMap,
    horizontal_slice,
    load_map,
    save_map,
    slice_to_csv,
    slice_to_png,
)
from radioplan.mapio import atomic_write_bytes, overlay_to_png
from radioplan.projection import Overlay
from radioplan.scene import Aabb


def demo_radio_map(dims=(4, 3, 2), seed=0):
    rng = np.random.default_rng(seed)
    grid = GridSpec(Aabb((0, 0, 0), tuple(float(d) for d in dims)), 1.0)
    ant = AntennaConfig(position=(0.5, 0.5, 0.5), tx_power_dbm=17.0, gain_dbi=3.0)
    # float32-representable values so the container round-trips exactly
    values = rng.uniform(-120, -30, dims).astype(np.float32).astype(float)
    return RadioMap(grid=grid, antenna=ant, values=values)


class TestMapContainer:
    def test_radio_map_round_trip(self, tmp_path):
        m = demo_radio_map()
        p = tmp_path / "map.f32"
        save_map(m, p)
        back = load_map(p)
        assert isinstance(back, RadioMap)
        assert np.array_equal(back.values, m.values)
        assert back.grid == m.grid
        assert back.antenna == m.antenna

    def test_weight_map_round_trip(self, tmp_path):
        grid = GridSpec(Aabb((0, 0, 0), (2, 2, 2)), 1.0)
        m = WeightMap(grid=grid, values=np.ones((2, 2, 2)) * 2.5)
        p = tmp_path / "w.f32"
        save_map(m, p)
        back = load_map(p)
        assert isinstance(back, WeightMap)
        assert np.array_equal(back.values, m.values)

    def test_binary_layout_is_little_endian_c_order(self, tmp_path):
        m = demo_radio_map()
        p = tmp_path / "map.f32"
        save_map(m, p)
        raw = p.read_bytes()
        assert len(raw) == 4 * 3 * 2 * 4
        decoded = np.frombuffer(raw, dtype="<f4").reshape(4, 3, 2)
        assert np.array_equal(decoded, m.values.astype("<f4"))
        # k is the fastest axis: the second scalar is [0,0,1]
        assert decoded.flat[1] == np.float32(m.values[0, 0, 1])

    def test_sidecar_contents(self, tmp_path):
        m = demo_radio_map()
        save_map(m, tmp_path / "map.f32")
        meta = json.loads((tmp_path / "map.f32.json").read_text())
        assert meta["v"] == 1
        assert meta["kind"] == "radio_map"
        assert meta["dtype"] == "<f4"
        assert meta["order"] == "C"
        assert meta["dims"] == [4, 3, 2]
        assert meta["bounds"] == {"min": [0.0, 0.0, 0.0], "max": [4.0, 3.0, 2.0]}
        assert meta["resolution_m"] == 1.0
        assert meta["antenna"]["tx_power_dbm"] == 17.0

    def test_saves_are_byte_identical(self, tmp_path):
        m = demo_radio_map()
        save_map(m, tmp_path / "a.f32")
        save_map(m, tmp_path / "b.f32")
        assert (tmp_path / "a.f32").read_bytes() == (tmp_path / "b.f32").read_bytes()
        assert (tmp_path / "a.f32.json").read_text() == (tmp_path / "b.f32.json").read_text()

    def test_no_temp_droppings(self, tmp_path):
        save_map(demo_radio_map(), tmp_path / "map.f32")
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["map.f32", "map.f32.json"]

    def test_version_check(self, tmp_path):
        m = demo_radio_map()
        p = tmp_path / "map.f32"
        save_map(m, p)
        meta = json.loads((tmp_path / "map.f32.json").read_text())
        meta["v"] = 2
        (tmp_path / "map.f32.json").write_text(json.dumps(meta))
        with pytest.raises(ValueError, match="version"):
            load_map(p)

    def test_truncated_binary_rejected(self, tmp_path):
        m = demo_radio_map()
        p = tmp_path / "map.f32"
        save_map(m, p)
        p.write_bytes(p.read_bytes()[:-4])
        with pytest.raises(ValueError, match="bytes"):
            load_map(p)

    def test_inconsistent_dims_rejected(self, tmp_path):
        m = demo_radio_map()
        p = tmp_path / "map.f32"
        save_map(m, p)
        meta = json.loads((tmp_path / "map.f32.json").read_text())
        meta["dims"] = [2, 3, 4]  # wrong shape for the stated bounds/resolution
        (tmp_path / "map.f32.json").write_text(json.dumps(meta))
        with pytest.raises(ValueError):
            load_map(p)

    def test_unknown_kind_rejected(self, tmp_path):
        m = demo_radio_map()
        p = tmp_path / "map.f32"
        save_map(m, p)
        meta = json.loads((tmp_path / "map.f32.json").read_text())
        meta["kind"] = "heatmap"
        (tmp_path / "map.f32.json").write_text(json.dumps(meta))
        with pytest.raises(ValueError, match="kind"):
            load_map(p)

    def test_missing_sidecar_raises(self, tmp_path):
        p = tmp_path / "map.f32"
        p.write_bytes(b"\x00" * 16)
        with pytest.raises(FileNotFoundError):
            load_map(p)


def test_atomic_write_overwrites_in_place(tmp_path):
    p = tmp_path / "x.bin"
    atomic_write_bytes(p, b"one")
    atomic_write_bytes(p, b"two")
    assert p.read_bytes() == b"two"
    assert [q.name for q in tmp_path.iterdir()] == ["x.bin"]


class TestSliceCsv:
    def test_layout_and_full_precision(self, tmp_path):
        m = demo_radio_map(dims=(2, 3, 1))
        sl = horizontal_slice(m, 0.5)
        p = tmp_path / "slice.csv"
        slice_to_csv(sl, p)
        lines = p.read_text().strip().split("\n")
        assert len(lines) == 3  # header + one row per x center
        header = lines[0].split(",")
        assert header[0] == "z=0.5"
        assert header[1:] == ["0.5", "1.5", "2.5"]
        row0 = lines[1].split(",")
        assert row0[0] == "0.5"
        # repr round-trips the float exactly
        assert [float(v) for v in row0[1:]] == list(m.values[0, :, 0])

    def test_writes_to_open_file(self, tmp_path):
        import io

        m = demo_radio_map(dims=(2, 2, 1))
        sl = horizontal_slice(m, 0.5)
        buf = io.StringIO()
        slice_to_csv(sl, buf)
        assert buf.getvalue().startswith("z=0.5")


class TestSlicePng:
    def test_color_ramp_endpoints_and_midpoint(self, tmp_path):
        grid = GridSpec(Aabb((0, 0, 0), (3, 1, 1)), 1.0)
        vals = np.array([-120.0, -75.0, -30.0]).reshape(3, 1, 1)
        m = RadioMap(grid=grid, antenna=AntennaConfig(position=(0, 0, 0)), values=vals)
        p = tmp_path / "s.png"
        slice_to_png(horizontal_slice(m, 0.5), p, scale=1)
        img = np.asarray(Image.open(p).convert("RGB"))
        assert img.shape == (1, 3, 3)
        assert tuple(img[0, 0]) == (0, 0, 128)  # vmin = navy
        assert tuple(img[0, 1]) == (0, 255, 128)  # midpoint = spring green
        assert tuple(img[0, 2]) == (255, 0, 0)  # vmax = red
        # out-of-range values clip to the endpoints
        vals2 = np.array([-200.0, -75.0, 0.0]).reshape(3, 1, 1)
        m2 = RadioMap(grid=grid, antenna=AntennaConfig(position=(0, 0, 0)), values=vals2)
        slice_to_png(horizontal_slice(m2, 0.5), p, scale=1)
        img2 = np.asarray(Image.open(p).convert("RGB"))
        assert tuple(img2[0, 0]) == (0, 0, 128)
        assert tuple(img2[0, 2]) == (255, 0, 0)

    def test_orientation_row0_is_max_y(self, tmp_path):
        # single x column, two y cells; put the hot value at max y
        grid = GridSpec(Aabb((0, 0, 0), (1, 2, 1)), 1.0)
        vals = np.array([[-120.0, -30.0]]).reshape(1, 2, 1)
        m = RadioMap(grid=grid, antenna=AntennaConfig(position=(0, 0, 0)), values=vals)
        p = tmp_path / "o.png"
        slice_to_png(horizontal_slice(m, 0.5), p, scale=1)
        img = np.asarray(Image.open(p).convert("RGB"))
        assert img.shape == (2, 1, 3)
        assert tuple(img[0, 0]) == (255, 0, 0)  # top row = y max = hot
        assert tuple(img[1, 0]) == (0, 0, 128)

    def test_scale_multiplies_size(self, tmp_path):
        m = demo_radio_map(dims=(4, 3, 1))
        p = tmp_path / "s.png"
        slice_to_png(horizontal_slice(m, 0.5), p, scale=8)
        img = Image.open(p)
        assert (img.width, img.height) == (32, 24)

    def test_grayscale_mode(self, tmp_path):
        grid = GridSpec(Aabb((0, 0, 0), (2, 1, 1)), 1.0)
        vals = np.array([-120.0, -30.0]).reshape(2, 1, 1)
        m = RadioMap(grid=grid, antenna=AntennaConfig(position=(0, 0, 0)), values=vals)
        p = tmp_path / "g.png"
        slice_to_png(horizontal_slice(m, 0.5), p, grayscale=True, scale=1)
        img = np.asarray(Image.open(p))
        assert img.ndim == 2
        assert img[0, 0] == 0 and img[0, 1] == 255


class TestOverlayPng:
    def test_dots_painted_at_pixels(self, tmp_path):
        ov = Overlay(pixels=((10, 20, -30.0, 1.0),), frame_size=(64, 48))
        p = tmp_path / "ov.png"
        overlay_to_png(ov, p, dot_px=3)
        img = np.asarray(Image.open(p))
        assert img.shape == (48, 64, 4)
        assert tuple(img[20, 10]) == (255, 0, 0, 255)  # -30 dBm = ramp max
        assert tuple(img[21, 11]) == (255, 0, 0, 255)  # 3px dot spreads
        assert img[0, 0, 3] == 0  # background transparent

    def test_empty_overlay_is_fully_transparent(self, tmp_path):
        ov = Overlay(pixels=(), frame_size=(8, 8))
        p = tmp_path / "e.png"
        overlay_to_png(ov, p)
        img = np.asarray(Image.open(p))
        assert img[:, :, 3].max() == 0

    def test_dot_clipped_at_border(self, tmp_path):
        ov = Overlay(pixels=((0, 0, -30.0, 1.0),), frame_size=(8, 8))
        p = tmp_path / "b.png"
        overlay_to_png(ov, p, dot_px=5)
        img = np.asarray(Image.open(p))  # no wrap-around to the far edge
        assert img[7, 7, 3] == 0
        assert img[0, 0, 3] == 255
