"""HTTP service tests, driven through the in-process test client.

Planning jobs use the cheap fixture scenes so an end-to-end run (upload ->
plan -> poll -> slice/cdf/map/overlay) stays around a second.
"""
import json
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from radioplan.scene import scene_to_dict
from radioplan.service import Job, ServiceConfig, create_app

from conftest import build_scene, single_cluster_scene

TINY_TRACE = {"ray_count": 800, "max_bounces": 1, "max_transmissions": 2}
TINY_PLANNER = {"n_instances": 2, "seed": 3, "max_iters": 10, "step_min_m": 0.25}


@pytest.fixture()
def client(tmp_path):
    app = create_app(ServiceConfig(data_dir=tmp_path / "data"))
    with TestClient(app) as c:
        yield c


def upload(client, scene) -> str:
    r = client.post("/scenes", json=scene_to_dict(scene))
    assert r.status_code == 201, r.text
    return r.json()["scene_id"]


def submit_plan(client, scene_id, **overrides) -> str:
    body = {
        "scene_id": scene_id,
        "region": {"kind": "ceiling", "z": 3.0, "rect": [0.5, 0.5, 7.5, 5.5]},
        "trace": TINY_TRACE,
        "planner": TINY_PLANNER,
        "weight_policy": {"w_base": 0.0, "r_m": 1.0},
        "resolution_m": 0.5,
    }
    body.update(overrides)
    r = client.post("/plans", json=body)
    assert r.status_code == 202, r.text
    return r.json()["job_id"]


def wait_done(client, job_id, timeout=120.0) -> dict:
    deadline = time.monotonic() + timeout
    last_progress = -1.0
    while time.monotonic() < deadline:
        doc = client.get(f"/plans/{job_id}").json()
        assert doc["progress"] >= last_progress  # progress never goes backward
        last_progress = doc["progress"]
        if doc["state"] in ("done", "failed"):
            return doc
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} still {doc['state']} after {timeout}s")


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == {"v": 1, "status": "ok"}


class TestScenes:
    def test_upload_then_get_byte_identical(self, client):
        scene_id = upload(client, single_cluster_scene())
        r1 = client.get(f"/scenes/{scene_id}")
        r2 = client.get(f"/scenes/{scene_id}")
        assert r1.status_code == 200
        assert r1.content == r2.content
        doc = json.loads(r1.content)
        assert doc["bounds"]["max"] == [8.0, 6.0, 3.0]

    def test_upload_is_content_addressed(self, client):
        a = upload(client, single_cluster_scene())
        b = upload(client, single_cluster_scene())
        assert a == b
        c = upload(client, build_scene(bounds=(5, 5, 3)))
        assert c != a

    def test_bad_scene_400(self, client):
        r = client.post("/scenes", json={"bounds": "nope"})
        assert r.status_code == 400
        doc = r.json()
        assert doc["error"] == "bad_scene"
        assert "message" in doc

    def test_non_object_body_400(self, client):
        r = client.post("/scenes", json=[1, 2, 3])
        assert r.status_code == 400
        assert r.json()["error"] == "bad_request"

    def test_unknown_scene_404(self, client):
        r = client.get("/scenes/deadbeef00000000")
        assert r.status_code == 404
        assert r.json()["error"] == "unknown_scene"

    def test_malformed_scene_id_400(self, client):
        r = client.get("/scenes/abc-def")
        assert r.status_code == 400
        assert r.json()["error"] == "bad_id"

    def test_mid_upload_reads_409(self, client):
        scene_id = upload(client, single_cluster_scene())
        store = client.app.state.store
        store.scene_path(scene_id).unlink()
        store.upload_marker(scene_id).touch()
        try:
            r = client.get(f"/scenes/{scene_id}")
            assert r.status_code == 409
            assert r.json()["error"] == "scene_uploading"
        finally:
            store.upload_marker(scene_id).unlink()


class TestPlanJobs:
    def test_end_to_end(self, client):
        scene_id = upload(client, single_cluster_scene())
        job_id = submit_plan(client, scene_id)
        doc = wait_done(client, job_id)
        assert doc["state"] == "done", doc
        assert doc["progress"] == 1.0
        result = doc["result"]
        assert result["scene_id"] == scene_id
        assert len(result["instances"]) == 2
        x, y, z = result["best_position"]
        assert z == 3.0 and 0.5 <= x <= 7.5 and 0.5 <= y <= 5.5

        # slice at a queried height
        r = client.get(f"/plans/{job_id}/slice", params={"z": 1.0})
        assert r.status_code == 200
        sl = r.json()
        assert sl["layer_index"] == 2
        assert len(sl["values"]) == 16 and len(sl["values"][0]) == 12
        assert all(np.isfinite(v) for row in sl["values"] for v in row)

        # cdf is sorted and ends at 1.0
        cdf = client.get(f"/plans/{job_id}/cdf").json()["points"]
        values = [v for v, _ in cdf]
        assert values == sorted(values)
        assert cdf[-1][1] == 1.0

        # raw map + sidecar meta
        meta = client.get(f"/plans/{job_id}/map/meta").json()
        assert meta["dims"] == [16, 12, 6]
        blob = client.get(f"/plans/{job_id}/map").content
        assert len(blob) == 16 * 12 * 6 * 4
        decoded = np.frombuffer(blob, dtype="<f4")
        assert np.isfinite(decoded).all()

        # overlay through the service
        r = client.post(
            "/overlay",
            json={
                "plan_id": job_id,
                "pose": {"location": [4.0, 3.0, 2.9], "quaternion": [1, 0, 0, 0]},
                "intrinsics": {
                    "fx": 400,
                    "fy": 400,
                    "cx": 320,
                    "cy": 240,
                    "width": 640,
                    "height": 480,
                },
                "z_height_m": 1.0,
            },
        )
        assert r.status_code == 200
        ov = r.json()
        assert ov["frame_size"] == [640, 480]
        assert len(ov["pixels"]) > 0
        for u, v, dbm, depth in ov["pixels"]:
            assert 0 <= u < 640 and 0 <= v < 480 and depth > 0

    def test_unknown_plan_404(self, client):
        r = client.get("/plans/nosuchjob")
        assert r.status_code == 404
        assert r.json()["error"] == "unknown_plan"

    def test_unknown_scene_in_plan_404(self, client):
        r = client.post(
            "/plans",
            json={"scene_id": "deadbeef00000000", "region": {"kind": "full"}},
        )
        assert r.status_code == 404

    def test_missing_fields_400(self, client):
        r = client.post("/plans", json={"scene_id": "x"})
        assert r.status_code == 400

    def test_bad_region_400(self, client):
        scene_id = upload(client, single_cluster_scene())
        r = client.post("/plans", json={"scene_id": scene_id, "region": {"kind": "sphere"}})
        assert r.status_code == 400
        assert r.json()["error"] == "bad_region"

    def test_infeasible_region_422(self, client):
        scene_id = upload(client, single_cluster_scene())
        r = client.post(
            "/plans",
            json={
                "scene_id": scene_id,
                "region": {"kind": "box", "min": [50, 50, 50], "max": [60, 60, 60]},
            },
        )
        assert r.status_code == 422
        assert r.json()["error"] == "infeasible_region"

    def test_bad_params_rejected_before_queueing(self, client):
        scene_id = upload(client, single_cluster_scene())
        cases = [
            {"trace": {"ray_count": -5}},
            {"trace": {"warp_factor": 2}},
            {"planner": {"n_instances": 0}},
            {"resolution_m": 0.0},
            {"utility_scale": "watts"},
        ]
        for extra in cases:
            body = {
                "scene_id": scene_id,
                "region": {"kind": "full"},
                **extra,
            }
            r = client.post("/plans", json=body)
            assert r.status_code == 400, (extra, r.text)

    def test_failed_job_reports_error(self, client):
        # a machine-free scene with zero base weight gives an all-zero
        # weight map, which the planner rejects at run time
        scene_id = upload(client, build_scene(bounds=(8, 6, 3)))
        job_id = submit_plan(client, scene_id)
        doc = wait_done(client, job_id)
        assert doc["state"] == "failed"
        assert "weight" in doc["error"]
        # artifact reads against the failed job are 409
        assert client.get(f"/plans/{job_id}/slice", params={"z": 1.0}).status_code == 409

    def test_reads_against_unfinished_job_409(self, client):
        manager = client.app.state.manager
        fake = Job(id="fakerunning1", scene_id="x", state="running", progress=0.4)
        with manager.lock:
            manager.jobs[fake.id] = fake
        for path in (
            f"/plans/{fake.id}/slice?z=1.0",
            f"/plans/{fake.id}/cdf",
            f"/plans/{fake.id}/map",
            f"/plans/{fake.id}/map/meta",
        ):
            r = client.get(path)
            assert r.status_code == 409, path
            assert r.json()["error"] == "not_finished"
        r = client.post(
            "/overlay",
            json={
                "plan_id": fake.id,
                "pose": {"location": [0, 0, 0], "quaternion": [0, 0, 0, 1]},
                "intrinsics": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 1, "height": 1},
            },
        )
        assert r.status_code == 409

    def test_bad_slice_height_400(self, client):
        scene_id = upload(client, single_cluster_scene())
        job_id = submit_plan(client, scene_id)
        doc = wait_done(client, job_id)
        assert doc["state"] == "done"
        r = client.get(f"/plans/{job_id}/slice", params={"z": 99.0})
        assert r.status_code == 400
        assert r.json()["error"] == "bad_height"

    def test_queue_full_503(self, tmp_path, monkeypatch):
        import radioplan.service as service_mod

        release = threading.Event()

        def stalled_plan(*args, **kwargs):
            release.wait(timeout=30)
            raise ValueError("stalled test plan")

        monkeypatch.setattr(service_mod, "plan", stalled_plan)
        app = create_app(ServiceConfig(data_dir=tmp_path / "data", queue_depth=1))
        try:
            with TestClient(app) as c:
                scene_id = upload(c, single_cluster_scene())
                submit_plan(c, scene_id)  # taken by the worker, stalls
                time.sleep(0.1)
                submit_plan(c, scene_id)  # sits in the queue
                body = {
                    "scene_id": scene_id,
                    "region": {"kind": "ceiling", "z": 3.0, "rect": [0.5, 0.5, 7.5, 5.5]},
                }
                r = c.post("/plans", json=body)
                assert r.status_code == 503
                assert r.json()["error"] == "queue_full"
        finally:
            release.set()

    def test_restart_recovers_finished_plans(self, tmp_path):
        data_dir = tmp_path / "data"
        with TestClient(create_app(ServiceConfig(data_dir=data_dir))) as c:
            scene_id = upload(c, single_cluster_scene())
            job_id = submit_plan(c, scene_id)
            done = wait_done(c, job_id)
            assert done["state"] == "done"
            blob = c.get(f"/plans/{job_id}/map").content

        # fresh process over the same data directory
        with TestClient(create_app(ServiceConfig(data_dir=data_dir))) as c2:
            doc = c2.get(f"/plans/{job_id}").json()
            assert doc["state"] == "done"
            assert doc["result"]["best_position"] == done["result"]["best_position"]
            assert c2.get(f"/plans/{job_id}/map").content == blob
            sl = c2.get(f"/plans/{job_id}/slice", params={"z": 1.0})
            assert sl.status_code == 200


class TestAuth:
    @pytest.fixture()
    def secured(self, tmp_path):
        app = create_app(ServiceConfig(data_dir=tmp_path / "data", token="s3cret"))
        with TestClient(app) as c:
            yield c

    def test_healthz_exempt(self, secured):
        assert secured.get("/healthz").status_code == 200

    def test_missing_token_401(self, secured):
        r = secured.post("/scenes", json=scene_to_dict(build_scene()))
        assert r.status_code == 401
        assert r.json()["error"] == "unauthorized"
        assert secured.get("/plans/x").status_code == 401

    def test_wrong_scheme_or_token_401(self, secured):
        for header in ("Bearer wrong", "Basic s3cret", "s3cret"):
            r = secured.get("/scenes/abc", headers={"Authorization": header})
            assert r.status_code == 401, header

    def test_correct_token_passes(self, secured):
        h = {"Authorization": "Bearer s3cret"}
        r = secured.post("/scenes", json=scene_to_dict(build_scene()), headers=h)
        assert r.status_code == 201
        scene_id = r.json()["scene_id"]
        assert secured.get(f"/scenes/{scene_id}", headers=h).status_code == 200
