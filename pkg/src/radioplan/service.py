"""Planning service: scene upload, queued planning jobs, map reads, overlays.

Single-tenant HTTP + JSON service.  Scenes are content-addressed (the id is
a digest of the canonical scene JSON), results live on disk next to them,
and every write is temp-file + rename, so a crash mid-job never corrupts
stored artifacts.  Planning runs on a small worker pool (one job at a time
by default); clients poll GET /plans/{id}.

Error mapping: 404 unknown ids, 400 malformed/schema-violating bodies,
409 reads against a job that has not finished (or a scene mid-upload),
422 region infeasible for the scene.  With a configured token, every
endpoint except /healthz requires `Authorization: Bearer <token>`.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import mapio
from .mapping import GridSpec, build_weight_map, coverage_cdf, horizontal_slice, WeightPolicy
from .planning import PlannerParams, plan, region_from_dict
from .projection import OverlayOptions, intrinsics_from_dict, pose_from_dict, project_radio_map
from .scene import Scene, SceneParseError, SceneValidationError, scene_from_dict, scene_to_dict
from .tracing import AntennaConfig, TraceParams

__all__ = ["ServiceConfig", "create_app"]


@dataclass
class ServiceConfig:
    data_dir: Path
    token: str | None = None
    queue_depth: int = 8
    map_workers: int = 1
    static_dir: Path | None = None  # optional built web UI, served at /ui


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Job:
    id: str
    scene_id: str
    state: str = "queued"  # queued -> running -> done | failed
    progress: float = 0.0
    error: str | None = None

    def advance(self, state: str) -> None:
        allowed = {"queued": {"running"}, "running": {"done", "failed"}}
        if state not in allowed.get(self.state, set()):
            raise RuntimeError(f"bad job transition {self.state} -> {state}")
        self.state = state


def _canonical_scene_bytes(scene: Scene) -> bytes:
    doc = scene_to_dict(scene)
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


class ArtifactStore:
    """Scenes and plan results on disk, atomically written."""

    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "scenes").mkdir(parents=True, exist_ok=True)
        (self.root / "plans").mkdir(parents=True, exist_ok=True)

    def scene_path(self, scene_id: str) -> Path:
        if not scene_id.isalnum():
            raise ApiError(400, "bad_id", f"malformed scene id {scene_id!r}")
        return self.root / "scenes" / f"{scene_id}.json"

    def upload_marker(self, scene_id: str) -> Path:
        return self.root / "scenes" / f"{scene_id}.uploading"

    def put_scene(self, scene: Scene) -> str:
        raw = _canonical_scene_bytes(scene)
        scene_id = hashlib.sha256(raw).hexdigest()[:16]
        marker = self.upload_marker(scene_id)
        marker.touch()
        try:
            mapio.atomic_write_bytes(self.scene_path(scene_id), raw)
        finally:
            marker.unlink(missing_ok=True)
        return scene_id

    def get_scene_bytes(self, scene_id: str) -> bytes:
        path = self.scene_path(scene_id)
        if not path.exists():
            if self.upload_marker(scene_id).exists():
                raise ApiError(409, "scene_uploading", f"scene {scene_id} is still uploading")
            raise ApiError(404, "unknown_scene", f"no scene {scene_id}")
        return path.read_bytes()

    def get_scene(self, scene_id: str) -> Scene:
        return scene_from_dict(json.loads(self.get_scene_bytes(scene_id)))

    def plan_dir(self, job_id: str, create: bool = False) -> Path:
        d = self.root / "plans" / job_id
        if create:
            d.mkdir(parents=True, exist_ok=True)
        return d


@dataclass
class PlanRequest:
    scene_id: str
    region: dict
    antenna: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)
    planner: dict = field(default_factory=dict)
    weight_policy: dict = field(default_factory=dict)
    resolution_m: float = 0.5
    utility_scale: str = "dbm"


def _pick(doc: dict, cls, error_name: str):
    """Construct a defaults dataclass from a JSON object, 400 on bad fields."""
    try:
        return cls(**doc)
    except (TypeError, ValueError) as e:
        raise ApiError(400, "bad_request", f"invalid {error_name}: {e}") from e


def _parse_plan_request(body) -> PlanRequest:
    if not isinstance(body, dict):
        raise ApiError(400, "bad_request", "plan request must be a JSON object")
    body = dict(body)
    body.pop("v", None)
    if "scene_id" not in body or "region" not in body:
        raise ApiError(400, "bad_request", "plan request needs scene_id and region")
    return _pick(body, PlanRequest, "plan request")


class JobManager:
    """Bounded queue of planning jobs worked by one background thread."""

    def __init__(self, store: ArtifactStore, config: ServiceConfig):
        self.store = store
        self.config = config
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()
        self.queue: queue.Queue = queue.Queue(maxsize=config.queue_depth)
        self.worker = threading.Thread(target=self._work, daemon=True, name="plan-worker")
        self.worker.start()

    def submit(self, req: PlanRequest) -> Job:
        scene = self.store.get_scene(req.scene_id)  # 404/409 before queueing
        try:
            region = region_from_dict(req.region)
        except ValueError as e:
            raise ApiError(400, "bad_region", str(e)) from e
        try:
            region.resolve(scene.bounds)
        except ValueError as e:
            raise ApiError(422, "infeasible_region", str(e)) from e
        antenna = _pick(
            dict(req.antenna, position=(0.0, 0.0, 0.0)), AntennaConfig, "antenna"
        )
        trace = _pick(req.trace, TraceParams, "trace params")
        planner = _pick(req.planner, PlannerParams, "planner params")
        policy = _pick(req.weight_policy, WeightPolicy, "weight policy")
        if req.resolution_m <= 0:
            raise ApiError(400, "bad_request", "resolution_m must be > 0")
        if req.utility_scale not in ("dbm", "linear"):
            raise ApiError(400, "bad_request", f"unknown utility_scale {req.utility_scale!r}")

        job = Job(id=uuid.uuid4().hex[:12], scene_id=req.scene_id)
        work = (job, scene, region, antenna, trace, planner, policy, req)
        with self.lock:
            try:
                self.queue.put_nowait(work)
            except queue.Full:
                raise ApiError(503, "queue_full", "planning queue is full") from None
            self.jobs[job.id] = job
        return job

    def get(self, job_id: str) -> Job:
        with self.lock:
            job = self.jobs.get(job_id)
        if job is None:
            # service may have restarted; completed results live on disk
            if (self.store.plan_dir(job_id) / "result.json").exists():
                return Job(id=job_id, scene_id="", state="done", progress=1.0)
            raise ApiError(404, "unknown_plan", f"no plan job {job_id}")
        return job

    def set_progress(self, job: Job, fraction: float) -> None:
        with self.lock:
            job.progress = max(job.progress, min(fraction, 1.0))

    def _work(self) -> None:
        while True:
            job, scene, region, antenna, trace, planner, policy, req = self.queue.get()
            with self.lock:
                job.advance("running")
            try:
                self._run_one(job, scene, region, antenna, trace, planner, policy, req)
                with self.lock:
                    job.advance("done")
                    job.progress = 1.0
            except Exception as e:  # noqa: BLE001 - job errors become status
                with self.lock:
                    job.advance("failed")
                    job.error = f"{type(e).__name__}: {e}"

    def _run_one(self, job, scene, region, antenna, trace, planner, policy, req) -> None:
        grid = GridSpec(scene.bounds, req.resolution_m)
        weights = build_weight_map(scene, grid, policy)
        result = plan(
            scene,
            region,
            weights,
            grid,
            antenna,
            trace,
            planner,
            workers=self.config.map_workers,
            utility_scale=req.utility_scale,
            progress=lambda done, total: self.set_progress(job, done / (total + 1)),
        )
        out = self.store.plan_dir(job.id, create=True)
        mapio.save_map(result.radio_map, out / "map.f32")
        doc = result.to_dict()
        doc["scene_id"] = req.scene_id
        mapio.atomic_write_bytes(
            out / "result.json", (json.dumps(doc, indent=2) + "\n").encode()
        )


def create_app(config: ServiceConfig) -> FastAPI:
    store = ArtifactStore(config.data_dir)
    manager = JobManager(store, config)
    app = FastAPI(title="radioplan service", version="1")
    app.state.store = store
    app.state.manager = manager

    def check_auth(request: Request) -> None:
        if config.token is None or request.url.path == "/healthz":
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {config.token}":
            raise ApiError(401, "unauthorized", "missing or wrong bearer token")

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"v": 1, "error": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"v": 1, "error": "bad_request", "message": str(exc.errors()[:1])},
        )

    @app.middleware("http")
    async def auth_middleware(request: Request, call_next):
        try:
            check_auth(request)
        except ApiError as e:
            return JSONResponse(
                status_code=e.status, content={"v": 1, "error": e.code, "message": e.message}
            )
        return await call_next(request)

    @app.get("/healthz")
    async def healthz():
        return {"v": 1, "status": "ok"}

    @app.post("/scenes", status_code=201)
    async def upload_scene(body: dict):
        try:
            scene = scene_from_dict(body)
        except (SceneParseError, SceneValidationError) as e:
            raise ApiError(400, "bad_scene", str(e)) from e
        scene_id = store.put_scene(scene)
        return {"v": 1, "scene_id": scene_id}

    @app.get("/scenes/{scene_id}")
    async def get_scene(scene_id: str):
        return Response(content=store.get_scene_bytes(scene_id), media_type="application/json")

    @app.post("/plans", status_code=202)
    async def submit_plan(body: dict):
        job = manager.submit(_parse_plan_request(body))
        return {"v": 1, "job_id": job.id, "state": job.state}

    def job_payload(job: Job) -> dict:
        doc = {
            "v": 1,
            "job_id": job.id,
            "state": job.state,
            "progress": round(job.progress, 6),
        }
        if job.error is not None:
            doc["error"] = job.error
        if job.state == "done":
            result = json.loads((store.plan_dir(job.id) / "result.json").read_text())
            doc["result"] = result
        return doc

    @app.get("/plans/{job_id}")
    async def plan_status(job_id: str):
        return job_payload(manager.get(job_id))

    def _completed_map(job_id: str):
        job = manager.get(job_id)
        if job.state != "done":
            raise ApiError(409, "not_finished", f"plan {job_id} is {job.state}")
        loaded = mapio.load_map(store.plan_dir(job_id) / "map.f32")
        return loaded

    @app.get("/plans/{job_id}/slice")
    async def plan_slice(job_id: str, z: float):
        rmap = _completed_map(job_id)
        try:
            sl = horizontal_slice(rmap, z)
        except ValueError as e:
            raise ApiError(400, "bad_height", str(e)) from e
        return {
            "v": 1,
            "z_center_m": sl.z_center_m,
            "layer_index": sl.layer_index,
            "x_centers": [float(x) for x in sl.x_centers],
            "y_centers": [float(y) for y in sl.y_centers],
            "values": [[float(v) for v in row] for row in sl.values],
        }

    @app.get("/plans/{job_id}/cdf")
    async def plan_cdf(job_id: str):
        rmap = _completed_map(job_id)
        return {"v": 1, "points": [[v, f] for v, f in coverage_cdf(rmap)]}

    @app.get("/plans/{job_id}/map")
    async def plan_map(job_id: str):
        job = manager.get(job_id)
        if job.state != "done":
            raise ApiError(409, "not_finished", f"plan {job_id} is {job.state}")
        return FileResponse(store.plan_dir(job_id) / "map.f32", media_type="application/octet-stream")

    @app.get("/plans/{job_id}/map/meta")
    async def plan_map_meta(job_id: str):
        job = manager.get(job_id)
        if job.state != "done":
            raise ApiError(409, "not_finished", f"plan {job_id} is {job.state}")
        return Response(
            content=(store.plan_dir(job_id) / "map.f32.json").read_bytes(),
            media_type="application/json",
        )

    @app.post("/overlay")
    async def overlay(body: dict):
        if not isinstance(body, dict) or "plan_id" not in body:
            raise ApiError(400, "bad_request", "overlay request needs plan_id, pose, intrinsics")
        rmap = _completed_map(str(body["plan_id"]))
        try:
            pose = pose_from_dict(body.get("pose", {}))
            intr = intrinsics_from_dict(body.get("intrinsics", {}))
        except ValueError as e:
            raise ApiError(400, "bad_request", str(e)) from e
        opts = OverlayOptions(z_height_m=body.get("z_height_m"))
        try:
            result = project_radio_map(rmap, pose, intr, opts)
        except ValueError as e:
            raise ApiError(400, "bad_request", str(e)) from e
        return result.to_dict()

    if config.static_dir is not None and Path(config.static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
