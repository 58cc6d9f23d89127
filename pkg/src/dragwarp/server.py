"""HTTP service exposing the edit pipeline.

Endpoints (JSON bodies, images as base64 PNG):

    POST /api/images          {"imagePng": b64}            -> {"imageId"}
    POST /api/edits           edit request                 -> 200 result (small
                              inputs run synchronously) or 202 {"id", "state"}
    GET  /api/edits/{id}      -> job state, result image, diagnostics
    GET  /api/health          -> {"version", "weightsChecksum"}

Edit request: {"imageId", "maskPng": b64, "instructions": [{"handle": [x, y],
"target": [x, y]}], "mode", "config": {...}, "jobId": optional client token}.
Validation failures return 400 with {"errors": [{"path", "message"}]};
unknown ids 404; resubmitting an existing jobId 409.

Jobs run on a small worker pool; results for a given request and seed are
byte-identical across submissions.
"""

from __future__ import annotations

import base64
import io as bytesio
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from PIL import Image

from . import __version__
from . import io as dio
from .config import EditConfig
from .diffusion.predictor import weights_checksum
from .pipeline import edit
from .validation import InvalidRequestError

SYNC_MAX_PIXELS = 128 * 128

_JOB_STATES = ("queued", "running", "done", "failed")


@dataclass
class EditJob:
    id: str
    state: str = "queued"
    result_png: str | None = None
    diagnostics: dict | None = None
    error: str | None = None
    error_issues: list = field(default_factory=list)

    def advance(self, state: str) -> None:
        if _JOB_STATES.index(state) < _JOB_STATES.index(self.state):
            raise ValueError(f"job state cannot move back from {self.state} to {state}")
        self.state = state


@dataclass
class _Store:
    images: dict = field(default_factory=dict)
    jobs: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _b64_to_image(b64: str) -> np.ndarray:
    raw = base64.b64decode(b64, validate=True)
    with Image.open(bytesio.BytesIO(raw)) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def _b64_to_mask(b64: str) -> np.ndarray:
    raw = base64.b64decode(b64, validate=True)
    with Image.open(bytesio.BytesIO(raw)) as img:
        gray = np.asarray(img.convert("L"))
    return gray >= dio.MASK_THRESHOLD


def _image_to_b64(image: np.ndarray) -> str:
    quantized = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    buf = bytesio.BytesIO()
    Image.fromarray(quantized, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _error_response(status: int, errors: list[tuple[str, str]]) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"errors": [{"path": p, "message": m} for p, m in errors]},
    )


def _parse_edit_body(body: dict, store: _Store):
    """Validate the request body; returns (image, mask, drag_set, config, job_id) or errors."""
    errors: list[tuple[str, str]] = []
    allowed = {"imageId", "maskPng", "instructions", "mode", "config", "jobId"}
    for key in body:
        if key not in allowed:
            errors.append((key, "unknown field"))

    image_id = body.get("imageId")
    image = None
    if not isinstance(image_id, str):
        errors.append(("imageId", "missing or not a string"))
    else:
        with store.lock:
            image = store.images.get(image_id)
        if image is None:
            return None, [("imageId", "unknown image id")], 404

    mask = None
    if not isinstance(body.get("maskPng"), str):
        errors.append(("maskPng", "missing or not a base64 string"))
    else:
        try:
            mask = _b64_to_mask(body["maskPng"])
        except Exception as exc:
            errors.append(("maskPng", f"cannot decode mask: {exc}"))

    spec_like = {
        "image": "inline",
        "mask": {"width": 1, "height": 1, "runs": [1]},
        "instructions": body.get("instructions", []),
        "mode": body.get("mode", "stretch"),
        "config": body.get("config", {}),
    }
    try:
        doc = dio.parse_drag_spec(json.dumps(spec_like))
        drag_set, config = doc.drag_set(), doc.config
    except dio.SpecError as exc:
        errors.extend(e for e in exc.errors if not e[0].startswith("mask"))
        drag_set = config = None

    job_id = body.get("jobId")
    if job_id is not None and not isinstance(job_id, str):
        errors.append(("jobId", "expected a string token"))

    if errors:
        return None, errors, 400
    return (image, mask, drag_set, config, job_id), None, None


def create_app(sync_max_pixels: int = SYNC_MAX_PIXELS, persist_dir: str | None = None,
               workers: int = 2) -> FastAPI:
    app = FastAPI(title="dragwarp", version=__version__)
    store = _Store()
    pool = ThreadPoolExecutor(max_workers=workers)
    persist = Path(persist_dir) if persist_dir else None
    if persist:
        persist.mkdir(parents=True, exist_ok=True)

    def run_job(job: EditJob, image, mask, drag_set, config):
        with store.lock:
            job.advance("running")
        try:
            outcome = edit(image, mask, drag_set, config)
            result = _image_to_b64(outcome.image)
            diagnostics = outcome.diagnostics.to_dict()
        except InvalidRequestError as exc:
            with store.lock:
                job.error = "; ".join(str(i) for i in exc.issues)
                job.error_issues = [(i.path, i.message) for i in exc.issues]
                job.advance("failed")
            return
        except Exception as exc:
            with store.lock:
                job.error = str(exc)
                job.error_issues = [("request", str(exc))]
                job.advance("failed")
            return
        with store.lock:
            job.result_png = result
            job.diagnostics = diagnostics
            job.advance("done")
        if persist:
            (persist / f"{job.id}.json").write_text(json.dumps(_job_payload(job)))

    def _job_payload(job: EditJob) -> dict:
        payload = {"id": job.id, "state": job.state}
        if job.result_png is not None:
            payload["resultPng"] = job.result_png
            payload["diagnostics"] = job.diagnostics
        if job.error is not None:
            payload["error"] = job.error
        return payload

    @app.get("/api/health")
    def health():
        return {"version": __version__, "weightsChecksum": weights_checksum()}

    @app.post("/api/images")
    async def upload_image(body: dict):
        if not isinstance(body.get("imagePng"), str):
            return _error_response(400, [("imagePng", "missing or not a base64 string")])
        try:
            image = _b64_to_image(body["imagePng"])
        except Exception as exc:
            return _error_response(400, [("imagePng", f"cannot decode image: {exc}")])
        image_id = uuid.uuid4().hex
        with store.lock:
            store.images[image_id] = image
        return {"imageId": image_id, "width": image.shape[1], "height": image.shape[0]}

    @app.post("/api/edits")
    async def submit_edit(body: dict):
        parsed, errors, status = _parse_edit_body(body, store)
        if errors is not None:
            return _error_response(status, errors)
        image, mask, drag_set, config, job_id = parsed

        if mask.shape != image.shape[:2]:
            return _error_response(
                400, [("maskPng", f"mask shape {mask.shape} does not match image {image.shape[:2]}")]
            )

        job_id = job_id or uuid.uuid4().hex
        with store.lock:
            if job_id in store.jobs:
                return _error_response(409, [("jobId", f"job {job_id} already submitted")])
            job = EditJob(id=job_id)
            store.jobs[job_id] = job

        if image.shape[0] * image.shape[1] <= sync_max_pixels:
            run_job(job, image, mask, drag_set, config)
            with store.lock:
                payload = _job_payload(job)
                failed = job.state == "failed"
                issues = list(job.error_issues)
            if failed:
                return _error_response(400, issues or [("request", "edit failed")])
            return JSONResponse(status_code=200, content=payload)

        pool.submit(run_job, job, image, mask, drag_set, config)
        return JSONResponse(status_code=202, content={"id": job_id, "state": job.state})

    @app.get("/api/edits/{job_id}")
    def get_edit(job_id: str):
        with store.lock:
            job = store.jobs.get(job_id)
            if job is not None:
                return _job_payload(job)
        if persist:
            path = persist / f"{job_id}.json"
            if path.exists():
                return json.loads(path.read_text())
        return _error_response(404, [("id", f"unknown job {job_id}")])

    return app


app = create_app()


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="dragwarp-serve")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8008)
    parser.add_argument("--persist-dir", default=None)
    args = parser.parse_args()
    uvicorn.run(create_app(persist_dir=args.persist_dir), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
