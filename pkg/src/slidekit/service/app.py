"""FastAPI application: arena endpoints plus derender/evaluate wrappers.

Blinding contract: no response issued before a session completes ever
pairs a method name with sample imagery. Candidate images are addressed
by blind label through session-scoped URLs; the event log (server-side
only) stores the unblinded rankings.
"""

from __future__ import annotations

import base64
import tempfile
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ..arena import ArenaStore
from ..backends import Backend
from ..contexts import Detection, DetectionSet
from ..engine import derender_pipeline
from ..errors import (
    DuplicateSubmission,
    InvalidPermutation,
    MissingOutput,
    SlidekitError,
)
from ..metrics import evaluate_sample
from ..model import BBox
from ..postprocess import extract_assets
from ..raster import decode_image
from ..svgio import parse_slide_svg
from . import schemas

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>slidekit arena</title></head>
<body><h1>slidekit arena</h1>
<p>The ranking UI bundle is not built. The REST API is live; see /docs.</p>
</body></html>
"""


def _session_info(store: ArenaStore, session) -> schemas.SessionInfo:
    return schemas.SessionInfo(
        session_id=session.session_id,
        rater_id=session.rater_id,
        n_samples=len(session.sample_order),
        n_methods=len(store.methods),
        ranked=len(session.submitted),
        done=session.done,
    )


def create_app(
    store: ArenaStore,
    backend: Backend | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="slidekit service", version="0.1.0")

    @app.exception_handler(SlidekitError)
    async def slidekit_error_handler(request: Request, exc: SlidekitError):
        status = 400
        if isinstance(exc, DuplicateSubmission):
            status = 409
        elif isinstance(exc, InvalidPermutation):
            status = 422
        elif isinstance(exc, MissingOutput):
            status = 409
        elif "unknown session" in str(exc) or "unknown label" in str(exc):
            status = 404
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", response_model=schemas.SessionInfo)
    def create_session(body: schemas.CreateSessionRequest):
        session = store.create_session(body.rater_id)
        return _session_info(store, session)

    @app.get("/sessions/{session_id}", response_model=schemas.SessionInfo)
    def session_info(session_id: str):
        return _session_info(store, store.get_session(session_id))

    @app.get("/sessions/{session_id}/next", response_model=schemas.NextComparison)
    def next_comparison(session_id: str):
        session = store.get_session(session_id)
        sample_id = session.next_sample
        if sample_id is None:
            return schemas.NextComparison(done=True, ranked=len(session.submitted))
        labels = sorted(session.labels[sample_id])
        base = f"/sessions/{session_id}/samples/{sample_id}"
        return schemas.NextComparison(
            done=False,
            sample_id=sample_id,
            index=session.sample_order.index(sample_id),
            total=len(session.sample_order),
            original_url=f"{base}/original.png",
            candidates=[
                schemas.Candidate(label=label, image_url=f"{base}/{label}.png")
                for label in labels
            ],
            ranked=len(session.submitted),
        )

    @app.get("/sessions/{session_id}/samples/{sample_id}/original.png")
    def original_image(session_id: str, sample_id: str):
        store.get_session(session_id)
        path = store.corpus.originals.get(sample_id)
        if path is None:
            raise SlidekitError(f"unknown sample {sample_id!r}")
        return FileResponse(path, media_type="image/png")

    @app.get("/sessions/{session_id}/samples/{sample_id}/{label}.png")
    def blinded_image(session_id: str, sample_id: str, label: str):
        path = store.resolve_blind_image(session_id, sample_id, label)
        return FileResponse(path, media_type="image/png")

    @app.post("/sessions/{session_id}/rankings", response_model=schemas.SubmitRankingResponse)
    def submit_ranking(session_id: str, body: schemas.SubmitRankingRequest):
        store.submit_ranking(
            session_id, body.sample_id, body.ranking, idempotency_key=body.idempotency_key
        )
        session = store.get_session(session_id)
        return schemas.SubmitRankingResponse(
            accepted=True,
            ranked=len(session.submitted),
            total=len(session.sample_order),
            done=session.done,
        )

    @app.get("/leaderboard", response_model=schemas.Leaderboard)
    def leaderboard():
        return store.leaderboard()

    if backend is not None:

        @app.post("/derender", response_model=schemas.DerenderResponse)
        def derender(body: schemas.DerenderRequest):
            raster = decode_image(base64.b64decode(body.image_b64))
            detections = None
            if body.detections is not None:
                detections = DetectionSet(
                    boxes=tuple(
                        Detection(
                            cls=d["cls"],
                            bbox=BBox(d["x"], d["y"], d["w"], d["h"]),
                            confidence=float(d.get("conf", 1.0)),
                        )
                        for d in body.detections
                    )
                )
            run = derender_pipeline(
                raster,
                backend,
                start=body.start,
                detections=detections,
                refine_steps=body.refine_steps,
                max_side=body.max_side,
                conf_threshold=body.conf_threshold,
            )
            with tempfile.TemporaryDirectory() as tmp:
                bundle = extract_assets(raster, run.final.doc, tmp, radius=body.inpaint_radius)
                background_b64 = base64.b64encode(
                    (Path(tmp) / bundle.background_file).read_bytes()
                ).decode("ascii")
                assets = [
                    schemas.AssetPayload(
                        filename=name,
                        png_b64=base64.b64encode((Path(tmp) / name).read_bytes()).decode("ascii"),
                    )
                    for name in bundle.asset_files
                ]
            return schemas.DerenderResponse(
                svg=bundle.final_svg,
                passes=run.backend_calls,
                repairs=[r for result in run.results for r in result.repairs_applied],
                background_png_b64=background_b64,
                assets=assets,
            )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(body: schemas.EvaluateRequest):
        gt_doc = parse_slide_svg(body.gt_svg)
        pred_doc = parse_slide_svg(body.pred_svg)
        gt_raster = decode_image(base64.b64decode(body.gt_png_b64))
        pred_raster = decode_image(base64.b64decode(body.pred_png_b64))
        record = evaluate_sample(gt_doc, gt_raster, pred_doc, pred_raster)
        return schemas.EvaluateResponse(
            miou=record.miou, ocr_accuracy=record.ocr_accuracy, mse=record.mse
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/", response_class=HTMLResponse)
        def index():
            index_file = Path(ui_dir) / "index.html"
            if index_file.exists():
                return HTMLResponse(index_file.read_text(encoding="utf-8"))
            return HTMLResponse(_PLACEHOLDER_PAGE)

    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return HTMLResponse(_PLACEHOLDER_PAGE)

    return app
