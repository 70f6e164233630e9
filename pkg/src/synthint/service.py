"""HTTP/JSON facade over a directory of run artifacts.

Runs are content-addressed: the artifact's content hash is its id, so
re-posting an identical config converges to the same run. Artifacts are
immutable once written; GETs never change state.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import artifact
from .errors import SynthintError
from .pipeline import RunConfig, project_from_doc, run_pipeline

log = logging.getLogger("synthint.service")


class RunStore:
    """Read-mostly view of an artifact directory keyed by content hash."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def load(self, run_id: str) -> dict:
        path = self.root / f"{run_id}.json"
        if not path.exists():
            raise KeyError(run_id)
        return artifact.read_run(path)

    def save(self, doc: dict) -> str:
        run_hash = artifact.content_hash(doc)
        artifact.write_run(doc, self.root / f"{run_hash}.json")
        return run_hash


def create_app(artifact_dir: Path) -> FastAPI:
    store = RunStore(artifact_dir)
    app = FastAPI(title="synthint", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    def get_doc(run_id: str) -> dict:
        try:
            return store.load(run_id)
        except KeyError:
            raise HTTPException(404, f"unknown run id {run_id!r}")

    @app.get("/runs")
    def list_runs() -> list[dict]:
        out = []
        for run_id in store.ids():
            try:
                doc = store.load(run_id)
            except SynthintError:
                log.warning("skipping unreadable artifact %s", run_id)
                continue
            out.append({"id": run_id, "config": doc["config"],
                        "n_units": doc["panel"]["n_units"]})
        return out

    @app.get("/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        return get_doc(run_id)

    @app.get("/runs/{run_id}/counterfactuals")
    def get_counterfactuals(run_id: str, unit: str | None = Query(None)) -> dict:
        doc = get_doc(run_id)
        cf = doc["counterfactuals"]
        if unit is None:
            return {"predicted": cf["predicted"],
                    "observed_post": cf["observed_post"],
                    "day_labels": doc["panel"]["day_labels"],
                    "t0_index": doc["panel"]["t0_index"]}
        if unit not in cf["observed_post"]:
            raise HTTPException(404, f"unknown unit {unit!r}")
        return {
            "unit": unit,
            "assignment": doc["partition"]["assignment"][unit],
            "predicted": cf["predicted"].get(unit, {}),
            "observed_post": cf["observed_post"][unit],
            "top_donors": {
                label: model["top_donors"]
                for label, model in
                doc["diagnostics"]["models"].get(unit, {}).items()
            },
            "day_labels": doc["panel"]["day_labels"],
            "t0_index": doc["panel"]["t0_index"],
        }

    @app.get("/runs/{run_id}/diagnostics")
    def get_diagnostics(run_id: str) -> dict:
        return get_doc(run_id)["diagnostics"]

    @app.get("/runs/{run_id}/projections")
    def get_projections(
        run_id: str,
        unit: str | None = Query(None),
        horizon: int | None = Query(None),
    ) -> dict:
        doc = get_doc(run_id)
        projections = doc["counterfactuals"]["projections"]
        if horizon is not None:
            if horizon < 1:
                raise HTTPException(400, "horizon must be >= 1")
            projections = project_from_doc(doc, horizon)
        if unit is None:
            return projections
        if unit not in projections:
            raise HTTPException(404, f"unknown unit {unit!r}")
        return {unit: projections[unit]}

    @app.post("/runs", status_code=201)
    def post_run(body: dict) -> JSONResponse:
        try:
            config = RunConfig.from_dict(body)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        try:
            doc = run_pipeline(config)
        except SynthintError as exc:
            return JSONResponse(
                status_code=422,
                content={"error": type(exc).__name__, "detail": str(exc)},
            )
        run_id = store.save(doc)
        return JSONResponse(status_code=201, content={"id": run_id})

    return app
