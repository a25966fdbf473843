"""HTTP facade binding the engine modules.

Single-process deployment: file-backed stores under a data directory
(``GENFLOW_DATA_DIR``), long operations as polled jobs on a bounded
worker pool.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response

from .agents import SimSite, orchestrate
from .catalog import builtin_catalog
from .config import Config
from .embedding import make_embedder
from .errors import (
    EmbedderUnavailable,
    EmptyQueryAfterCleaning,
    GenFlowError,
    MalformedDocument,
    SchemaViolation,
)
from .executor import execute
from .graph import parse_workflow, serialize_workflow, validate
from .images import ImageBuffer, encode_pnm
from .index import VectorIndex
from .ingest import RawDocument, ingest_record
from .pilot import FallbackSignal, PilotQuery, pilot_search
from .registry import AssetRegistry, CacheFetcher, install
from .resolver import SimulatedRemote, format_timing_table, timed_resolve_and_install


class EngineState:
    """All persistent stores plus the job table."""

    def __init__(self, data_dir: str | Path, config: Config | None = None):
        self.config = config or Config.load()
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.catalog = builtin_catalog()
        self.embedder = make_embedder(self.config)
        dimension = self.config.get_int("embed.dimension")
        self.index = VectorIndex.open_or_create(self.data_dir / "index.gfix", dimension)
        self.registry = AssetRegistry(self.data_dir / "registry.jsonl")
        self.cache = CacheFetcher(self.data_dir / "cache")
        self.workflows_dir = self.data_dir / "workflows"
        self.workflows_dir.mkdir(exist_ok=True)
        self.artifacts_dir = self.data_dir / "artifacts"
        self.artifacts_dir.mkdir(exist_ok=True)
        self.gallery_path = self.data_dir / "gallery.json"
        self.jobs: dict[str, dict] = {}
        self.pool = ThreadPoolExecutor(max_workers=self.config.get_int("jobs.workers"))
        self.lock = threading.RLock()
        # Exploration fallback: a SimSite (fixture web) plus a log of
        # exploration runs, so tests can observe trace presence/absence.
        self.site: SimSite | None = None
        self.exploration_log: list[dict] = []

    # -- workflows --------------------------------------------------------

    def store_workflow(self, document: bytes) -> str:
        workflow = parse_workflow(document)
        path = self.workflows_dir / f"{workflow.id}.flow.json"
        path.write_bytes(serialize_workflow(workflow))
        ingest_record(
            RawDocument(
                workflow_id=workflow.id,
                description=workflow.description,
                likes=workflow.likes,
                source=str(path),
                name=workflow.name,
            ),
            self.embedder,
            self.index,
            stopwords_path=self.config.get("ingest.stopwords_path"),
        )
        self.index.save()
        return workflow.id

    def load_workflow_document(self, workflow_id: str) -> bytes | None:
        path = self.workflows_dir / f"{workflow_id}.flow.json"
        return path.read_bytes() if path.exists() else None

    # -- gallery & artifacts ----------------------------------------------

    def gallery(self) -> list[dict]:
        if self.gallery_path.exists():
            return json.loads(self.gallery_path.read_text(encoding="utf-8"))
        return []

    def add_gallery_entries(self, entries: list[dict]) -> None:
        with self.lock:
            items = self.gallery()
            items.extend(entries)
            self.gallery_path.write_text(json.dumps(items, indent=2), encoding="utf-8")

    def store_artifact(self, name: str, data: bytes) -> str:
        (self.artifacts_dir / name).write_bytes(data)
        return name

    # -- jobs ---------------------------------------------------------------

    def create_job(self, kind: str) -> dict:
        job = {
            "id": uuid.uuid4().hex,
            "kind": kind,
            "state": "queued",
            "result": None,
            "error": None,
            "created": time.time(),
            "updated": time.time(),
        }
        with self.lock:
            self.jobs[job["id"]] = job
        return job

    def update_job(self, job_id: str, **fields) -> None:
        with self.lock:
            self.jobs[job_id].update(fields, updated=time.time())


def _artifact_media_type(name: str) -> str:
    if name.endswith(".pgm"):
        return "image/x-portable-graymap"
    if name.endswith(".ppm"):
        return "image/x-portable-pixmap"
    return "text/plain"


def _run_execute_job(state: EngineState, job_id: str, document: bytes) -> None:
    state.update_job(job_id, state="running")
    try:
        workflow = parse_workflow(document)
        workspace = state.data_dir / "workspaces" / job_id
        workspace.mkdir(parents=True, exist_ok=True)
        result = execute(workflow, state.catalog, workspace)

        consumed: set[tuple[str, str]] = set()
        for node in workflow.nodes:
            consumed.update(node.inputs.values())
        artifacts: list[dict] = []
        gallery_entries: list[dict] = []
        for nid in result.order:
            run = result.runs[nid]
            for port, value in run.outputs.items():
                if (nid, port) in consumed:
                    continue
                if isinstance(value, ImageBuffer):
                    ext = "pgm" if value.channels == 1 else "ppm"
                    name = f"{job_id}_{nid}_{port}.{ext}"
                    state.store_artifact(name, encode_pnm(value))
                elif isinstance(value, str):
                    name = f"{job_id}_{nid}_{port}.txt"
                    state.store_artifact(name, value.encode("utf-8"))
                else:
                    continue
                artifact = {
                    "artifact_id": name,
                    "workflow_id": workflow.id,
                    "node": nid,
                    "port": port,
                }
                artifacts.append(artifact)
                if isinstance(value, ImageBuffer):
                    gallery_entries.append(artifact)
        if gallery_entries:
            state.add_gallery_entries(gallery_entries)
        timings = {nid: result.runs[nid].elapsed_ms for nid in result.order}
        state.update_job(
            job_id,
            state="done",
            result={"artifacts": artifacts, "node_timings_ms": timings},
        )
    except GenFlowError as exc:
        state.update_job(job_id, state="failed", error=str(exc))
    except Exception as exc:  # defensive: jobs must never wedge in "running"
        state.update_job(job_id, state="failed", error=f"internal: {exc}")


def _run_resolve_job(
    state: EngineState, job_id: str, document: bytes, mode: str, do_install: bool
) -> None:
    state.update_job(job_id, state="running")
    try:
        workflow = parse_workflow(document)
        remote = None
        if mode == "remote":
            latency = state.config.get_float("fetch.simulated.latency_ms")
            assets = dict(state.site.assets) if state.site else {}
            remote = SimulatedRemote(assets, latency_ms=latency)
        report, samples, statuses = timed_resolve_and_install(
            workflow,
            mode,
            catalog=state.catalog,
            registry=state.registry,
            root=state.data_dir,
            cache=state.cache,
            remote=remote,
            do_install=do_install,
        )
        state.update_job(
            job_id,
            state="done",
            result={
                "report": report.to_json(),
                "samples": [
                    {"operation": s.operation, "mode": s.mode, "elapsed_ms": s.elapsed_ms}
                    for s in samples
                ],
                "installed": [s.descriptor.name for s in statuses if s.installed],
                "errors": [s.error for s in statuses if s.error],
            },
        )
    except GenFlowError as exc:
        state.update_job(job_id, state="failed", error=str(exc))
    except Exception as exc:
        state.update_job(job_id, state="failed", error=f"internal: {exc}")


def create_app(state: EngineState | None = None) -> FastAPI:
    if state is None:
        state = EngineState(os.environ.get("GENFLOW_DATA_DIR", "./genflow-data"))
    app = FastAPI(title="genflow")
    app.state.engine = state

    @app.post("/api/pilot/search")
    def pilot_search_endpoint(body: dict):
        query = (body or {}).get("query", "")
        if not isinstance(query, str) or not query.strip():
            raise HTTPException(400, "query must be a non-empty string")
        k = int(body.get("k", state.config.get_int("pilot.k")))
        explored = False

        def run_search():
            return pilot_search(
                PilotQuery(query, k),
                state.index,
                state.embedder,
                sim_threshold=state.config.get_float("search.threshold"),
                alpha=state.config.get_float("pilot.alpha"),
                stopwords_path=state.config.get("ingest.stopwords_path"),
            )

        try:
            outcome = run_search()
        except EmptyQueryAfterCleaning:
            raise HTTPException(400, "query is empty after cleaning")
        except EmbedderUnavailable as exc:
            raise HTTPException(503, f"embedder unavailable: {exc}")

        if isinstance(outcome, FallbackSignal):
            if state.site is None:
                raise HTTPException(404, "no matching workflows")
            exploration = orchestrate(
                outcome.clean_query,
                state.site,
                budget=20,
                catalog=state.catalog,
                registry=state.registry,
                cache=state.cache,
                root=state.data_dir,
            )
            state.exploration_log.append(
                {"query": query, "success": exploration.success, "trace": exploration.trace}
            )
            if not exploration.success:
                raise HTTPException(404, f"exploration failed: {exploration.failure_reason}")
            explored = True
            state.store_workflow(exploration.workflow_doc)
            if exploration.captured:
                install(exploration.captured, state.cache, state.data_dir, state.registry)
            outcome = run_search()
            if isinstance(outcome, FallbackSignal):
                raise HTTPException(404, "no matching workflows after exploration")

        return {"results": [r.to_json() for r in outcome], "explored": explored}

    @app.get("/api/workflows")
    def list_workflows():
        items = []
        for record in state.index.records():
            items.append(
                {
                    "workflow_id": record.workflow_id,
                    "name": record.name,
                    "likes": record.likes,
                    "source": record.source,
                }
            )
        return {"workflows": items}

    @app.post("/api/workflows")
    def create_workflow(body: dict):
        try:
            workflow_id = state.store_workflow(json.dumps(body).encode("utf-8"))
        except (MalformedDocument, SchemaViolation) as exc:
            raise HTTPException(422, str(exc))
        return {"workflow_id": workflow_id}

    @app.get("/api/workflows/{workflow_id}")
    def get_workflow(workflow_id: str):
        document = state.load_workflow_document(workflow_id)
        if document is None:
            raise HTTPException(404, "unknown workflow")
        return json.loads(document)

    @app.post("/api/execute")
    def execute_endpoint(body: dict):
        document = _document_from_body(state, body)
        try:
            workflow = parse_workflow(document)
        except (MalformedDocument, SchemaViolation) as exc:
            raise HTTPException(422, str(exc))
        report = validate(workflow, state.catalog)
        blocking = [f for f in report.findings if f.code != "UNKNOWN_TYPE"]
        if blocking:
            raise HTTPException(
                422,
                detail={
                    "findings": [
                        {"code": f.code, "node": f.node_id, "detail": f.detail}
                        for f in blocking
                    ]
                },
            )
        job = state.create_job("execute")
        state.pool.submit(_run_execute_job, state, job["id"], document)
        return {"job_id": job["id"]}

    @app.post("/api/resolve")
    def resolve_endpoint(body: dict):
        document = _document_from_body(state, body)
        mode = body.get("mode", "local")
        if mode not in ("local", "remote"):
            raise HTTPException(400, "mode must be 'local' or 'remote'")
        do_install = bool(body.get("install", True))
        job = state.create_job("resolve_install")
        state.pool.submit(_run_resolve_job, state, job["id"], document, mode, do_install)
        return {"job_id": job["id"]}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        with state.lock:
            job = state.jobs.get(job_id)
            if job is None:
                raise HTTPException(404, "unknown job")
            return dict(job)

    @app.get("/api/artifacts/{artifact_id}")
    def get_artifact(artifact_id: str):
        path = state.artifacts_dir / Path(artifact_id).name
        if not path.exists():
            raise HTTPException(404, "unknown artifact")
        return Response(path.read_bytes(), media_type=_artifact_media_type(artifact_id))

    @app.get("/api/nodes")
    def get_nodes():
        return {"nodes": state.catalog.describe()}

    @app.get("/api/gallery")
    def get_gallery():
        return {"gallery": state.gallery()}

    return app


def _document_from_body(state: EngineState, body: dict) -> bytes:
    if "workflow" in (body or {}):
        return json.dumps(body["workflow"]).encode("utf-8")
    if "id" in (body or {}):
        document = state.load_workflow_document(body["id"])
        if document is None:
            raise HTTPException(404, "unknown workflow id")
        return document
    raise HTTPException(400, "body must carry 'workflow' or 'id'")


__all__ = ["EngineState", "create_app", "format_timing_table"]
