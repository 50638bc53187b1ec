"""Local HTTP/JSON API over the simulator core.

Sessions are in-memory, keyed by a content hash of the uploaded trace and
evicted least-recently-used.  Simulation requests never mutate the stored
baseline graph: each runs on its own copy via the transformation pipeline.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .api import Analysis
from .chrome import export_chrome_trace
from .errors import (
    KernsimError,
    MissingConvPairs,
    MissingLayer,
    MissingLayerGradients,
    NoWeightUpdate,
)
from .graph import EdgeKind
from .scenarios import registry
from .transform import TransformPipeline

# Errors meaning "this trace cannot support that scenario" rather than a
# malformed request; surfaced as 422 instead of 400.
_PRECONDITION_ERRORS = (
    MissingConvPairs,
    MissingLayer,
    MissingLayerGradients,
    NoWeightUpdate,
)


class SessionStore:
    """LRU map from session id to a built :class:`Analysis`."""

    def __init__(self, capacity: int = 16):
        self._capacity = capacity
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Analysis] = OrderedDict()

    def put(self, session_id: str, analysis: Analysis) -> None:
        with self._lock:
            self._sessions.pop(session_id, None)
            self._sessions[session_id] = analysis
            while len(self._sessions) > self._capacity:
                self._sessions.popitem(last=False)

    def get(self, session_id: str) -> Analysis | None:
        with self._lock:
            analysis = self._sessions.get(session_id)
            if analysis is not None:
                self._sessions.move_to_end(session_id)
            return analysis


def _error_body(exc: KernsimError) -> dict:
    return {"error": exc.name, "detail": exc.message}


def _graph_stats(analysis: Analysis) -> dict:
    edge_counts = {kind.value: 0 for kind in EdgeKind}
    for _, _, kind in analysis.graph.edges:
        edge_counts[kind.value] += 1
    return {
        "tasks": len(analysis.graph.tasks),
        "events": len(analysis.trace.events),
        "edges": dict(sorted(edge_counts.items())),
        "baseline_makespan_ns": analysis.baseline.makespan,
    }


def create_app(capacity: int = 16) -> FastAPI:
    app = FastAPI(title="kernsim", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(capacity=capacity)

    @app.exception_handler(KernsimError)
    async def _domain_error(_request: Request, exc: KernsimError):
        status = 422 if isinstance(exc, _PRECONDITION_ERRORS) else 400
        return JSONResponse(status_code=status, content=_error_body(exc))

    def _session_or_404(session_id: str) -> Analysis | JSONResponse:
        analysis = store.get(session_id)
        if analysis is None:
            return JSONResponse(
                status_code=404,
                content={"error": "UnknownSession",
                         "detail": f"no session {session_id!r}"})
        return analysis

    def _run_scenario(analysis: Analysis, scenario: str | None,
                      params: dict | None = None):
        """Return (graph, result) for a named scenario or the baseline."""
        if scenario is None:
            return analysis.graph, analysis.baseline
        pipeline = analysis.pipeline_for(scenario, params or {})
        return analysis.run_pipeline(pipeline)

    @app.post("/traces")
    async def upload_trace(request: Request):
        text = (await request.body()).decode("utf-8")
        analysis = Analysis.from_text(text)
        session_id = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
        store.put(session_id, analysis)
        return {"session_id": session_id, "stats": _graph_stats(analysis)}

    @app.get("/scenarios")
    async def scenarios():
        return registry()

    @app.get("/sessions/{session_id}/graph")
    async def session_graph(session_id: str):
        analysis = _session_or_404(session_id)
        if isinstance(analysis, JSONResponse):
            return analysis
        return analysis.graph.to_object()

    @app.get("/sessions/{session_id}/timeline")
    async def session_timeline(session_id: str, scenario: str | None = None):
        analysis = _session_or_404(session_id)
        if isinstance(analysis, JSONResponse):
            return analysis
        graph, result = _run_scenario(analysis, scenario)
        return export_chrome_trace(result, graph)

    @app.get("/sessions/{session_id}/breakdown")
    async def session_breakdown(session_id: str, scenario: str | None = None):
        analysis = _session_or_404(session_id)
        if isinstance(analysis, JSONResponse):
            return analysis
        graph, result = _run_scenario(analysis, scenario)
        from .breakdown import compute_breakdown
        return compute_breakdown(result, graph).to_object()

    @app.post("/sessions/{session_id}/simulate")
    async def session_simulate(session_id: str, request: Request):
        analysis = _session_or_404(session_id)
        if isinstance(analysis, JSONResponse):
            return analysis
        try:
            body = json.loads((await request.body()).decode("utf-8") or "{}")
        except json.JSONDecodeError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "MalformedDocument", "detail": str(exc)})
        if not isinstance(body, dict):
            return JSONResponse(
                status_code=400,
                content={"error": "SchemaViolation",
                         "detail": "body must be an object"})
        if "scenario" in body:
            scenario = body["scenario"]
            pipeline = analysis.pipeline_for(scenario,
                                             body.get("params") or {})
        else:
            scenario = "custom"
            pipeline = TransformPipeline.from_object(body)
        graph, predicted = analysis.run_pipeline(pipeline)
        from .breakdown import compute_breakdown
        from .sim import speedup
        return {
            "scenario": scenario,
            "baseline_makespan_ns": analysis.baseline.makespan,
            "predicted_makespan_ns": predicted.makespan,
            "speedup": speedup(analysis.baseline, predicted),
            "breakdown": compute_breakdown(predicted, graph).to_object(),
            "baseline_breakdown":
                compute_breakdown(analysis.baseline, analysis.graph).to_object(),
            "lane_busy_ns": {
                str(lane): busy
                for lane, busy in sorted(predicted.lane_busy.items(),
                                         key=lambda kv: str(kv[0]))
            },
        }

    return app
