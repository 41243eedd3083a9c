"""HTTP facade over the library with asynchronous telemetry capture.

Endpoints: GET /health, POST /recommend, GET /feed/{user}, POST /follow,
GET /homepage/{user}, POST /click. JSON in and out; errors are
``{"error": <code>, "message": <text>}``. Telemetry records flow through a
bounded queue to an append-only NDJSON file so the request path never waits
on the sink; a stalled or failing sink costs records, not latency.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .encoding import format_ts
from .feed import FeedItem, FeedService, FollowError, FEED_VIEWS
from .graph import GraphNode, GraphStore, NodeId, NodeKind, NotFoundError
from .index import InvertedIndex
from .recommend import RankedResult, RecommendationQuery, recommend

log = logging.getLogger(__name__)

_STOP = object()


class TelemetryLogger:
    """Append-only NDJSON sink fed by a bounded queue and a worker thread.

    ``log`` never blocks: when the queue is full the record is dropped and
    counted. Sink failures are logged and swallowed so they cannot surface
    in a response.
    """

    def __init__(
        self,
        path=None,
        writer: Optional[Callable[[str], None]] = None,
        maxsize: int = 10000,
    ) -> None:
        if writer is None and path is None:
            raise ValueError("need a path or a writer")
        self._path = path
        self._writer = writer or self._append_to_file
        self._queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self.dropped = 0
        self._thread = threading.Thread(target=self._drain, daemon=True)
        self._thread.start()

    def _append_to_file(self, line: str) -> None:
        with open(self._path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(line)
            fh.write("\n")

    def log(self, record: dict) -> bool:
        try:
            self._queue.put_nowait(json.dumps(record, sort_keys=True))
            return True
        except queue.Full:
            self.dropped += 1
            return False

    def _drain(self) -> None:
        while True:
            item = self._queue.get()
            if item is _STOP:
                self._queue.task_done()
                return
            try:
                self._writer(item)
            except Exception:
                log.exception("telemetry sink failure; record dropped")
            finally:
                self._queue.task_done()

    def flush(self) -> None:
        self._queue.join()

    def close(self) -> None:
        self._queue.put(_STOP)
        self._thread.join(timeout=10)


@dataclass
class ServiceState:
    graph: GraphStore
    artifact_index: InvertedIndex
    expert_index: InvertedIndex
    feed: FeedService
    telemetry: TelemetryLogger
    k_default: int = 10


class RecommendIn(BaseModel):
    title: str = ""
    description: str = ""
    requester: str = Field(min_length=1)
    k: Optional[int] = Field(default=None, ge=1)


class FollowIn(BaseModel):
    user: str = Field(min_length=1)
    item: str = Field(min_length=1)
    followed: bool = True


class ClickIn(BaseModel):
    request_id: str = Field(min_length=1)
    doc_id: str = Field(min_length=1)


def _ranked_json(r: RankedResult) -> dict:
    return {
        "doc_id": r.doc_id,
        "doc_kind": r.doc_kind,
        "relevance": r.relevance,
        "proximity": r.proximity,
        "final_rank": r.final_rank,
    }


def _feed_json(item: FeedItem) -> dict:
    return {
        "event_id": item.event_id,
        "actor": str(item.actor),
        "subject": str(item.subject),
        "event_kind": item.event_kind,
        "timestamp": format_ts(item.timestamp),
        "repo": item.repo,
        "followed": item.followed,
    }


def _node_json(node: GraphNode) -> dict:
    attrs = node.attributes
    return {
        "id": str(node.id),
        "title": attrs.get("title", attrs.get("name", node.id.local_id)),
        "state": attrs.get("state", ""),
        "repo": attrs.get("repo", node.id.local_id if node.id.kind is NodeKind.REPOSITORY else ""),
        "last_event_at": attrs.get("last_event_at", ""),
        "url": attrs.get("url", ""),
    }


def _parse_item_id(text: str) -> NodeId:
    try:
        return NodeId.parse(text)
    except ValueError as exc:
        raise HTTPException(400, str(exc)) from exc


def create_app(state: ServiceState, ui_dir=None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.telemetry.close()

    app = FastAPI(title="sociograph", lifespan=lifespan)

    @app.exception_handler(HTTPException)
    async def http_error(_req: Request, exc: HTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": exc.status_code, "message": str(exc.detail)},
        )

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "nodes": state.graph.stats().total_nodes,
            "docs": state.artifact_index.doc_count,
            "experts": state.expert_index.doc_count,
        }

    @app.post("/recommend")
    def recommend_endpoint(body: RecommendIn):
        started = time.perf_counter()
        query = RecommendationQuery(
            title=body.title,
            description=body.description,
            requester=NodeId(NodeKind.USER, body.requester),
            k=body.k or state.k_default,
        )
        response = recommend(
            query, state.artifact_index, state.expert_index, state.graph
        )
        request_id = uuid.uuid4().hex
        elapsed_ms = (time.perf_counter() - started) * 1000
        state.telemetry.log({
            "type": "search",
            "request_id": request_id,
            "timestamp": format_ts(datetime.now(timezone.utc)),
            "query": f"{body.title} {body.description}".strip(),
            "user": body.requester,
            "results": [r.doc_id for r in response.artifacts]
            + [r.doc_id for r in response.experts],
            "clicked": None,
            "response_time_ms": elapsed_ms,
        })
        return {
            "request_id": request_id,
            "artifacts": [_ranked_json(r) for r in response.artifacts],
            "experts": [_ranked_json(r) for r in response.experts],
            "flags": response.flags,
            "timings": response.timings,
        }

    @app.post("/click")
    def click(body: ClickIn):
        state.telemetry.log({
            "type": "click",
            "request_id": body.request_id,
            "timestamp": format_ts(datetime.now(timezone.utc)),
            "clicked": body.doc_id,
        })
        return {"status": "ok"}

    @app.get("/feed/{user}")
    def feed(user: str, view: str = "most_recent", limit: int = 50):
        if view not in FEED_VIEWS:
            raise HTTPException(400, f"unknown view {view!r}")
        if limit < 1:
            raise HTTPException(400, "limit must be >= 1")
        try:
            items = state.feed.get_feed(NodeId(NodeKind.USER, user), view, limit)
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        return {"user": user, "view": view, "items": [_feed_json(i) for i in items]}

    @app.post("/follow")
    def follow(body: FollowIn):
        item = _parse_item_id(body.item)
        try:
            follow_set = state.feed.set_follow(
                NodeId(NodeKind.USER, body.user), item, body.followed
            )
        except FollowError as exc:
            raise HTTPException(400, str(exc)) from exc
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        return {
            "user": body.user,
            "followed_items": sorted(str(i) for i in follow_set.followed_items),
        }

    @app.get("/homepage/{user}")
    def homepage(user: str):
        try:
            page = state.feed.homepage(
                NodeId(NodeKind.USER, user), state.expert_index
            )
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        details = page.user_details
        return {
            "user_details": {
                "user": str(details.user),
                "name": details.name,
                "title": details.title,
                "expertise": details.expertise,
            },
            "active_repositories": [_node_json(n) for n in page.active.repositories],
            "active_pull_requests": [_node_json(n) for n in page.active.pull_requests],
            "active_work_items": [_node_json(n) for n in page.active.work_items],
            "active_code_reviews": [_node_json(n) for n in page.active.code_reviews],
            "feed": [_feed_json(i) for i in page.feed],
            "related_people": [
                {
                    "user": str(node_id),
                    "name": state.feed.user_details(node_id).name,
                    "shared_count": count,
                }
                for node_id, count in page.related_people
            ],
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def build_state(workspace) -> ServiceState:
    """Load everything the service needs from a data directory."""
    graph = workspace.load_graph()
    artifact_index, expert_index = workspace.load_indices()
    feed = workspace.load_feed(graph)
    telemetry = TelemetryLogger(path=workspace.telemetry_path)
    return ServiceState(
        graph=graph,
        artifact_index=artifact_index,
        expert_index=expert_index,
        feed=feed,
        telemetry=telemetry,
        k_default=workspace.k_default,
    )


def serve(workspace, ui_dir=None) -> None:
    """Blocking entry point used by the CLI ``serve`` subcommand."""
    import uvicorn

    missing = [
        p for p in (workspace.nodes_path, workspace.artifact_index_path,
                    workspace.expert_index_path)
        if not p.exists()
    ]
    if missing:
        names = ", ".join(str(p) for p in missing)
        raise FileNotFoundError(f"missing data files: {names} (run ingest/index first)")
    state = build_state(workspace)
    app = create_app(state, ui_dir=ui_dir)
    uvicorn.run(app, host=workspace.host, port=workspace.port, log_level="warning")
