"""HTTP service: ingestion, retrieval, clue edits, and graph documents.

All routes live under /api/v1 and speak JSON; capture logs are accepted as
raw JSONL request bodies. Errors use one envelope: {code, message, detail}
with 400 for validation, 404 for unknown ids, 409 for duplicates, and 502
when the LLM backend is unreachable.

Writes are serialized per resource: the clue store has a single writer and
each graph document has its own lock. Graph documents are persisted with
write-to-temp-then-rename so a crash never leaves a torn file.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import errors as E
from .classify import Classifier, LlmClassifier, LlmClient, MockClassifier
from .config import ServiceConfig
from .graph import (
    InterpretationGraph,
    Node,
    Rect,
    graph_from_json,
    graph_to_json,
    load_graph,
    save_graph,
)
from .ingest import ingest_text
from .model import (
    ELEMENT_GROUP_ORDER,
    clue_to_dict,
    parse_tag,
    tag_to_dict,
)
from .retrieval import (
    RankedResult,
    SortMode,
    TagQuery,
    add_custom_tag,
    edit_keywords,
    recommend_related,
    remove_custom_tag,
    search,
    sort_elements,
)
from .store import ClueStore

HTTP_STATUS: dict[type[E.CluecartError], int] = {
    E.UnknownClue: 404,
    E.UnknownNode: 404,
    E.UnknownEdge: 404,
    E.UnknownGraph: 404,
    E.UnknownTag: 404,
    E.DuplicateClue: 409,
    E.DuplicateTag: 409,
    E.LlmUnavailable: 502,
}


class GraphRepository:
    """Graph documents on disk, one JSON file per graph, atomic replace."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, graph_id: str) -> threading.RLock:
        with self._locks_guard:
            return self._locks.setdefault(graph_id, threading.RLock())

    def _path(self, graph_id: str) -> Path:
        safe = graph_id.replace("/", "_").replace("\\", "_").replace("..", "_")
        return self.directory / f"{safe}.json"

    def exists(self, graph_id: str) -> bool:
        return self._path(graph_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def raw(self, graph_id: str) -> bytes:
        path = self._path(graph_id)
        if not path.exists():
            raise E.UnknownGraph(graph_id)
        return path.read_bytes()

    def load(self, graph_id: str) -> InterpretationGraph:
        return graph_from_json(self.raw(graph_id).decode("utf-8"))

    def store(self, graph: InterpretationGraph) -> str:
        """Persist canonically; returns the exact text written."""
        text = graph_to_json(graph)
        path = self._path(graph.id)
        tmp = path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
        return text

    def mutate(self, graph_id: str, fn):
        """Load-edit-store under the graph's lock; returns fn's result."""
        with self._lock(graph_id):
            graph = self.load(graph_id)
            result = fn(graph)
            self.store(graph)
            return result


def build_classifier(config: ServiceConfig) -> Classifier:
    if config.classifier_mode == "llm":
        client = LlmClient(
            endpoint=config.llm_endpoint or "",
            api_key=config.llm_api_key or "",
            max_inflight=config.max_inflight_llm,
        )
        return LlmClassifier(client)
    return MockClassifier()


def _error_response(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def _require(payload: dict, key: str, kind: type) -> object:
    if key not in payload:
        raise E.CorruptDocument(f"missing field {key!r}")
    value = payload[key]
    if not isinstance(value, kind):
        raise E.CorruptDocument(f"field {key!r} must be {kind.__name__}")
    return value


def _parse_query(tags_param: str | None) -> TagQuery | None:
    if not tags_param:
        return None
    tags = tuple(parse_tag(part) for part in tags_param.split(",") if part.strip())
    return TagQuery(tags) if tags else None


def _results_json(results: list[RankedResult]) -> dict:
    return {
        "results": [
            {
                "clue_id": r.clue_id,
                "score": r.score,
                "matched": [tag_to_dict(t) for t in r.matched],
            }
            for r in results
        ]
    }


def create_app(
    config: ServiceConfig,
    classifier: Classifier | None = None,
    webapp_dir: str | Path | None = None,
) -> FastAPI:
    config.validate()
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    store = ClueStore(data_dir / "clues.jsonl")
    graphs = GraphRepository(data_dir / "graphs")
    clf = classifier if classifier is not None else build_classifier(config)

    app = FastAPI(title="cluecart", version="0.1.0")
    app.state.store = store
    app.state.graphs = graphs
    app.state.classifier = clf

    @app.exception_handler(E.CluecartError)
    async def _cluecart_error(_req: Request, exc: E.CluecartError):
        status = HTTP_STATUS.get(type(exc), 400)
        return _error_response(status, exc.code, type(exc).__name__, str(exc))

    @app.get("/healthz")
    @app.get("/api/v1/healthz")
    def healthz():
        return {"status": "ok", "clues": len(store)}

    # -- captures ---------------------------------------------------------------

    @app.post("/api/v1/captures")
    async def post_captures(request: Request):
        body = (await request.body()).decode("utf-8")
        report = ingest_text(store, body, clf)
        return report.to_dict()

    # -- clues ------------------------------------------------------------------

    @app.get("/api/v1/clues")
    def get_clues(sort: str = "temporal", tags: str | None = None):
        query = _parse_query(tags)
        mode = SortMode.TEMPORAL if sort == "temporal" else SortMode.TAG_RELEVANCE
        if sort not in ("temporal", "relevance"):
            raise E.MissingQuery(f"sort must be temporal or relevance, got {sort!r}")
        grouped = sort_elements(store, mode, query)
        return {
            "groups": [
                {
                    "element": element.value,
                    "label": element.label,
                    "clues": [clue_to_dict(c) for c in clues],
                }
                for element, clues in grouped
            ]
        }

    @app.get("/api/v1/clues/{clue_id}")
    def get_clue(clue_id: str):
        return clue_to_dict(store.get(clue_id))

    @app.patch("/api/v1/clues/{clue_id}/keywords")
    def patch_keywords(clue_id: str, payload: dict = Body(...)):
        keywords = _require(payload, "keywords", list)
        clue = edit_keywords(store, clue_id, [str(k) for k in keywords])
        return clue_to_dict(clue)

    @app.post("/api/v1/clues/{clue_id}/tags")
    def post_tag(clue_id: str, payload: dict = Body(...)):
        label = _require(payload, "label", str)
        return clue_to_dict(add_custom_tag(store, clue_id, str(label)))

    @app.delete("/api/v1/clues/{clue_id}/tags")
    def delete_tag(clue_id: str, label: str):
        return clue_to_dict(remove_custom_tag(store, clue_id, label))

    @app.get("/api/v1/clues/{clue_id}/related")
    def get_related(clue_id: str):
        return _results_json(recommend_related(store, clue_id))

    # -- search -----------------------------------------------------------------

    @app.get("/api/v1/search")
    def get_search(tags: str = ""):
        query = _parse_query(tags)
        if query is None:
            return {"results": []}
        return _results_json(search(store, query))

    # -- graphs -----------------------------------------------------------------

    @app.get("/api/v1/graphs")
    def list_graphs():
        out = []
        for gid in graphs.list_ids():
            doc = json.loads(graphs.raw(gid))
            out.append({"id": doc["id"], "game_name": doc.get("game_name", "")})
        return {"graphs": out}

    @app.post("/api/v1/graphs")
    def create_graph(payload: dict = Body(...)):
        game_name = str(payload.get("game_name", ""))
        graph_id = str(payload.get("id") or f"g-{os.urandom(6).hex()}")
        if graphs.exists(graph_id):
            raise E.DuplicateClue(f"graph {graph_id} already exists")
        graph = InterpretationGraph(graph_id, game_name)
        graphs.store(graph)
        return save_graph(graph)

    @app.get("/api/v1/graphs/{graph_id}")
    def get_graph(graph_id: str):
        return Response(content=graphs.raw(graph_id), media_type="application/json")

    @app.put("/api/v1/graphs/{graph_id}")
    def put_graph(graph_id: str, payload: dict = Body(...)):
        if payload.get("id") != graph_id:
            raise E.CorruptDocument("document id must match the path id")
        graph = load_graph(payload)
        clue_ids = {c.id for c in store.all_clues()}
        problems = graph.audit(clue_ids=clue_ids)
        if problems:
            raise E.CorruptDocument("; ".join(problems))
        with graphs._lock(graph_id):
            text = graphs.store(graph)
        return Response(content=text, media_type="application/json")

    @app.post("/api/v1/graphs/{graph_id}/nodes")
    def post_node(graph_id: str, payload: dict = Body(...)):
        kind = str(_require(payload, "kind", str))
        rect_list = _require(payload, "rect", list)
        if len(rect_list) != 4:
            raise E.CorruptDocument("rect must be [x, y, width, height]")
        rect = Rect(*(float(v) for v in rect_list))

        def add(graph: InterpretationGraph) -> Node:
            node = Node(
                id=str(payload.get("id") or ""),
                kind=kind,
                rect=rect,
                clue_id=payload.get("clue_id"),
                text=payload.get("text"),
                keyword=payload.get("keyword"),
            )
            if not node.id:
                from .graph import _new_id

                node.id = _new_id("n")
            if kind == "clue":
                store.get(str(node.clue_id))  # 404 when the clue is unknown
            if kind == "group":
                node.members = list(payload.get("members", []))
            return graph.add_node(node)

        node = graphs.mutate(graph_id, add)
        from .graph import _node_to_dict

        return _node_to_dict(node)

    @app.post("/api/v1/graphs/{graph_id}/edges")
    def post_edge(graph_id: str, payload: dict = Body(...)):
        from_node = str(_require(payload, "from", str))
        to_node = str(_require(payload, "to", str))
        annotation = payload.get("annotation")

        def add(graph: InterpretationGraph):
            return graph.link(from_node, to_node, annotation)

        edge = graphs.mutate(graph_id, add)
        return {
            "id": edge.id,
            "from": edge.from_node,
            "to": edge.to_node,
            "annotation": edge.annotation,
        }

    @app.post("/api/v1/graphs/{graph_id}/groups")
    def post_group(graph_id: str, payload: dict = Body(...)):
        members = [str(m) for m in _require(payload, "members", list)]
        group_id = payload.get("id")

        def add(graph: InterpretationGraph):
            return graph.group(members, group_id=group_id)

        node = graphs.mutate(graph_id, add)
        from .graph import _node_to_dict

        return _node_to_dict(node)

    @app.post("/api/v1/graphs/{graph_id}/nodes/{node_id}/lookup")
    def post_lookup(graph_id: str, node_id: str, payload: dict = Body(...)):
        keyword = str(_require(payload, "keyword", str))

        def lookup(graph: InterpretationGraph):
            node = graph.nodes.get(node_id)
            if node is None:
                raise E.UnknownNode(node_id)
            if node.kind != "clue":
                raise E.NotAClueNode(f"{node_id} is a {node.kind} node")
            clue = store.get(str(node.clue_id))
            return graph.lookup_keyword(node_id, keyword, clue, clf)

        node = graphs.mutate(graph_id, lookup)
        from .graph import _node_to_dict

        return _node_to_dict(node)

    if webapp_dir is not None and Path(webapp_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(webapp_dir), html=True), name="webapp")

    return app


def run_service(config: ServiceConfig, webapp_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(config, webapp_dir=webapp_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
