"""Interpretation graph: the persistent canvas document.

Nodes are clue references, free text notes, groups (clusters of other
nodes), or context nodes holding a keyword's real-world meaning. Edges are
directed and may carry a textual annotation; parallel edges between the
same pair are allowed since two distinct narrative relations can hold at
once.

Documents serialize to a single canonical JSON object (schema_version 1,
nodes and edges sorted by id) so saved graphs diff cleanly and round-trip
exactly.
"""

from __future__ import annotations

import json
import logging
import uuid
from dataclasses import dataclass, field

from .errors import (
    CorruptDocument,
    CycleDetected,
    KeywordNotOnClue,
    NotAClueNode,
    SchemaMismatch,
    SelfLoop,
    UnknownEdge,
    UnknownNode,
    ZeroSizeRect,
)
from .model import Clue, Tag

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
GROUP_MARGIN = 16.0
CONTEXT_NODE_GAP = 24.0
CONTEXT_NODE_SIZE = (200.0, 120.0)
LOOKUP_WORD_CAP = 20


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    width: float
    height: float

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ZeroSizeRect(f"rect needs positive size, got {self.width}x{self.height}")

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.width, self.height)


NODE_KINDS = ("clue", "text", "group", "context")


@dataclass
class Node:
    id: str
    kind: str
    rect: Rect
    clue_id: str | None = None  # clue nodes
    text: str | None = None  # text and context nodes
    members: list[str] = field(default_factory=list)  # group nodes
    keyword: str | None = None  # context nodes


@dataclass
class Edge:
    id: str
    from_node: str
    to_node: str
    annotation: str | None = None


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class InterpretationGraph:
    """Single-writer canvas document; reads may share a snapshot."""

    def __init__(self, graph_id: str, game_name: str):
        self.id = graph_id
        self.game_name = game_name
        self.nodes: dict[str, Node] = {}
        self.edges: dict[str, Edge] = {}

    # -- node operations -------------------------------------------------------

    def add_node(self, node: Node) -> Node:
        if node.kind not in NODE_KINDS:
            raise CorruptDocument(f"unknown node kind: {node.kind!r}")
        node.rect.validate()
        if node.id in self.nodes:
            raise CorruptDocument(f"duplicate node id: {node.id}")
        if node.kind == "group":
            for m in node.members:
                if m not in self.nodes and m != node.id:
                    raise UnknownNode(m)
            self.nodes[node.id] = node
            try:
                self._check_group_dag()
            except CycleDetected:
                del self.nodes[node.id]
                raise
        else:
            self.nodes[node.id] = node
        return node

    def remove_node(self, node_id: str) -> None:
        """Cascades: incident edges go, and groups drop the id from members."""
        if node_id not in self.nodes:
            raise UnknownNode(node_id)
        del self.nodes[node_id]
        self.edges = {
            eid: e
            for eid, e in self.edges.items()
            if e.from_node != node_id and e.to_node != node_id
        }
        for node in self.nodes.values():
            if node.kind == "group" and node_id in node.members:
                node.members = [m for m in node.members if m != node_id]

    def move_resize(self, node_id: str, rect: Rect) -> Node:
        """Set a node's rect; moving a group translates every member with it."""
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(node_id)
        rect.validate()
        if node.kind == "group":
            dx, dy = rect.x - node.rect.x, rect.y - node.rect.y
            if dx or dy:
                for mid in self._transitive_members(node_id):
                    member = self.nodes[mid]
                    member.rect = member.rect.translated(dx, dy)
        node.rect = rect
        return node

    def _transitive_members(self, group_id: str) -> set[str]:
        out: set[str] = set()
        stack = list(self.nodes[group_id].members)
        while stack:
            mid = stack.pop()
            if mid in out or mid not in self.nodes:
                continue
            out.add(mid)
            member = self.nodes[mid]
            if member.kind == "group":
                stack.extend(member.members)
        return out

    # -- edges -------------------------------------------------------------------

    def link(self, from_node: str, to_node: str, annotation: str | None = None,
             edge_id: str | None = None) -> Edge:
        if from_node not in self.nodes:
            raise UnknownNode(from_node)
        if to_node not in self.nodes:
            raise UnknownNode(to_node)
        if from_node == to_node:
            raise SelfLoop(from_node)
        edge = Edge(edge_id or _new_id("e"), from_node, to_node, annotation)
        if edge.id in self.edges:
            raise CorruptDocument(f"duplicate edge id: {edge.id}")
        self.edges[edge.id] = edge
        return edge

    def annotate_edge(self, edge_id: str, text: str) -> Edge:
        edge = self.edges.get(edge_id)
        if edge is None:
            raise UnknownEdge(edge_id)
        edge.annotation = text
        return edge

    # -- clue node projections ----------------------------------------------------

    def expand_node(self, node_id: str, clue: Clue) -> tuple[list[str], list[Tag]]:
        """Keywords and tags of the clue a node references; read-only."""
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(node_id)
        if node.kind != "clue":
            raise NotAClueNode(f"{node_id} is a {node.kind} node")
        return list(clue.keywords), list(clue.tags)

    def lookup_keyword(self, node_id: str, keyword: str, clue: Clue, classifier) -> Node:
        """Fetch the keyword's real-world meaning and drop it in a new node.

        The context node lands just right of the source node. The returned
        text is stored verbatim; replies past the 20-word cap only log.
        """
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(node_id)
        if node.kind != "clue":
            raise NotAClueNode(f"{node_id} is a {node.kind} node")
        if not clue.has_keyword(keyword):
            raise KeywordNotOnClue(f"{keyword!r} is not a keyword of clue {clue.id}")
        text = classifier.lookup(keyword, self.game_name)
        if len(text.split()) > LOOKUP_WORD_CAP:
            logger.warning(
                "lookup reply for %r is %d words (cap %d)",
                keyword, len(text.split()), LOOKUP_WORD_CAP,
            )
        ctx = Node(
            id=_new_id("n"),
            kind="context",
            rect=Rect(
                node.rect.x + node.rect.width + CONTEXT_NODE_GAP,
                node.rect.y,
                CONTEXT_NODE_SIZE[0],
                CONTEXT_NODE_SIZE[1],
            ),
            keyword=keyword,
            text=text,
        )
        return self.add_node(ctx)

    # -- groups --------------------------------------------------------------------

    def group(self, member_ids: list[str], group_id: str | None = None) -> Node:
        """Wrap members in a group node sized to their bounding box."""
        if not member_ids:
            raise UnknownNode("group needs at least one member")
        gid = group_id or _new_id("g")
        for m in member_ids:
            if m == gid:
                raise CycleDetected(f"group {gid} cannot contain itself")
            if m not in self.nodes:
                raise UnknownNode(m)
        rects = [self.nodes[m].rect for m in member_ids]
        x0 = min(r.x for r in rects) - GROUP_MARGIN
        y0 = min(r.y for r in rects) - GROUP_MARGIN
        x1 = max(r.x + r.width for r in rects) + GROUP_MARGIN
        y1 = max(r.y + r.height for r in rects) + GROUP_MARGIN
        node = Node(
            id=gid,
            kind="group",
            rect=Rect(x0, y0, x1 - x0, y1 - y0),
            members=list(member_ids),
        )
        return self.add_node(node)

    def ungroup(self, group_id: str) -> None:
        """Delete the group node only; members survive untouched."""
        node = self.nodes.get(group_id)
        if node is None:
            raise UnknownNode(group_id)
        if node.kind != "group":
            raise UnknownNode(f"{group_id} is not a group")
        self.remove_node(group_id)

    def _check_group_dag(self) -> None:
        # Colors: 0 unvisited, 1 in progress, 2 done.
        color: dict[str, int] = {}

        def visit(nid: str) -> None:
            state = color.get(nid, 0)
            if state == 1:
                raise CycleDetected(f"group membership cycle through {nid}")
            if state == 2:
                return
            color[nid] = 1
            node = self.nodes.get(nid)
            if node is not None and node.kind == "group":
                for m in node.members:
                    visit(m)
            color[nid] = 2

        for nid, node in self.nodes.items():
            if node.kind == "group":
                visit(nid)

    # -- integrity -------------------------------------------------------------------

    def audit(self, clue_ids: set[str] | None = None) -> list[str]:
        """Full-document integrity check; empty list means healthy."""
        problems: list[str] = []
        for nid, node in self.nodes.items():
            if nid != node.id:
                problems.append(f"node map key {nid} != node id {node.id}")
            if node.kind not in NODE_KINDS:
                problems.append(f"node {nid}: unknown kind {node.kind!r}")
            if node.rect.width <= 0 or node.rect.height <= 0:
                problems.append(f"node {nid}: non-positive rect")
            if node.kind == "clue":
                if not node.clue_id:
                    problems.append(f"node {nid}: clue node without clue_id")
                elif clue_ids is not None and node.clue_id not in clue_ids:
                    problems.append(f"node {nid}: dangling clue {node.clue_id}")
            if node.kind == "group":
                for m in node.members:
                    if m not in self.nodes:
                        problems.append(f"group {nid}: missing member {m}")
        for eid, edge in self.edges.items():
            if eid != edge.id:
                problems.append(f"edge map key {eid} != edge id {edge.id}")
            if edge.from_node not in self.nodes:
                problems.append(f"edge {eid}: missing endpoint {edge.from_node}")
            if edge.to_node not in self.nodes:
                problems.append(f"edge {eid}: missing endpoint {edge.to_node}")
            if edge.from_node == edge.to_node:
                problems.append(f"edge {eid}: self loop")
        try:
            self._check_group_dag()
        except CycleDetected as exc:
            problems.append(str(exc))
        return problems

    def equals(self, other: "InterpretationGraph") -> bool:
        return save_graph(self) == save_graph(other)


# -- persistence ---------------------------------------------------------------------

def _node_to_dict(node: Node) -> dict:
    d: dict = {
        "id": node.id,
        "kind": node.kind,
        "rect": [node.rect.x, node.rect.y, node.rect.width, node.rect.height],
    }
    if node.kind == "clue":
        d["clue_id"] = node.clue_id
    elif node.kind == "text":
        d["text"] = node.text or ""
    elif node.kind == "group":
        d["members"] = list(node.members)
    elif node.kind == "context":
        d["keyword"] = node.keyword
        d["text"] = node.text or ""
    return d


def _node_from_dict(d: dict) -> Node:
    rect = d["rect"]
    return Node(
        id=d["id"],
        kind=d["kind"],
        rect=Rect(float(rect[0]), float(rect[1]), float(rect[2]), float(rect[3])),
        clue_id=d.get("clue_id"),
        text=d.get("text"),
        members=list(d.get("members", [])),
        keyword=d.get("keyword"),
    )


def save_graph(graph: InterpretationGraph) -> dict:
    """Canonical document: fixed key order, nodes and edges sorted by id."""
    return {
        "schema_version": SCHEMA_VERSION,
        "id": graph.id,
        "game_name": graph.game_name,
        "nodes": [_node_to_dict(graph.nodes[k]) for k in sorted(graph.nodes)],
        "edges": [
            {
                "id": e.id,
                "from": e.from_node,
                "to": e.to_node,
                "annotation": e.annotation,
            }
            for e in (graph.edges[k] for k in sorted(graph.edges))
        ],
    }


def graph_to_json(graph: InterpretationGraph) -> str:
    return json.dumps(save_graph(graph), ensure_ascii=False, indent=2) + "\n"


def load_graph(document: dict) -> InterpretationGraph:
    """Inverse of save_graph; validates schema and referential integrity."""
    if not isinstance(document, dict):
        raise CorruptDocument("graph document must be a JSON object")
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(f"unsupported schema_version: {version!r}")
    try:
        graph = InterpretationGraph(document["id"], document.get("game_name", ""))
        for nd in document["nodes"]:
            node = _node_from_dict(nd)
            node.rect.validate()
            if node.kind not in NODE_KINDS:
                raise CorruptDocument(f"unknown node kind: {node.kind!r}")
            if node.id in graph.nodes:
                raise CorruptDocument(f"duplicate node id: {node.id}")
            graph.nodes[node.id] = node
        for ed in document["edges"]:
            edge = Edge(
                id=ed["id"],
                from_node=ed["from"],
                to_node=ed["to"],
                annotation=ed.get("annotation"),
            )
            if edge.id in graph.edges:
                raise CorruptDocument(f"duplicate edge id: {edge.id}")
            graph.edges[edge.id] = edge
    except (KeyError, TypeError, IndexError, ValueError, ZeroSizeRect) as exc:
        raise CorruptDocument(f"bad graph document: {exc}") from exc
    problems = graph.audit()
    if problems:
        raise CorruptDocument("; ".join(problems))
    return graph


def graph_from_json(text: str) -> InterpretationGraph:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptDocument(f"not valid JSON: {exc}") from exc
    return load_graph(document)
