"""Typed property graph over development activity.

Nodes are people and artifacts (users, pull requests, work items, files,
repositories); edges carry the relationship type and are constrained to the
endpoint kinds listed in ``EDGE_ENDPOINTS``. The store is the read side for
traversal queries (neighbors, shortest-path proximity) and the single write
side for ingestion mutations.

Concurrency: any number of readers may run concurrently; mutations take an
exclusive lock and block readers for their duration.
"""

from __future__ import annotations

import threading
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

from .encoding import decode_attrs, encode_attrs


class NodeKind(str, Enum):
    USER = "User"
    PULL_REQUEST = "PullRequest"
    WORK_ITEM = "WorkItem"
    FILE = "File"
    REPOSITORY = "Repository"


class EdgeType(str, Enum):
    CREATES = "creates"
    REVIEWS = "reviews"
    CHANGES = "changes"
    CONTAINS = "contains"
    LINKED_TO = "linked_to"
    PARENT_OF = "parent_of"
    COMMENTS_ON = "comments_on"
    REPORTS_TO = "reports_to"


# (source kind, destination kind) allowed for each edge type.
EDGE_ENDPOINTS: dict[EdgeType, tuple[NodeKind, NodeKind]] = {
    EdgeType.CREATES: (NodeKind.USER, NodeKind.PULL_REQUEST),
    EdgeType.REVIEWS: (NodeKind.USER, NodeKind.PULL_REQUEST),
    EdgeType.CHANGES: (NodeKind.PULL_REQUEST, NodeKind.FILE),
    EdgeType.CONTAINS: (NodeKind.REPOSITORY, NodeKind.PULL_REQUEST),
    EdgeType.LINKED_TO: (NodeKind.WORK_ITEM, NodeKind.PULL_REQUEST),
    EdgeType.PARENT_OF: (NodeKind.WORK_ITEM, NodeKind.WORK_ITEM),
    EdgeType.COMMENTS_ON: (NodeKind.USER, NodeKind.PULL_REQUEST),
    EdgeType.REPORTS_TO: (NodeKind.USER, NodeKind.USER),
}

FILE_TYPES = ("source", "configuration", "project", "other")


class GraphError(Exception):
    """Base class for graph store errors."""


class SchemaError(GraphError):
    """Edge endpoints are illegal for the edge type."""


class NotFoundError(GraphError):
    """A referenced node does not exist."""


@dataclass(frozen=True, order=True)
class NodeId:
    kind: NodeKind
    local_id: str

    def __post_init__(self) -> None:
        if not self.local_id:
            raise ValueError("local_id must be non-empty")

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.local_id}"

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        kind, sep, local_id = text.partition(":")
        if not sep or not local_id:
            raise ValueError(f"malformed node id {text!r}")
        return cls(NodeKind(kind), local_id)


@dataclass
class GraphNode:
    id: NodeId
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass
class GraphEdge:
    src: NodeId
    dst: NodeId
    etype: EdgeType
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass
class GraphStats:
    node_count_by_kind: dict[NodeKind, int]
    edge_count_by_type: dict[EdgeType, int]

    @property
    def total_nodes(self) -> int:
        return sum(self.node_count_by_kind.values())

    @property
    def total_edges(self) -> int:
        return sum(self.edge_count_by_type.values())


# --- Mutations -------------------------------------------------------------

@dataclass
class UpsertNode:
    node: GraphNode


@dataclass
class UpsertEdge:
    edge: GraphEdge


@dataclass
class DeleteNode:
    id: NodeId


@dataclass
class DeleteEdge:
    src: NodeId
    dst: NodeId
    etype: EdgeType


Mutation = Union[UpsertNode, UpsertEdge, DeleteNode, DeleteEdge]

APPLIED = "applied"
NO_OP = "no_op"


class _RWLock:
    """Multiple concurrent readers or one exclusive writer."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False

    def acquire_read(self) -> None:
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            while self._writing or self._readers:
                self._cond.wait()
            self._writing = True

    def release_write(self) -> None:
        with self._cond:
            self._writing = False
            self._cond.notify_all()


class _ReadGuard:
    def __init__(self, lock: _RWLock) -> None:
        self._lock = lock

    def __enter__(self) -> None:
        self._lock.acquire_read()

    def __exit__(self, *exc) -> None:
        self._lock.release_read()


class _WriteGuard:
    def __init__(self, lock: _RWLock) -> None:
        self._lock = lock

    def __enter__(self) -> None:
        self._lock.acquire_write()

    def __exit__(self, *exc) -> None:
        self._lock.release_write()


class GraphStore:
    """In-memory adjacency-list property graph with TSV persistence."""

    def __init__(self) -> None:
        self._lock = _RWLock()
        self._nodes: dict[NodeId, dict[str, str]] = {}
        self._edges: dict[tuple[NodeId, NodeId, EdgeType], dict[str, str]] = {}
        self._out: dict[NodeId, set[tuple[NodeId, EdgeType]]] = {}
        self._in: dict[NodeId, set[tuple[NodeId, EdgeType]]] = {}

    # --- mutations ---------------------------------------------------------

    def apply(self, mutation: Mutation) -> str:
        """Apply one mutation; returns APPLIED or NO_OP."""
        if isinstance(mutation, UpsertNode):
            return self.upsert_node(mutation.node)
        if isinstance(mutation, UpsertEdge):
            return self.upsert_edge(mutation.edge)
        if isinstance(mutation, DeleteNode):
            return self.delete_node(mutation.id)
        if isinstance(mutation, DeleteEdge):
            return self.delete_edge(mutation.src, mutation.dst, mutation.etype)
        raise TypeError(f"unknown mutation {mutation!r}")

    def upsert_node(self, node: GraphNode) -> str:
        with _WriteGuard(self._lock):
            return self._upsert_node(node.id, node.attributes)

    def _upsert_node(self, node_id: NodeId, attributes: dict[str, str]) -> str:
        existing = self._nodes.get(node_id)
        if existing is None:
            self._nodes[node_id] = dict(attributes)
            self._out.setdefault(node_id, set())
            self._in.setdefault(node_id, set())
            return APPLIED
        # Merge attribute updates, last writer wins per key.
        changed = False
        for key, value in attributes.items():
            if existing.get(key) != value:
                existing[key] = value
                changed = True
        return APPLIED if changed else NO_OP

    def upsert_edge(self, edge: GraphEdge) -> str:
        src_kind, dst_kind = EDGE_ENDPOINTS[edge.etype]
        if edge.src.kind is not src_kind or edge.dst.kind is not dst_kind:
            raise SchemaError(
                f"illegal endpoints for edge ({edge.src}, {edge.dst}, {edge.etype.value}): "
                f"expected {src_kind.value} -> {dst_kind.value}"
            )
        with _WriteGuard(self._lock):
            # Endpoints may arrive after the edge; create them with no attributes.
            for endpoint in (edge.src, edge.dst):
                if endpoint not in self._nodes:
                    self._upsert_node(endpoint, {})
            key = (edge.src, edge.dst, edge.etype)
            existing = self._edges.get(key)
            if existing is None:
                self._edges[key] = dict(edge.attributes)
                self._out[edge.src].add((edge.dst, edge.etype))
                self._in[edge.dst].add((edge.src, edge.etype))
                return APPLIED
            changed = False
            for k, v in edge.attributes.items():
                if existing.get(k) != v:
                    existing[k] = v
                    changed = True
            return APPLIED if changed else NO_OP

    def delete_node(self, node_id: NodeId) -> str:
        with _WriteGuard(self._lock):
            if node_id not in self._nodes:
                return NO_OP
            for other, etype in list(self._out.get(node_id, ())):
                del self._edges[(node_id, other, etype)]
                self._in[other].discard((node_id, etype))
            for other, etype in list(self._in.get(node_id, ())):
                del self._edges[(other, node_id, etype)]
                self._out[other].discard((node_id, etype))
            self._out.pop(node_id, None)
            self._in.pop(node_id, None)
            del self._nodes[node_id]
            return APPLIED

    def delete_edge(self, src: NodeId, dst: NodeId, etype: EdgeType) -> str:
        with _WriteGuard(self._lock):
            key = (src, dst, etype)
            if key not in self._edges:
                return NO_OP
            del self._edges[key]
            self._out[src].discard((dst, etype))
            self._in[dst].discard((src, etype))
            return APPLIED

    # --- queries -----------------------------------------------------------

    def has_node(self, node_id: NodeId) -> bool:
        with _ReadGuard(self._lock):
            return node_id in self._nodes

    def get_node(self, node_id: NodeId) -> Optional[GraphNode]:
        with _ReadGuard(self._lock):
            attrs = self._nodes.get(node_id)
            if attrs is None:
                return None
            return GraphNode(node_id, dict(attrs))

    def nodes(self, kind: Optional[NodeKind] = None) -> list[GraphNode]:
        with _ReadGuard(self._lock):
            ids = sorted(
                i for i in self._nodes if kind is None or i.kind is kind
            )
            return [GraphNode(i, dict(self._nodes[i])) for i in ids]

    def edges(self) -> list[GraphEdge]:
        with _ReadGuard(self._lock):
            keys = sorted(self._edges, key=lambda k: (k[0], k[2].value, k[1]))
            return [GraphEdge(s, d, t, dict(self._edges[(s, d, t)])) for s, d, t in keys]

    def neighbors(
        self,
        node_id: NodeId,
        etype: Optional[EdgeType] = None,
        direction: str = "both",
    ) -> list[tuple[NodeId, EdgeType]]:
        """Incident edges of a node as (other endpoint, edge type) pairs."""
        if direction not in ("out", "in", "both"):
            raise ValueError(f"bad direction {direction!r}")
        with _ReadGuard(self._lock):
            if node_id not in self._nodes:
                raise NotFoundError(f"unknown node {node_id}")
            found: list[tuple[NodeId, EdgeType]] = []
            if direction in ("out", "both"):
                found.extend(self._out.get(node_id, ()))
            if direction in ("in", "both"):
                found.extend(self._in.get(node_id, ()))
            if etype is not None:
                found = [(n, t) for n, t in found if t is etype]
            found.sort(key=lambda item: (item[0], item[1].value))
            return found

    def proximity(self, a: NodeId, b: NodeId, max_depth: int = 6) -> Optional[int]:
        """Undirected shortest-path length between two nodes.

        Returns None when no path of length <= max_depth exists.
        """
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        with _ReadGuard(self._lock):
            for node in (a, b):
                if node not in self._nodes:
                    raise NotFoundError(f"unknown node {node}")
            if a == b:
                return 0
            seen = {a}
            frontier = deque([(a, 0)])
            while frontier:
                current, dist = frontier.popleft()
                if dist == max_depth:
                    continue
                for other, _ in self._out.get(current, set()) | self._in.get(current, set()):
                    if other == b:
                        return dist + 1
                    if other not in seen:
                        seen.add(other)
                        frontier.append((other, dist + 1))
            return None

    def stats(self) -> GraphStats:
        with _ReadGuard(self._lock):
            node_counts = Counter(i.kind for i in self._nodes)
            edge_counts = Counter(key[2] for key in self._edges)
        return GraphStats(
            node_count_by_kind={k: node_counts.get(k, 0) for k in NodeKind},
            edge_count_by_type={t: edge_counts.get(t, 0) for t in EdgeType},
        )

    def snapshot(self) -> tuple[frozenset, frozenset]:
        """Content fingerprint for set-equality comparisons."""
        with _ReadGuard(self._lock):
            nodes = frozenset(
                (i.kind.value, i.local_id, tuple(sorted(attrs.items())))
                for i, attrs in self._nodes.items()
            )
            edges = frozenset(
                (s.kind.value, s.local_id, t.value, d.kind.value, d.local_id,
                 tuple(sorted(attrs.items())))
                for (s, d, t), attrs in self._edges.items()
            )
        return nodes, edges

    # --- persistence ---------------------------------------------------------

    def save(self, nodes_path, edges_path) -> None:
        """Write nodes.tsv / edges.tsv (sorted lines, LF, UTF-8)."""
        with _ReadGuard(self._lock):
            node_lines = sorted(
                f"{i.kind.value}\t{i.local_id}\t{encode_attrs(attrs)}"
                for i, attrs in self._nodes.items()
            )
            edge_lines = sorted(
                f"{s.kind.value}\t{s.local_id}\t{t.value}\t{d.kind.value}\t{d.local_id}\t"
                f"{encode_attrs(attrs)}"
                for (s, d, t), attrs in self._edges.items()
            )
        _write_sorted(nodes_path, node_lines)
        _write_sorted(edges_path, edge_lines)

    @classmethod
    def load(cls, nodes_path, edges_path) -> "GraphStore":
        store = cls()
        with open(nodes_path, encoding="utf-8", newline="\n") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                kind, local_id, attrs = line.split("\t")
                store.upsert_node(
                    GraphNode(NodeId(NodeKind(kind), local_id), decode_attrs(attrs))
                )
        with open(edges_path, encoding="utf-8", newline="\n") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                sk, sid, et, dk, did, attrs = line.split("\t")
                store.upsert_edge(
                    GraphEdge(
                        NodeId(NodeKind(sk), sid),
                        NodeId(NodeKind(dk), did),
                        EdgeType(et),
                        decode_attrs(attrs),
                    )
                )
        return store


def _write_sorted(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
