"""Socio-technical graph platform.

A desk-scale system linking developers to the artifacts they work on:
event-driven graph construction with self-healing ingestion, BM25 artifact
and expert indices, graph-proximity re-ranked recommendations, a developer
activity feed, an HTTP service, and a CLI.
"""

__version__ = "0.1.0"

from .graph import (  # noqa: F401
    EdgeType,
    GraphEdge,
    GraphNode,
    GraphStats,
    GraphStore,
    NodeId,
    NodeKind,
)
