"""Artifact and expert recommendations.

Pipeline: tokenize the title+description query, search both BM25 indices for
a candidate pool of 4k, drop candidates below the 75th percentile of the
relevance distribution, re-rank by graph proximity to the requester within
rounded-relevance buckets, and return the top k of each list. The requester's
own pull requests and expert document are excluded.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graph import EdgeType, GraphStore, NodeId, NodeKind
from .index import InvertedIndex, ScoredDoc, doc_kind_of, query as index_query
from .tokenize import tokenize

UNREACHABLE = math.inf
DEFAULT_MAX_DEPTH = 6
DEFAULT_PRECISION = 2  # decimal places for relevance tie bucketing
DEFAULT_POOL_FACTOR = 4

FLAG_EMPTY_QUERY = "empty-query"
FLAG_COLD_REQUESTER = "cold-requester"


@dataclass
class RecommendationQuery:
    title: str
    description: str
    requester: NodeId
    repo_context: Optional[dict[str, str]] = None
    k: int = 10


@dataclass
class RankedResult:
    doc_id: str
    doc_kind: str
    relevance: float
    proximity: Optional[int]
    final_rank: int


@dataclass
class RecommendationResponse:
    artifacts: list[RankedResult]
    experts: list[RankedResult]
    timings: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)


def threshold_filter(scored: list[ScoredDoc]) -> list[ScoredDoc]:
    """Keep items at or above the nearest-rank 75th percentile score.

    With n scores the threshold is the ceil(0.75*n)-th smallest, so the
    maximum always survives and a single-item list passes through.
    """
    if not scored:
        return []
    ascending = sorted(s.relevance for s in scored)
    threshold = ascending[math.ceil(0.75 * len(ascending)) - 1]
    return [s for s in scored if s.relevance >= threshold]


def rerank(
    filtered: list[ScoredDoc],
    requester: NodeId,
    graph: GraphStore,
    max_depth: int = DEFAULT_MAX_DEPTH,
    precision: int = DEFAULT_PRECISION,
) -> list[RankedResult]:
    """Order by rounded relevance desc, then graph proximity asc, then doc_id.

    Relevance dominates across rounding buckets; proximity only breaks ties
    between candidates whose scores round to the same value. A requester with
    no graph presence yields pure relevance order (the caller flags it).
    """
    cold = not graph.has_node(requester)
    entries = []
    for item in filtered:
        proximity: Optional[int] = None
        if not cold:
            target = NodeId.parse(item.doc_id)
            if graph.has_node(target):
                proximity = graph.proximity(requester, target, max_depth)
        entries.append((item, proximity))
    if cold:
        entries.sort(key=lambda e: (-e[0].relevance, e[0].doc_id))
    else:
        entries.sort(
            key=lambda e: (
                -round(e[0].relevance, precision),
                e[1] if e[1] is not None else UNREACHABLE,
                e[0].doc_id,
            )
        )
    return [
        RankedResult(
            doc_id=item.doc_id,
            doc_kind=doc_kind_of(item.doc_id),
            relevance=item.relevance,
            proximity=proximity,
            final_rank=rank,
        )
        for rank, (item, proximity) in enumerate(entries, start=1)
    ]


def _authored_doc_ids(graph: GraphStore, requester: NodeId) -> set[str]:
    if not graph.has_node(requester):
        return set()
    return {
        str(pr_id)
        for pr_id, _ in graph.neighbors(requester, EdgeType.CREATES, "out")
    }


def recommend(
    q: RecommendationQuery,
    artifact_index: InvertedIndex,
    expert_index: InvertedIndex,
    graph: GraphStore,
    pool_factor: int = DEFAULT_POOL_FACTOR,
    precision: int = DEFAULT_PRECISION,
    use_graph: bool = True,
    exclude_doc_ids: Iterable[str] = (),
) -> RecommendationResponse:
    """Run the full recommendation pipeline for one query.

    ``use_graph=False`` skips the proximity re-rank (pure BM25 + threshold),
    which is what the ablation harness compares against. ``exclude_doc_ids``
    removes specific documents from consideration (e.g. the query's own work
    item during evaluation).
    """
    timings: dict[str, float] = {}
    flags: list[str] = []
    excluded = set(exclude_doc_ids)

    t0 = time.perf_counter()
    tokens = tokenize(f"{q.title} {q.description}")
    timings["tokenize_ms"] = (time.perf_counter() - t0) * 1000
    if not tokens:
        return RecommendationResponse([], [], timings, [FLAG_EMPTY_QUERY])

    if not graph.has_node(q.requester):
        flags.append(FLAG_COLD_REQUESTER)
    excluded |= _authored_doc_ids(graph, q.requester)
    excluded.add(str(q.requester))

    pool = max(q.k * pool_factor, q.k)
    t0 = time.perf_counter()
    artifact_pool = [
        s for s in index_query(artifact_index, tokens, pool + len(excluded))
        if s.doc_id not in excluded
    ][:pool]
    timings["artifact_query_ms"] = (time.perf_counter() - t0) * 1000
    t0 = time.perf_counter()
    expert_pool = [
        s for s in index_query(expert_index, tokens, pool + len(excluded))
        if s.doc_id not in excluded
    ][:pool]
    timings["expert_query_ms"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    artifact_kept = threshold_filter(artifact_pool)
    expert_kept = threshold_filter(expert_pool)
    timings["filter_ms"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    if use_graph:
        artifacts = rerank(artifact_kept, q.requester, graph, precision=precision)
        experts = rerank(expert_kept, q.requester, graph, precision=precision)
    else:
        artifacts = [
            RankedResult(s.doc_id, doc_kind_of(s.doc_id), s.relevance, None, i)
            for i, s in enumerate(artifact_kept, start=1)
        ]
        experts = [
            RankedResult(s.doc_id, doc_kind_of(s.doc_id), s.relevance, None, i)
            for i, s in enumerate(expert_kept, start=1)
        ]
    timings["rerank_ms"] = (time.perf_counter() - t0) * 1000

    artifacts = artifacts[: q.k]
    experts = experts[: q.k]
    return RecommendationResponse(artifacts, experts, timings, flags)
