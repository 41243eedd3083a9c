"""Top-K accuracy / MRR ablation harness.

Replays the recommendation pipeline over planted-truth queries under
cumulative index configurations (metadata only, plus title, plus
description, plus graph re-ranking) and reports accuracy@K and MRR@K for
each, in the same rows-by-configs, columns-by-K shape used for both the
artifact and expert targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .graph import GraphStore, NodeId, NodeKind
from .index import (
    ALL_FIELDS,
    FIELD_DESCRIPTION,
    FIELD_METADATA,
    FIELD_TITLE,
    build_artifact_index,
    build_expert_index,
)
from .recommend import RecommendationQuery, recommend
from .synth import QueryTruth

CONFIGS = ("metadata_only", "plus_title", "plus_description", "plus_graph")

CONFIG_FIELDS = {
    "metadata_only": (FIELD_METADATA,),
    "plus_title": (FIELD_METADATA, FIELD_TITLE),
    "plus_description": ALL_FIELDS,
    "plus_graph": ALL_FIELDS,
}


class MetricPair(NamedTuple):
    accuracy: float
    mrr: float


@dataclass
class EvalQuery:
    wi_doc_id: str
    repo: str
    topic: int
    title: str
    description: str
    requester: NodeId
    relevant_artifacts: set[str]
    relevant_experts: set[str]


@dataclass
class AblationTable:
    target: str  # "artifact" | "expert"
    configs: list[str]
    ks: list[int]
    cells: dict[tuple[str, int], MetricPair]
    n_queries: int
    warnings: list[str]

    def accuracy(self, config: str, k: int) -> float:
        return self.cells[(config, k)].accuracy

    def mrr(self, config: str, k: int) -> float:
        return self.cells[(config, k)].mrr


def summarize_rankings(
    rankings: Sequence[tuple[Sequence[str], set[str]]],
    ks: Sequence[int],
) -> dict[int, MetricPair]:
    """Accuracy@K and MRR@K over (ranked ids, relevant ids) pairs.

    accuracy@K counts queries with at least one relevant item in the top K;
    MRR@K averages 1/rank of the first relevant item, 0 when it is absent
    from the top K.
    """
    out: dict[int, MetricPair] = {}
    n = len(rankings)
    for k in ks:
        hits = 0
        rr_total = 0.0
        for ranked, relevant in rankings:
            first_rank = None
            for pos, doc_id in enumerate(ranked[:k], start=1):
                if doc_id in relevant:
                    first_rank = pos
                    break
            if first_rank is not None:
                hits += 1
                rr_total += 1.0 / first_rank
        out[k] = MetricPair(hits / n if n else 0.0, rr_total / n if n else 0.0)
    return out


def queries_from_truth(
    graph: GraphStore,
    truth_rows: Sequence[QueryTruth],
    expert_truth: dict[int, list[str]],
) -> list[EvalQuery]:
    """Materialize eval queries: work-item text from the graph, requester =
    the planted owner, relevant experts = the topic's devs minus the owner."""
    queries = []
    for row in truth_rows:
        node = graph.get_node(NodeId.parse(row.wi_doc_id))
        if node is None:
            continue
        owner = NodeId(NodeKind.USER, row.owner)
        experts = {
            f"User:{dev}" for dev in expert_truth.get(row.topic, []) if dev != row.owner
        }
        queries.append(EvalQuery(
            wi_doc_id=row.wi_doc_id,
            repo=row.repo,
            topic=row.topic,
            title=node.attributes.get("title", ""),
            description=node.attributes.get("description", ""),
            requester=owner,
            relevant_artifacts=set(row.linked_pr_doc_ids),
            relevant_experts=experts,
        ))
    return queries


def sample_queries(queries: list[EvalQuery], limit: Optional[int]) -> list[EvalQuery]:
    """Deterministic sample interleaving repositories round-robin, so every
    repository keeps contributing queries while the limit allows."""
    if limit is None or limit >= len(queries):
        return list(queries)
    by_repo: dict[str, list[EvalQuery]] = {}
    for q in sorted(queries, key=lambda q: q.wi_doc_id):
        by_repo.setdefault(q.repo, []).append(q)
    picked: list[EvalQuery] = []
    pools = [by_repo[repo] for repo in sorted(by_repo)]
    i = 0
    while len(picked) < limit and any(pools):
        pool = pools[i % len(pools)]
        if pool:
            picked.append(pool.pop(0))
        i += 1
    return picked


def evaluate(
    graph: GraphStore,
    queries: Sequence[EvalQuery],
    configs: Sequence[str] = CONFIGS,
    ks: Sequence[int] = (3, 5, 10),
    max_queries: Optional[int] = None,
) -> dict[str, AblationTable]:
    """Run the ablation; returns tables keyed by target ("artifact", "expert")."""
    for config in configs:
        if config not in CONFIG_FIELDS:
            raise ValueError(f"unknown config {config!r}")
    chosen = sample_queries(list(queries), max_queries)
    ks = sorted(ks)
    depth = max(ks)
    tables: dict[str, AblationTable] = {
        target: AblationTable(target, list(configs), list(ks), {}, len(chosen), [])
        for target in ("artifact", "expert")
    }
    for config in configs:
        fields = CONFIG_FIELDS[config]
        artifact_index = build_artifact_index(graph, fields)
        expert_index = build_expert_index(graph, fields)
        if not artifact_index.postings or not expert_index.postings:
            for target in tables:
                tables[target].warnings.append(f"{config}: empty index, zero row")
                for k in ks:
                    tables[target].cells[(config, k)] = MetricPair(0.0, 0.0)
            continue
        artifact_rankings: list[tuple[list[str], set[str]]] = []
        expert_rankings: list[tuple[list[str], set[str]]] = []
        for q in chosen:
            response = recommend(
                RecommendationQuery(q.title, q.description, q.requester, k=depth),
                artifact_index,
                expert_index,
                graph,
                use_graph=(config == "plus_graph"),
                exclude_doc_ids={q.wi_doc_id},
            )
            artifact_rankings.append(
                ([r.doc_id for r in response.artifacts], q.relevant_artifacts)
            )
            expert_rankings.append(
                ([r.doc_id for r in response.experts], q.relevant_experts)
            )
        for target, rankings in (("artifact", artifact_rankings), ("expert", expert_rankings)):
            for k, pair in summarize_rankings(rankings, ks).items():
                tables[target].cells[(config, k)] = pair
    return tables
