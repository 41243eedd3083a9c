"""BM25 inverted indices over graph content.

Two indices share this machinery: the artifact index (one document per pull
request and work item) and the expert index (one document per developer,
aggregating the text of everything they authored, so term frequency encodes
how often they touch a topic). Scoring uses the BM25 ranking function with
k1=1.2, b=0.75 and the non-negative smoothed idf ln(1 + (N-n+0.5)/(n+0.5)).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .graph import EdgeType, GraphStore, NodeId, NodeKind
from .tokenize import Token, tokenize

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

# Indexable field groups, in ablation order.
FIELD_METADATA = "metadata"
FIELD_TITLE = "title"
FIELD_DESCRIPTION = "description"
ALL_FIELDS = (FIELD_METADATA, FIELD_TITLE, FIELD_DESCRIPTION)

_KIND_TO_DOC_KIND = {
    NodeKind.PULL_REQUEST: "pull_request",
    NodeKind.WORK_ITEM: "work_item",
    NodeKind.USER: "expert",
}


def doc_kind_of(doc_id: str) -> str:
    """Document kind implied by a doc id of the form Kind:local_id."""
    return _KIND_TO_DOC_KIND[NodeId.parse(doc_id).kind]


class ScoredDoc(NamedTuple):
    doc_id: str
    relevance: float


@dataclass
class IndexDocument:
    doc_id: str
    doc_kind: str
    metadata: dict[str, str]
    body: Counter[Token]

    @property
    def length(self) -> int:
        return sum(self.body.values())


@dataclass(frozen=True)
class IndexRecipe:
    """How an index was built, so refresh can rebuild it the same way."""

    kind: str  # "artifact" | "expert"
    fields: tuple[str, ...] = ALL_FIELDS


@dataclass
class InvertedIndex:
    postings: dict[Token, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    doc_count: int
    avgdl: float
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    recipe: Optional[IndexRecipe] = field(default=None, compare=False)

    def idf(self, token: Token) -> float:
        n = len(self.postings.get(token, ()))
        return math.log(1.0 + (self.doc_count - n + 0.5) / (n + 0.5))


def _index_from_documents(
    docs: Iterable[IndexDocument],
    recipe: IndexRecipe,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    postings: dict[Token, dict[str, int]] = {}
    doc_lengths: dict[str, int] = {}
    for doc in docs:
        doc_lengths[doc.doc_id] = doc.length
        for token, tf in doc.body.items():
            postings.setdefault(token, {})[doc.doc_id] = tf
    n = len(doc_lengths)
    avgdl = (sum(doc_lengths.values()) / n) if n else 0.0
    return InvertedIndex(
        postings={t: sorted(by_doc.items()) for t, by_doc in postings.items()},
        doc_lengths=doc_lengths,
        doc_count=n,
        avgdl=avgdl,
        k1=k1,
        b=b,
        recipe=recipe,
    )


def _node_body(attrs: dict[str, str], fields: tuple[str, ...]) -> Counter[Token]:
    body: Counter[Token] = Counter()
    if FIELD_METADATA in fields:
        for key in ("organization", "project", "repo"):
            value = attrs.get(key, "")
            if value:
                body += tokenize(value)
    if FIELD_TITLE in fields:
        body += tokenize(attrs.get("title", ""))
    if FIELD_DESCRIPTION in fields:
        body += tokenize(attrs.get("description", ""))
    return body


def _metadata_of(attrs: dict[str, str]) -> dict[str, str]:
    return {
        "organization": attrs.get("organization", ""),
        "project": attrs.get("project", ""),
        "repository": attrs.get("repo", ""),
    }


def build_artifact_index(
    graph: GraphStore,
    fields: tuple[str, ...] = ALL_FIELDS,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    """One document per pull request and work item node.

    Nodes lacking title and description are still indexed with whatever
    metadata tokens they have; no artifact is dropped.
    """
    docs = []
    for kind in (NodeKind.PULL_REQUEST, NodeKind.WORK_ITEM):
        for node in graph.nodes(kind):
            docs.append(
                IndexDocument(
                    doc_id=str(node.id),
                    doc_kind=_KIND_TO_DOC_KIND[kind],
                    metadata=_metadata_of(node.attributes),
                    body=_node_body(node.attributes, fields),
                )
            )
    return _index_from_documents(docs, IndexRecipe("artifact", fields), k1, b)


def build_expert_index(
    graph: GraphStore,
    fields: tuple[str, ...] = ALL_FIELDS,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    """One document per developer who authored at least one pull request.

    A developer's document is the multiset union of tokens from every pull
    request they created plus the work items linked to those pull requests;
    repeated topics therefore get proportionally higher term frequency.
    """
    docs = []
    for user in graph.nodes(NodeKind.USER):
        body: Counter[Token] = Counter()
        authored = graph.neighbors(user.id, EdgeType.CREATES, "out")
        if not authored:
            continue
        for pr_id, _ in authored:
            pr = graph.get_node(pr_id)
            if pr is None:
                continue
            body += _node_body(pr.attributes, fields)
            for wi_id, _ in graph.neighbors(pr_id, EdgeType.LINKED_TO, "in"):
                wi = graph.get_node(wi_id)
                if wi is not None:
                    body += _node_body(wi.attributes, fields)
        docs.append(
            IndexDocument(
                doc_id=str(user.id),
                doc_kind="expert",
                metadata={},
                body=body,
            )
        )
    return _index_from_documents(docs, IndexRecipe("expert", fields), k1, b)


def refresh(index: InvertedIndex, graph: GraphStore) -> InvertedIndex:
    """Rebuild the index from the current graph with its original recipe."""
    if index.recipe is None:
        raise ValueError("index has no build recipe; rebuild it explicitly")
    builder = build_artifact_index if index.recipe.kind == "artifact" else build_expert_index
    return builder(graph, index.recipe.fields, index.k1, index.b)


def query(
    index: InvertedIndex,
    q: Counter[Token],
    top_n: int,
) -> list[ScoredDoc]:
    """BM25-ranked documents for a token multiset query.

    Documents matching no query token are omitted; ties break by doc_id
    ascending; at most top_n results.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    scores: dict[str, float] = {}
    for token, multiplicity in q.items():
        postings = index.postings.get(token)
        if not postings:
            continue
        idf = index.idf(token)
        for doc_id, tf in postings:
            norm = tf + index.k1 * (
                1.0 - index.b + index.b * index.doc_lengths[doc_id] / index.avgdl
            )
            contribution = idf * tf * (index.k1 + 1.0) / norm
            scores[doc_id] = scores.get(doc_id, 0.0) + multiplicity * contribution
    ranked = sorted(
        (ScoredDoc(doc_id, rel) for doc_id, rel in scores.items() if rel > 0.0),
        key=lambda s: (-s.relevance, s.doc_id),
    )
    return ranked[:top_n]


# --- persistence -----------------------------------------------------------

def save_index(index: InvertedIndex, path) -> None:
    """Serialize to one file: header (N, avgdl, k1, b), then one sorted line
    per token: token TAB arity TAB comma-separated doc_id:tf pairs."""
    lines = [f"{index.doc_count}\t{index.avgdl!r}\t{index.k1!r}\t{index.b!r}"]
    for token in sorted(index.postings, key=lambda t: (t.text, t.arity)):
        pairs = ",".join(f"{doc_id}:{tf}" for doc_id, tf in index.postings[token])
        lines.append(f"{token.text}\t{token.arity}\t{pairs}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def load_index(path) -> InvertedIndex:
    """Inverse of save_index. Doc lengths are recovered from postings, so a
    zero-length document survives only in the doc_count/avgdl header fields."""
    with open(path, encoding="utf-8", newline="\n") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    n_text, avgdl_text, k1_text, b_text = lines[0].split("\t")
    postings: dict[Token, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for line in lines[1:]:
        text, arity, pairs = line.split("\t")
        entry = []
        for pair in pairs.split(","):
            doc_id, _, tf_text = pair.rpartition(":")
            tf = int(tf_text)
            entry.append((doc_id, tf))
            doc_lengths[doc_id] = doc_lengths.get(doc_id, 0) + tf
        postings[Token(text, arity)] = entry
    return InvertedIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        doc_count=int(n_text),
        avgdl=float(avgdl_text),
        k1=float(k1_text),
        b=float(b_text),
    )
