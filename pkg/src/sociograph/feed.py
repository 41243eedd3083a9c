"""Developer-centric homepage: news feed, follows, active items, people.

The feed is derived from the ingested event stream plus the graph. A user's
candidate events are those touching repositories they work in (authored or
review there), plus everything done by their transitive reports (managers
see their org's activity). Three views order the candidates: most_recent is
pure recency, team_only restricts to actors sharing the viewer's manager,
and relevance puts followed items first, then graph-proximity, then recency.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from .graph import EdgeType, GraphNode, GraphStore, NodeId, NodeKind, NotFoundError
from .index import InvertedIndex
from .ingest import EventRecord
from .tokenize import UNIGRAM

REPORT_DEPTH = 2  # how far "their reports' activity" reaches
FEED_VIEWS = ("most_recent", "relevance", "team_only")
INACTIVE_STATES = {"completed", "abandoned"}


class FollowError(ValueError):
    pass


@dataclass
class FeedItem:
    event_id: str
    actor: NodeId
    subject: NodeId
    event_kind: str
    timestamp: datetime
    repo: str
    followed: bool = False


@dataclass
class FollowSet:
    user: NodeId
    followed_items: frozenset[NodeId]


@dataclass
class UserDetails:
    user: NodeId
    name: str
    title: str
    expertise: list[str]


@dataclass
class ActiveItems:
    repositories: list[GraphNode]
    pull_requests: list[GraphNode]
    work_items: list[GraphNode]
    code_reviews: list[GraphNode]


@dataclass
class HomePage:
    user_details: UserDetails
    active: ActiveItems
    feed: list[FeedItem]
    related_people: list[tuple[NodeId, int]]


class FollowStore:
    """Follow sets persisted as follows.tsv (user, item kind, item id)."""

    def __init__(self, path=None) -> None:
        self._path = Path(path) if path else None
        self._follows: dict[str, set[NodeId]] = {}
        self._lock = threading.Lock()
        if self._path and self._path.exists():
            with open(self._path, encoding="utf-8", newline="\n") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    user, kind, local_id = line.split("\t")
                    self._follows.setdefault(user, set()).add(
                        NodeId(NodeKind(kind), local_id)
                    )

    def followed_items(self, user: NodeId) -> frozenset[NodeId]:
        with self._lock:
            return frozenset(self._follows.get(user.local_id, set()))

    def set_follow(self, user: NodeId, item: NodeId, followed: bool, graph: GraphStore) -> FollowSet:
        """Follow or unfollow an item; idempotent; users are not followable."""
        if not graph.has_node(user):
            raise NotFoundError(f"unknown user {user}")
        if not graph.has_node(item):
            raise NotFoundError(f"unknown item {item}")
        if item.kind is NodeKind.USER:
            raise FollowError(f"item kind {item.kind.value} is not followable")
        with self._lock:
            entry = self._follows.setdefault(user.local_id, set())
            if followed:
                entry.add(item)
            else:
                entry.discard(item)
            self._save_locked()
            return FollowSet(user, frozenset(entry))

    def _save_locked(self) -> None:
        if self._path is None:
            return
        lines = sorted(
            f"{user}\t{item.kind.value}\t{item.local_id}"
            for user, items in self._follows.items()
            for item in items
        )
        with open(self._path, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")


def _resolve_feed_entry(
    ev: EventRecord, graph: GraphStore
) -> Optional[tuple[NodeId, NodeId]]:
    """(actor, subject) for a feed-worthy event, None for non-feed events."""
    p = ev.payload
    kind = ev.event_kind
    if kind in ("pr_created", "pr_updated", "pr_state_changed", "file_changed", "wi_linked"):
        subject = NodeId(NodeKind.PULL_REQUEST, p["pr"])
        actor_id = p.get("author") or p.get("actor") or _author_of(graph, subject)
        if actor_id is None:
            return None
        return NodeId(NodeKind.USER, actor_id), subject
    if kind == "review_assigned":
        return NodeId(NodeKind.USER, p["reviewer"]), NodeId(NodeKind.PULL_REQUEST, p["pr"])
    if kind == "review_commented":
        return NodeId(NodeKind.USER, p["commenter"]), NodeId(NodeKind.PULL_REQUEST, p["pr"])
    if kind == "wi_created":
        actor_id = p.get("assigned_to") or p.get("actor")
        if actor_id is None:
            return None
        return NodeId(NodeKind.USER, actor_id), NodeId(NodeKind.WORK_ITEM, p["wi"])
    return None  # wi_parented / user_reports_to are not feed events


def _author_of(graph: GraphStore, pr: NodeId) -> Optional[str]:
    if not graph.has_node(pr):
        return None
    authors = graph.neighbors(pr, EdgeType.CREATES, "in")
    return authors[0][0].local_id if authors else None


class FeedService:
    """Read-side feed, homepage, and people queries over graph + events."""

    def __init__(
        self,
        graph: GraphStore,
        events: list[EventRecord],
        follows: Optional[FollowStore] = None,
    ) -> None:
        self.graph = graph
        self.follows = follows or FollowStore()
        self._items: list[FeedItem] = []
        seen: set[str] = set()
        for ev in sorted(events, key=lambda e: (e.timestamp, e.event_id)):
            if ev.event_id in seen:
                continue
            seen.add(ev.event_id)
            resolved = _resolve_feed_entry(ev, graph)
            if resolved is None:
                continue
            actor, subject = resolved
            self._items.append(FeedItem(
                event_id=ev.event_id, actor=actor, subject=subject,
                event_kind=ev.event_kind, timestamp=ev.timestamp, repo=ev.repo,
            ))

    # -- membership helpers --

    def _require_user(self, user: NodeId) -> None:
        if not self.graph.has_node(user):
            raise NotFoundError(f"unknown user {user}")

    def _user_prs(self, user: NodeId, etype: EdgeType) -> list[NodeId]:
        return [n for n, _ in self.graph.neighbors(user, etype, "out")]

    def _user_repos(self, user: NodeId) -> set[str]:
        """Repos the user works in: home of anything they authored or review."""
        repos = set()
        for etype in (EdgeType.CREATES, EdgeType.REVIEWS):
            for pr_id in self._user_prs(user, etype):
                node = self.graph.get_node(pr_id)
                if node and node.attributes.get("repo"):
                    repos.add(node.attributes["repo"])
        return repos

    def _reports_of(self, user: NodeId, depth: int = REPORT_DEPTH) -> set[NodeId]:
        reports: set[NodeId] = set()
        frontier = {user}
        for _ in range(depth):
            next_frontier: set[NodeId] = set()
            for manager in frontier:
                for report, _ in self.graph.neighbors(manager, EdgeType.REPORTS_TO, "in"):
                    if report not in reports and report != user:
                        reports.add(report)
                        next_frontier.add(report)
            frontier = next_frontier
        return reports

    def _manager_of(self, user: NodeId) -> Optional[NodeId]:
        managers = self.graph.neighbors(user, EdgeType.REPORTS_TO, "out")
        return managers[0][0] if managers else None

    # -- feed --

    def get_feed(self, user: NodeId, view: str = "most_recent", limit: int = 50) -> list[FeedItem]:
        if view not in FEED_VIEWS:
            raise ValueError(f"unknown view {view!r}")
        if limit < 1:
            raise ValueError("limit must be >= 1")
        self._require_user(user)
        repos = self._user_repos(user)
        reports = self._reports_of(user)
        followed = self.follows.followed_items(user)

        candidates = []
        for item in self._items:
            if not (item.repo in repos or item.actor in reports):
                continue
            if not self.graph.has_node(item.subject):
                continue  # healed away
            flag = (
                item.subject in followed
                or NodeId(NodeKind.REPOSITORY, item.repo) in followed
            )
            candidates.append(FeedItem(
                item.event_id, item.actor, item.subject, item.event_kind,
                item.timestamp, item.repo, followed=flag,
            ))

        if view == "team_only":
            my_manager = self._manager_of(user)
            candidates = [
                c for c in candidates
                if my_manager is not None
                and self.graph.has_node(c.actor)
                and self._manager_of(c.actor) == my_manager
            ]

        if view == "relevance":
            def key(c: FeedItem):
                prox = self.graph.proximity(user, c.subject, 6)
                return (
                    not c.followed,
                    prox if prox is not None else float("inf"),
                    -c.timestamp.timestamp(),
                    c.event_id,
                )
            candidates.sort(key=key)
        else:
            candidates.sort(key=lambda c: (-c.timestamp.timestamp(), c.event_id))
        return candidates[:limit]

    # -- follows --

    def set_follow(self, user: NodeId, item: NodeId, followed: bool) -> FollowSet:
        return self.follows.set_follow(user, item, followed, self.graph)

    # -- people --

    def _associations(self, user: NodeId) -> set[NodeId]:
        """Artifacts tying people together: authored/reviewed PRs and the
        work items linked to them."""
        prs = set(self._user_prs(user, EdgeType.CREATES)) | set(
            self._user_prs(user, EdgeType.REVIEWS)
        )
        wis: set[NodeId] = set()
        for pr_id in prs:
            for wi_id, _ in self.graph.neighbors(pr_id, EdgeType.LINKED_TO, "in"):
                wis.add(wi_id)
        return prs | wis

    def related_people(self, user: NodeId) -> list[tuple[NodeId, int]]:
        self._require_user(user)
        mine = self._associations(user)
        if not mine:
            return []
        counts: Counter[NodeId] = Counter()
        for other in self.graph.nodes(NodeKind.USER):
            if other.id == user:
                continue
            shared = len(mine & self._associations(other.id))
            if shared:
                counts[other.id] = shared
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def user_details(self, user: NodeId, expert_index: Optional[InvertedIndex] = None) -> UserDetails:
        self._require_user(user)
        node = self.graph.get_node(user)
        expertise: list[str] = []
        if expert_index is not None:
            doc_id = str(user)
            scored: list[tuple[float, str]] = []
            for token, postings in expert_index.postings.items():
                if token.arity != UNIGRAM:
                    continue
                for posting_doc, tf in postings:
                    if posting_doc == doc_id:
                        scored.append((tf * expert_index.idf(token), token.text))
                        break
            scored.sort(key=lambda pair: (-pair[0], pair[1]))
            expertise = [text for _, text in scored[:5]]
        return UserDetails(
            user=user,
            name=node.attributes.get("name", user.local_id),
            title=node.attributes.get("title", ""),
            expertise=expertise,
        )

    # -- active items --

    def _recency(self, node: GraphNode) -> str:
        return node.attributes.get("last_event_at") or node.attributes.get("created_at", "")

    def active_items(self, user: NodeId) -> ActiveItems:
        self._require_user(user)

        def active_prs(etype: EdgeType) -> list[GraphNode]:
            nodes = []
            for pr_id in self._user_prs(user, etype):
                node = self.graph.get_node(pr_id)
                if node and node.attributes.get("state", "active") not in INACTIVE_STATES:
                    nodes.append(node)
            return nodes

        created = active_prs(EdgeType.CREATES)
        reviews = active_prs(EdgeType.REVIEWS)

        wi_ids: set[NodeId] = set()
        for node in created + reviews:
            for wi_id, _ in self.graph.neighbors(node.id, EdgeType.LINKED_TO, "in"):
                wi_ids.add(wi_id)
        work_items = [self.graph.get_node(w) for w in wi_ids]
        work_items = [w for w in work_items if w is not None]

        repo_names = {
            n.attributes["repo"]
            for n in created + reviews + work_items
            if n.attributes.get("repo")
        }
        repositories = []
        repo_recency: dict[str, str] = {}
        for name in repo_names:
            repo_node = self.graph.get_node(NodeId(NodeKind.REPOSITORY, name))
            if repo_node is None:
                continue
            repositories.append(repo_node)
            repo_recency[name] = max(
                (self._recency(n) for n in created + reviews + work_items
                 if n.attributes.get("repo") == name),
                default="",
            )

        def newest_first(nodes: list[GraphNode]) -> list[GraphNode]:
            return sorted(nodes, key=lambda n: (self._recency(n), n.id), reverse=True)

        repositories.sort(key=lambda n: (repo_recency[n.id.local_id], n.id), reverse=True)
        return ActiveItems(
            repositories=repositories,
            pull_requests=newest_first(created),
            work_items=newest_first(work_items),
            code_reviews=newest_first(reviews),
        )

    # -- homepage --

    def homepage(
        self,
        user: NodeId,
        expert_index: Optional[InvertedIndex] = None,
        feed_view: str = "most_recent",
        feed_limit: int = 25,
    ) -> HomePage:
        return HomePage(
            user_details=self.user_details(user, expert_index),
            active=self.active_items(user),
            feed=self.get_feed(user, feed_view, feed_limit),
            related_people=self.related_people(user),
        )
