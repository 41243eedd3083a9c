"""Event ingestion: discovery, bootstrap/incremental replay, self-healing.

Event files are CSVs named ``<repo>.<stream>.<seq>.events.csv`` where stream
is ``bootstrap`` or ``incremental``. A bootstrap file carries a repository's
full history up to its cut point; incremental files carry later windows. The
pipeline registry tracks one row per file so nothing is applied twice, and a
per-repo coverage watermark (the newest event timestamp applied) lets the
pipeline skip events a later bootstrap already covered.

Gap rule: an incremental file whose oldest record is more than
``retention_days`` newer than the last successful run signals that the
source dropped data in between; the repository is quarantined until a fresh
bootstrap heals it.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from .encoding import EPOCH, decode_attrs, encode_attrs, format_ts, parse_ts
from .graph import (
    EdgeType,
    GraphEdge,
    GraphNode,
    GraphStore,
    Mutation,
    NodeId,
    NodeKind,
    UpsertEdge,
    UpsertNode,
)

log = logging.getLogger(__name__)

BOOTSTRAP = "bootstrap"
INCREMENTAL = "incremental"

EVENT_KINDS = (
    "pr_created",
    "pr_updated",
    "pr_state_changed",
    "review_assigned",
    "review_commented",
    "file_changed",
    "wi_created",
    "wi_linked",
    "wi_parented",
    "user_reports_to",
)

# Payload ids each event kind must carry (other keys are optional detail).
REQUIRED_PAYLOAD = {
    "pr_created": ("pr", "author"),
    "pr_updated": ("pr",),
    "pr_state_changed": ("pr", "state"),
    "review_assigned": ("pr", "reviewer"),
    "review_commented": ("pr", "commenter"),
    "file_changed": ("pr", "path"),
    "wi_created": ("wi",),
    "wi_linked": ("wi", "pr"),
    "wi_parented": ("parent", "child"),
    "user_reports_to": ("user", "manager"),
}

EVENT_HEADER = ["event_id", "repo", "event_kind", "timestamp", "payload"]

_SOURCE_EXTS = {".py", ".cs", ".ts", ".js", ".go", ".rs", ".java", ".c", ".cpp", ".h"}
_CONFIG_EXTS = {".json", ".yaml", ".yml", ".toml", ".ini", ".cfg", ".conf", ".xml"}
_PROJECT_EXTS = {".csproj", ".sln", ".vcxproj", ".props", ".targets", ".lock"}


class IngestError(Exception):
    pass


@dataclass
class EventRecord:
    event_id: str
    repo: str
    event_kind: str
    timestamp: datetime
    payload: dict[str, str]


@dataclass
class RegistryEntry:
    file_name: str
    size_bytes: int
    file_timestamp: datetime
    stream_kind: str
    status: str = "discovered"  # discovered -> processing -> completed | failed
    processing_duration_ms: Optional[int] = None
    repos_covered: list[str] = field(default_factory=list)

    @property
    def repo(self) -> str:
        return self.repos_covered[0]


@dataclass
class PipelineState:
    last_successful_run: dict[str, Optional[datetime]] = field(
        default_factory=lambda: {BOOTSTRAP: None, INCREMENTAL: None}
    )
    retention_days: int = 3
    healing_lock: set[str] = field(default_factory=set)
    # Newest event timestamp applied per repo; bootstrap raises it, and
    # incremental events at or below it are already covered.
    coverage: dict[str, datetime] = field(default_factory=dict)


@dataclass
class IngestReport:
    files_processed: int = 0
    events_applied: int = 0
    errors: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    gaps: list[str] = field(default_factory=list)

    def merge(self, other: "IngestReport") -> None:
        self.files_processed += other.files_processed
        self.events_applied += other.events_applied
        self.errors.extend(other.errors)
        self.skipped.extend(other.skipped)
        self.gaps.extend(other.gaps)


# --- event file I/O ----------------------------------------------------------

def write_event_file(path, events: list[EventRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_HEADER)
        for ev in events:
            writer.writerow([
                ev.event_id, ev.repo, ev.event_kind,
                format_ts(ev.timestamp), encode_attrs(ev.payload),
            ])


def read_event_file(path) -> tuple[list[EventRecord], list[str]]:
    """Parse an event CSV; malformed rows are reported, not fatal."""
    events: list[EventRecord] = []
    errors: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENT_HEADER:
            errors.append(f"{Path(path).name}: bad header {header!r}")
            return events, errors
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EVENT_HEADER):
                errors.append(f"{Path(path).name}:{row_no}: expected 5 fields")
                continue
            event_id, repo, kind, ts_text, payload_text = row
            if kind not in EVENT_KINDS:
                errors.append(f"{Path(path).name}:{row_no}: unknown event kind {kind!r}")
                continue
            try:
                ts = parse_ts(ts_text)
            except ValueError:
                errors.append(f"{Path(path).name}:{row_no}: bad timestamp {ts_text!r}")
                continue
            payload = decode_attrs(payload_text)
            missing = [k for k in REQUIRED_PAYLOAD[kind] if not payload.get(k)]
            if missing:
                errors.append(
                    f"{Path(path).name}:{row_no}: {kind} missing payload {missing}"
                )
                continue
            events.append(EventRecord(event_id, repo, kind, ts, payload))
    return events, errors


def load_all_events(event_dir) -> list[EventRecord]:
    """Every event in a directory, deduplicated by id, in chronological order.

    Bootstrap and incremental files overlap after healing; the feed wants
    each event once regardless of how many files carry it.
    """
    by_id: dict[str, EventRecord] = {}
    for path in sorted(Path(event_dir).glob("*.events.csv")):
        try:
            parse_event_file_name(path.name)
        except ValueError:
            continue
        events, _ = read_event_file(path)
        for ev in events:
            by_id.setdefault(ev.event_id, ev)
    return sorted(by_id.values(), key=lambda e: (e.timestamp, e.event_id))


def classify_file_type(path: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in _SOURCE_EXTS:
        return "source"
    if suffix in _CONFIG_EXTS:
        return "configuration"
    if suffix in _PROJECT_EXTS:
        return "project"
    return "other"


# --- event -> graph mutations ------------------------------------------------

def _user(local_id: str) -> NodeId:
    return NodeId(NodeKind.USER, local_id)


def _pr(local_id: str) -> NodeId:
    return NodeId(NodeKind.PULL_REQUEST, local_id)


def _wi(local_id: str) -> NodeId:
    return NodeId(NodeKind.WORK_ITEM, local_id)


def event_to_mutations(ev: EventRecord) -> list[Mutation]:
    """Graph changes implied by one event.

    Artifact nodes carry a ``repo`` attribute so healing can delete a
    repository's content wholesale; ``last_event_at`` tracks recency for the
    feed's active-item ordering.
    """
    ts = format_ts(ev.timestamp)
    p = ev.payload
    kind = ev.event_kind
    muts: list[Mutation] = []

    if kind == "pr_created":
        pr_attrs = {
            "repo": ev.repo, "state": p.get("state", "active"),
            "created_at": ts, "last_event_at": ts,
        }
        for key in ("title", "description", "organization", "project", "url"):
            if p.get(key):
                pr_attrs[key] = p[key]
        muts.append(UpsertNode(GraphNode(NodeId(NodeKind.REPOSITORY, ev.repo), {})))
        author_attrs = {}
        if p.get("name"):
            author_attrs["name"] = p["name"]
        if p.get("job_title"):
            author_attrs["title"] = p["job_title"]
        muts.append(UpsertNode(GraphNode(_user(p["author"]), author_attrs)))
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), pr_attrs)))
        muts.append(UpsertEdge(GraphEdge(_user(p["author"]), _pr(p["pr"]), EdgeType.CREATES, {"ts": ts})))
        muts.append(UpsertEdge(GraphEdge(
            NodeId(NodeKind.REPOSITORY, ev.repo), _pr(p["pr"]), EdgeType.CONTAINS, {"ts": ts})))
    elif kind == "pr_updated":
        attrs = {"repo": ev.repo, "last_event_at": ts}
        for key in ("title", "description"):
            if p.get(key):
                attrs[key] = p[key]
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), attrs)))
    elif kind == "pr_state_changed":
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), {
            "repo": ev.repo, "state": p["state"], "last_event_at": ts})))
    elif kind == "review_assigned":
        muts.append(UpsertNode(GraphNode(_user(p["reviewer"]), {"name": p["name"]} if p.get("name") else {})))
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), {"repo": ev.repo, "last_event_at": ts})))
        muts.append(UpsertEdge(GraphEdge(_user(p["reviewer"]), _pr(p["pr"]), EdgeType.REVIEWS, {"ts": ts})))
    elif kind == "review_commented":
        muts.append(UpsertNode(GraphNode(_user(p["commenter"]), {"name": p["name"]} if p.get("name") else {})))
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), {"repo": ev.repo, "last_event_at": ts})))
        muts.append(UpsertEdge(GraphEdge(_user(p["commenter"]), _pr(p["pr"]), EdgeType.COMMENTS_ON, {"ts": ts})))
    elif kind == "file_changed":
        # File ids are repo-qualified; the same path in two repos is two nodes.
        file_id = NodeId(NodeKind.FILE, f"{ev.repo}:{p['path']}")
        muts.append(UpsertNode(GraphNode(file_id, {
            "repo": ev.repo, "path": p["path"],
            "file_type": p.get("file_type") or classify_file_type(p["path"]),
        })))
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), {"repo": ev.repo, "last_event_at": ts})))
        muts.append(UpsertEdge(GraphEdge(_pr(p["pr"]), file_id, EdgeType.CHANGES, {"ts": ts})))
    elif kind == "wi_created":
        attrs = {
            "repo": ev.repo, "state": p.get("state", "active"),
            "created_at": ts, "last_event_at": ts,
        }
        for key in ("title", "description", "assigned_to", "url"):
            if p.get(key):
                attrs[key] = p[key]
        muts.append(UpsertNode(GraphNode(_wi(p["wi"]), attrs)))
    elif kind == "wi_linked":
        muts.append(UpsertNode(GraphNode(_wi(p["wi"]), {"repo": ev.repo, "last_event_at": ts})))
        muts.append(UpsertNode(GraphNode(_pr(p["pr"]), {"repo": ev.repo, "last_event_at": ts})))
        muts.append(UpsertEdge(GraphEdge(_wi(p["wi"]), _pr(p["pr"]), EdgeType.LINKED_TO, {"ts": ts})))
    elif kind == "wi_parented":
        muts.append(UpsertNode(GraphNode(_wi(p["parent"]), {"repo": ev.repo})))
        muts.append(UpsertNode(GraphNode(_wi(p["child"]), {"repo": ev.repo})))
        muts.append(UpsertEdge(GraphEdge(_wi(p["parent"]), _wi(p["child"]), EdgeType.PARENT_OF, {"ts": ts})))
    elif kind == "user_reports_to":
        user_attrs = {}
        if p.get("name"):
            user_attrs["name"] = p["name"]
        if p.get("job_title"):
            user_attrs["title"] = p["job_title"]
        manager_attrs = {}
        if p.get("manager_name"):
            manager_attrs["name"] = p["manager_name"]
        if p.get("manager_job_title"):
            manager_attrs["title"] = p["manager_job_title"]
        muts.append(UpsertNode(GraphNode(_user(p["user"]), user_attrs)))
        muts.append(UpsertNode(GraphNode(_user(p["manager"]), manager_attrs)))
        muts.append(UpsertEdge(GraphEdge(_user(p["user"]), _user(p["manager"]), EdgeType.REPORTS_TO, {"ts": ts})))
    else:  # pragma: no cover - guarded by read_event_file
        raise IngestError(f"unknown event kind {kind!r}")
    return muts


def replay(events: list[EventRecord], graph: Optional[GraphStore] = None) -> GraphStore:
    """Apply events chronologically to a (fresh) graph; the convergence oracle."""
    graph = graph or GraphStore()
    for ev in sorted(events, key=lambda e: (e.timestamp, e.event_id)):
        for mutation in event_to_mutations(ev):
            graph.apply(mutation)
    return graph


# --- registry ----------------------------------------------------------------

def parse_event_file_name(name: str) -> tuple[str, str, int]:
    """Split <repo>.<stream>[.<seq>].events.csv; raises ValueError if malformed.

    The sequence number is optional and defaults to 0, so a repo's very
    first drop can simply be named repoA.bootstrap.events.csv.
    """
    if not name.endswith(".events.csv"):
        raise ValueError(f"not an event file: {name}")
    stem = name[: -len(".events.csv")]
    parts = stem.split(".")
    if len(parts) == 2:
        parts.append("0")
    if len(parts) != 3:
        raise ValueError(f"malformed event file name: {name}")
    repo, stream, seq_text = parts
    if stream not in (BOOTSTRAP, INCREMENTAL):
        raise ValueError(f"unknown stream kind in file name: {name}")
    if not repo or not seq_text.isdigit():
        raise ValueError(f"malformed event file name: {name}")
    return repo, stream, int(seq_text)


class Registry:
    """Per-file ingestion bookkeeping, persisted as registry.tsv."""

    def __init__(self) -> None:
        self.entries: dict[str, RegistryEntry] = {}

    def save(self, path) -> None:
        lines = []
        for entry in sorted(self.entries.values(), key=lambda e: e.file_name):
            duration = "-" if entry.processing_duration_ms is None else str(entry.processing_duration_ms)
            lines.append(
                f"{entry.file_name}\t{entry.size_bytes}\t{format_ts(entry.file_timestamp)}\t"
                f"{entry.stream_kind}\t{entry.status}\t{duration}\t{','.join(entry.repos_covered)}"
            )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")

    @classmethod
    def load(cls, path) -> "Registry":
        registry = cls()
        path = Path(path)
        if not path.exists():
            return registry
        with open(path, encoding="utf-8", newline="\n") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                name, size, ts, stream, status, duration, repos = line.split("\t")
                registry.entries[name] = RegistryEntry(
                    file_name=name,
                    size_bytes=int(size),
                    file_timestamp=parse_ts(ts),
                    stream_kind=stream,
                    status=status,
                    processing_duration_ms=None if duration == "-" else int(duration),
                    repos_covered=repos.split(",") if repos else [],
                )
        return registry


_STATUS_FLOW = {
    "discovered": {"processing", "discovered"},
    "processing": {"completed", "failed"},
    "completed": {"discovered"},  # heal re-opens a file for re-bootstrap
    "failed": {"discovered"},
}


def _transition(entry: RegistryEntry, status: str) -> None:
    if status not in _STATUS_FLOW[entry.status]:
        raise IngestError(
            f"illegal status transition {entry.status} -> {status} for {entry.file_name}"
        )
    entry.status = status


# --- pipeline state persistence ------------------------------------------------

def save_state(state: PipelineState, path) -> None:
    lines = [f"retention_days\t-\t{state.retention_days}"]
    for stream in (BOOTSTRAP, INCREMENTAL):
        ts = state.last_successful_run.get(stream)
        if ts is not None:
            lines.append(f"last_successful_run\t{stream}\t{format_ts(ts)}")
    for repo in sorted(state.healing_lock):
        lines.append(f"healing_lock\t{repo}\t-")
    for repo in sorted(state.coverage):
        lines.append(f"coverage\t{repo}\t{format_ts(state.coverage[repo])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def load_state(path, retention_days: int = 3) -> PipelineState:
    state = PipelineState(retention_days=retention_days)
    path = Path(path)
    if not path.exists():
        return state
    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            kind, key, value = line.split("\t")
            if kind == "retention_days":
                state.retention_days = int(value)
            elif kind == "last_successful_run":
                state.last_successful_run[key] = parse_ts(value)
            elif kind == "healing_lock":
                state.healing_lock.add(key)
            elif kind == "coverage":
                state.coverage[key] = parse_ts(value)
    return state


# --- gap detection -------------------------------------------------------------

def detect_gap(entry: RegistryEntry, state: PipelineState, event_dir) -> bool:
    """True iff the file's oldest event is more than retention_days newer
    than the newest point the pipeline is known to have covered.

    Pure: reads the file, touches nothing. The reference point is the last
    successful incremental run (falling back to the bootstrap run), advanced
    to the repo's coverage watermark when that is newer, so catching up on a
    backlog of healthy files is not mistaken for a gap.
    """
    if entry.stream_kind != INCREMENTAL:
        raise IngestError(f"detect_gap expects an incremental entry, got {entry.stream_kind}")
    events, _ = read_event_file(Path(event_dir) / entry.file_name)
    if not events:
        return False
    oldest = min(ev.timestamp for ev in events)
    reference = state.last_successful_run.get(INCREMENTAL) or state.last_successful_run.get(BOOTSTRAP)
    coverage = state.coverage.get(entry.repo)
    if coverage is not None and (reference is None or coverage > reference):
        reference = coverage
    if reference is None:
        return False
    return (oldest - reference) > timedelta(days=state.retention_days)


def gap_days(entry: RegistryEntry, state: PipelineState, event_dir) -> Optional[float]:
    """Day difference behind detect_gap, for dry-run reporting."""
    events, _ = read_event_file(Path(event_dir) / entry.file_name)
    if not events:
        return None
    oldest = min(ev.timestamp for ev in events)
    reference = state.last_successful_run.get(INCREMENTAL) or state.last_successful_run.get(BOOTSTRAP)
    coverage = state.coverage.get(entry.repo)
    if coverage is not None and (reference is None or coverage > reference):
        reference = coverage
    if reference is None:
        return None
    return (oldest - reference) / timedelta(days=1)


# --- pipeline -------------------------------------------------------------------

def _now_utc() -> datetime:
    return datetime.now(timezone.utc)


class IngestionPipeline:
    """Drives event files from a directory into the graph store."""

    def __init__(
        self,
        graph: GraphStore,
        registry: Registry,
        state: PipelineState,
        event_dir,
    ) -> None:
        self.graph = graph
        self.registry = registry
        self.state = state
        self.event_dir = Path(event_dir)

    # -- discovery --

    def discover(self) -> list[RegistryEntry]:
        """Register every not-yet-known *.events.csv file as discovered."""
        if not self.event_dir.is_dir():
            raise IngestError(f"event directory not readable: {self.event_dir}")
        new_entries: list[RegistryEntry] = []
        for path in sorted(self.event_dir.glob("*.events.csv")):
            name = path.name
            if name in self.registry.entries:
                continue
            try:
                repo, stream, _ = parse_event_file_name(name)
            except ValueError as exc:
                log.warning("skipping event file: %s", exc)
                continue
            events, _ = read_event_file(path)
            file_ts = min((ev.timestamp for ev in events), default=EPOCH)
            entry = RegistryEntry(
                file_name=name,
                size_bytes=path.stat().st_size,
                file_timestamp=file_ts,
                stream_kind=stream,
                repos_covered=[repo],
            )
            self.registry.entries[name] = entry
            new_entries.append(entry)
        return new_entries

    # -- bootstrap --

    def run_bootstrap(self, repos: list[str], now: Optional[datetime] = None) -> IngestReport:
        now = now or _now_utc()
        report = IngestReport()
        repos = sorted(set(repos))
        entries = sorted(
            (
                e for e in self.registry.entries.values()
                if e.stream_kind == BOOTSTRAP and e.status == "discovered"
                and e.repo in repos
            ),
            key=lambda e: (e.file_timestamp, e.file_name),
        )
        touched = {e.repo for e in entries}
        for repo in repos:
            if repo not in touched and not self._has_completed_bootstrap(repo):
                report.errors.append(f"no bootstrap file registered for repo {repo}")
        for entry in entries:
            self._process_file(entry, report, min_exclusive=None)
        for repo in repos:
            if self._has_completed_bootstrap(repo):
                self.state.healing_lock.discard(repo)
        if not any(e.status == "failed" for e in entries):
            self._advance_clock(BOOTSTRAP, now)
        return report

    def _has_completed_bootstrap(self, repo: str) -> bool:
        entries = [
            e for e in self.registry.entries.values()
            if e.stream_kind == BOOTSTRAP and e.repo == repo
        ]
        return bool(entries) and all(e.status == "completed" for e in entries)

    # -- incremental --

    def run_incremental(self, now: datetime) -> IngestReport:
        report = IngestReport()
        entries = sorted(
            (
                e for e in self.registry.entries.values()
                if e.stream_kind == INCREMENTAL and e.status == "discovered"
            ),
            key=lambda e: (e.file_timestamp, e.file_name),
        )
        for entry in entries:
            repo = entry.repo
            if repo in self.state.healing_lock:
                report.skipped.append(f"{entry.file_name}: repo {repo} is healing")
                continue
            if repo not in self.state.coverage:
                # Events for a repo that was never bootstrapped: treat as a gap.
                self.state.healing_lock.add(repo)
                report.gaps.append(repo)
                report.skipped.append(f"{entry.file_name}: repo {repo} has no bootstrap")
                continue
            coverage = self.state.coverage[repo]
            try:
                events, row_errors = read_event_file(self.event_dir / entry.file_name)
            except OSError as exc:
                _transition(entry, "processing")
                _transition(entry, "failed")
                report.errors.append(f"{entry.file_name}: {exc}")
                continue
            unprocessed = [ev for ev in events if ev.timestamp > coverage]
            if events and not unprocessed:
                # Fully covered by a bootstrap that ran after this file was cut.
                _transition(entry, "processing")
                _transition(entry, "completed")
                entry.processing_duration_ms = 0
                report.skipped.append(f"{entry.file_name}: superseded by bootstrap coverage")
                continue
            if unprocessed and detect_gap(entry, self.state, self.event_dir):
                self.state.healing_lock.add(repo)
                report.gaps.append(repo)
                report.skipped.append(f"{entry.file_name}: data gap detected for repo {repo}")
                continue
            self._process_file(entry, report, min_exclusive=coverage,
                               preread=(events, row_errors))
        if not any(e.status == "failed" for e in entries):
            self._advance_clock(INCREMENTAL, now)
        return report

    # -- healing --

    def heal(self, repos: list[str], now: Optional[datetime] = None) -> IngestReport:
        """Quarantine, wipe, and re-bootstrap the given repositories."""
        now = now or _now_utc()
        report = IngestReport()
        repos = sorted(set(repos))
        for repo in repos:
            self.state.healing_lock.add(repo)
        for repo in repos:
            self._delete_repo_content(repo)
            self.state.coverage.pop(repo, None)
            for entry in self.registry.entries.values():
                if (
                    entry.stream_kind == BOOTSTRAP
                    and entry.repo == repo
                    and entry.status in ("completed", "failed")
                ):
                    _transition(entry, "discovered")
                    entry.processing_duration_ms = None
        report.merge(self.run_bootstrap(repos, now))
        return report

    def _delete_repo_content(self, repo: str) -> None:
        for node in self.graph.nodes():
            if node.id.kind is NodeKind.REPOSITORY and node.id.local_id == repo:
                self.graph.delete_node(node.id)
            elif (
                node.id.kind in (NodeKind.PULL_REQUEST, NodeKind.WORK_ITEM, NodeKind.FILE)
                and node.attributes.get("repo") == repo
            ):
                self.graph.delete_node(node.id)

    # -- shared file processing --

    def _process_file(
        self,
        entry: RegistryEntry,
        report: IngestReport,
        min_exclusive: Optional[datetime],
        preread: Optional[tuple[list[EventRecord], list[str]]] = None,
    ) -> None:
        started = time.perf_counter()
        _transition(entry, "processing")
        try:
            events, row_errors = preread or read_event_file(self.event_dir / entry.file_name)
        except OSError as exc:
            _transition(entry, "failed")
            report.errors.append(f"{entry.file_name}: {exc}")
            return
        report.errors.extend(row_errors)
        applied = 0
        newest: Optional[datetime] = None
        for ev in sorted(events, key=lambda e: (e.timestamp, e.event_id)):
            if ev.repo != entry.repo:
                report.errors.append(
                    f"{entry.file_name}: event {ev.event_id} is for repo {ev.repo!r}, "
                    f"not {entry.repo!r}"
                )
                continue
            if newest is None or ev.timestamp > newest:
                newest = ev.timestamp
            if min_exclusive is not None and ev.timestamp <= min_exclusive:
                continue
            try:
                for mutation in event_to_mutations(ev):
                    self.graph.apply(mutation)
            except Exception as exc:
                report.errors.append(f"{entry.file_name}: event {ev.event_id}: {exc}")
                continue
            applied += 1
        if newest is not None:
            current = self.state.coverage.get(entry.repo)
            if current is None or newest > current:
                self.state.coverage[entry.repo] = newest
        entry.processing_duration_ms = int((time.perf_counter() - started) * 1000)
        _transition(entry, "completed")
        report.files_processed += 1
        report.events_applied += applied

    def _advance_clock(self, stream: str, now: datetime) -> None:
        current = self.state.last_successful_run.get(stream)
        if current is None or now > current:
            self.state.last_successful_run[stream] = now
