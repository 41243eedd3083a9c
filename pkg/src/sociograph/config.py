"""Configuration file parsing and data-directory layout.

The config file is flat ``key=value`` lines (# comments allowed), shared by
the CLI and the HTTP service. All relative paths resolve against the data
directory, which also fixes where every artifact of the system lives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .feed import FeedService, FollowStore
from .graph import GraphStore
from .index import InvertedIndex, load_index, save_index
from .ingest import (
    IngestionPipeline,
    PipelineState,
    Registry,
    load_all_events,
    load_state,
    save_state,
)

DEFAULTS = {
    "port": "8765",
    "host": "127.0.0.1",
    "k": "10",
    "retention_days": "3",
    "event_dir": "events",
}


def parse_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{line_no}: expected key=value, got {raw.rstrip()!r}")
            values[key.strip()] = value.strip()
    return values


@dataclass
class Workspace:
    """Paths and loaders for one data directory."""

    data_dir: Path
    config: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.data_dir = Path(self.data_dir)
        merged = dict(DEFAULTS)
        merged.update(self.config)
        self.config = merged

    @property
    def event_dir(self) -> Path:
        return self.data_dir / self.config["event_dir"]

    @property
    def truth_dir(self) -> Path:
        return self.data_dir / "truth"

    @property
    def reports_dir(self) -> Path:
        return self.data_dir / "reports"

    @property
    def nodes_path(self) -> Path:
        return self.data_dir / "nodes.tsv"

    @property
    def edges_path(self) -> Path:
        return self.data_dir / "edges.tsv"

    @property
    def registry_path(self) -> Path:
        return self.data_dir / "registry.tsv"

    @property
    def state_path(self) -> Path:
        return self.data_dir / "pipeline_state.tsv"

    @property
    def artifact_index_path(self) -> Path:
        return self.data_dir / "index.artifact.tsv"

    @property
    def expert_index_path(self) -> Path:
        return self.data_dir / "index.expert.tsv"

    @property
    def follows_path(self) -> Path:
        return self.data_dir / "follows.tsv"

    @property
    def telemetry_path(self) -> Path:
        return self.data_dir / "telemetry.ndjson"

    @property
    def port(self) -> int:
        return int(self.config["port"])

    @property
    def host(self) -> str:
        return self.config["host"]

    @property
    def k_default(self) -> int:
        return int(self.config["k"])

    @property
    def retention_days(self) -> int:
        return int(self.config["retention_days"])

    def ensure_dirs(self) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.event_dir.mkdir(parents=True, exist_ok=True)

    # -- graph --

    def load_graph(self) -> GraphStore:
        if not self.nodes_path.exists():
            return GraphStore()
        return GraphStore.load(self.nodes_path, self.edges_path)

    def save_graph(self, graph: GraphStore) -> None:
        graph.save(self.nodes_path, self.edges_path)

    # -- ingestion --

    def load_pipeline(self, graph: Optional[GraphStore] = None) -> IngestionPipeline:
        graph = graph if graph is not None else self.load_graph()
        registry = Registry.load(self.registry_path)
        state = load_state(self.state_path, retention_days=self.retention_days)
        return IngestionPipeline(graph, registry, state, self.event_dir)

    def save_pipeline(self, pipeline: IngestionPipeline) -> None:
        self.save_graph(pipeline.graph)
        pipeline.registry.save(self.registry_path)
        save_state(pipeline.state, self.state_path)

    # -- indices --

    def load_indices(self) -> tuple[InvertedIndex, InvertedIndex]:
        return load_index(self.artifact_index_path), load_index(self.expert_index_path)

    def save_indices(self, artifact: InvertedIndex, expert: InvertedIndex) -> None:
        save_index(artifact, self.artifact_index_path)
        save_index(expert, self.expert_index_path)

    # -- feed --

    def load_feed(self, graph: Optional[GraphStore] = None) -> FeedService:
        graph = graph if graph is not None else self.load_graph()
        events = load_all_events(self.event_dir) if self.event_dir.is_dir() else []
        return FeedService(graph, events, FollowStore(self.follows_path))


def workspace_from_args(data_dir, config_path=None) -> Workspace:
    config = parse_config(config_path) if config_path else {}
    return Workspace(Path(data_dir), config)
