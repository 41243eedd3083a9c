"""Seedable synthetic corpus generator with planted ground truth.

The generator invents a small engineering org: topics with disjoint
vocabularies of compound identifiers, developers specialised in one topic,
managers per topic under one director, and repositories hosting the topics.
Each developer authors pull requests whose titles and descriptions draw from
their topic's vocabulary; most pull requests get a linked work item whose
text shares some of the pull request's compounds (more of them from the
description than from the title). The work item's owner is a reviewer of the
linked pull request, so the planted answer is both textually and graph-close
to the requester. Noise swaps compounds for other topics' or generic ones.

Everything is a pure function of the CorpusSpec (seed included): the same
parameters yield byte-identical event files, manifest, and ground truth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from .encoding import format_ts
from .ingest import EventRecord, write_event_file

BASE_TIME = datetime(2024, 1, 1, tzinfo=timezone.utc)

# Stems for building compound identifiers; disjoint slices become topic
# vocabularies. None of these are stopwords.
STEMS = [
    "mailbox", "sync", "engine", "imap", "transfer", "folder", "quota",
    "socket", "datagram", "stream", "packet", "buffer", "handshake", "relay",
    "compiler", "lexer", "parser", "grammar", "symbol", "scope", "emit",
    "ledger", "invoice", "billing", "payout", "balance", "currency", "tax",
    "render", "shader", "texture", "mesh", "viewport", "raster", "sprite",
    "cache", "shard", "replica", "cursor", "snapshot", "compact", "journal",
    "scheduler", "worker", "cron", "backoff", "retry", "timeout", "heartbeat",
    "metric", "tracing", "sampler", "gauge", "alert", "dashboard", "export",
    "auth", "token", "session", "keyring", "cipher", "rotate", "vault",
    "upload", "chunk", "resume", "mirror", "digest", "manifest", "archive",
    "router", "gateway", "ingress", "throttle", "circuit", "probe", "failover",
    "search", "ranking", "facet", "synonym", "stemmer", "boost", "recall",
]

VERBS = ["fix", "add", "implement", "refactor", "handle", "improve", "support", "update"]
FILE_EXTS = [".py", ".cs", ".yaml", ".json", ".csproj", ".md"]

STEMS_PER_TOPIC = 7
# Chance that a pull request reuses the exact compound set of an earlier
# same-topic pull request by another developer. Such near-duplicates tie on
# relevance, which is precisely where proximity re-ranking earns its keep.
TWIN_RATE = 0.3


class SpecError(ValueError):
    pass


@dataclass
class CorpusSpec:
    seed: int = 7
    n_repos: int = 4
    n_devs: int = 20
    n_topics: int = 5
    prs_per_dev: int = 10
    link_rate: float = 0.8
    vocab_per_topic: int = 40
    noise_rate: float = 0.1

    def validate(self) -> None:
        for name in ("n_repos", "n_devs", "n_topics", "prs_per_dev", "vocab_per_topic"):
            if getattr(self, name) < 1:
                raise SpecError(f"{name} must be >= 1")
        for name in ("link_rate", "noise_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SpecError(f"{name} must be in [0, 1]")
        if self.n_topics * STEMS_PER_TOPIC + 10 > len(STEMS):
            raise SpecError(f"at most {(len(STEMS) - 10) // STEMS_PER_TOPIC} topics supported")
        # 2- and 3-stem ordered compounds over a 7-stem pool: 42 + 210.
        if self.vocab_per_topic > 250:
            raise SpecError("vocab_per_topic must be <= 250")


@dataclass
class QueryTruth:
    """Planted answer for one work item used as a test query."""

    wi_doc_id: str
    repo: str
    topic: int
    owner: str  # local user id; the query requester
    linked_pr_doc_ids: list[str]


@dataclass
class Corpus:
    spec: CorpusSpec
    events: list[EventRecord]
    manifest: dict[str, int]  # "node:User" / "edge:creates" -> expected count
    artifact_truth: list[QueryTruth]
    expert_truth: dict[int, list[str]]  # topic -> dev local ids
    repos: list[str]

    def events_for_repo(self, repo: str) -> list[EventRecord]:
        return [ev for ev in self.events if ev.repo == repo]

    def write(self, out_dir) -> None:
        """Write bootstrap event files plus manifest and ground-truth TSVs."""
        out_dir = Path(out_dir)
        events_dir = out_dir / "events"
        truth_dir = out_dir / "truth"
        events_dir.mkdir(parents=True, exist_ok=True)
        truth_dir.mkdir(parents=True, exist_ok=True)
        for repo in self.repos:
            write_event_file(
                events_dir / f"{repo}.bootstrap.000.events.csv",
                self.events_for_repo(repo),
            )
        _write_tsv(
            truth_dir / "manifest.tsv",
            [f"{key}\t{self.manifest[key]}" for key in sorted(self.manifest)],
        )
        _write_tsv(
            truth_dir / "artifact_truth.tsv",
            [
                f"{t.wi_doc_id}\t{t.repo}\t{t.topic}\t{t.owner}\t{','.join(t.linked_pr_doc_ids)}"
                for t in self.artifact_truth
            ],
        )
        _write_tsv(
            truth_dir / "expert_truth.tsv",
            [
                f"{topic}\t{','.join(self.expert_truth[topic])}"
                for topic in sorted(self.expert_truth)
            ],
        )


def _write_tsv(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def load_artifact_truth(path) -> list[QueryTruth]:
    rows = []
    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            wi, repo, topic, owner, prs = line.split("\t")
            rows.append(QueryTruth(wi, repo, int(topic), owner, prs.split(",")))
    return rows


def load_expert_truth(path) -> dict[int, list[str]]:
    truth: dict[int, list[str]] = {}
    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            topic, devs = line.split("\t")
            truth[int(topic)] = devs.split(",")
    return truth


def load_manifest(path) -> dict[str, int]:
    manifest: dict[str, int] = {}
    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, count = line.split("\t")
            manifest[key] = int(count)
    return manifest


class _Generator:
    def __init__(self, spec: CorpusSpec) -> None:
        spec.validate()
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.events: list[EventRecord] = []
        self.minute = 0
        self.counter = 0
        # Distinct-pair trackers behind the manifest's edge counts.
        self.reviews: set[tuple[str, str]] = set()
        self.comments: set[tuple[str, str]] = set()
        self.changes: set[tuple[str, str]] = set()
        self.files: set[str] = set()
        self.wis: set[str] = set()
        self.parented: set[tuple[str, str]] = set()
        self.linked = 0
        self.reports = 0

    def emit(self, repo: str, kind: str, **payload) -> None:
        self.counter += 1
        self.minute += 1
        self.events.append(
            EventRecord(
                event_id=f"e{self.counter:06d}",
                repo=repo,
                event_kind=kind,
                timestamp=BASE_TIME + timedelta(minutes=self.minute),
                payload={k: str(v) for k, v in payload.items() if v != ""},
            )
        )

    def run(self) -> Corpus:
        spec = self.spec
        rng = self.rng

        stems = list(STEMS)
        rng.shuffle(stems)
        topic_stems = [
            stems[t * STEMS_PER_TOPIC:(t + 1) * STEMS_PER_TOPIC]
            for t in range(spec.n_topics)
        ]
        noise_stems = stems[spec.n_topics * STEMS_PER_TOPIC:
                            spec.n_topics * STEMS_PER_TOPIC + 10]

        def compound(pool: list[str]) -> str:
            parts = rng.sample(pool, rng.choice((2, 3)))
            return "".join(p.capitalize() for p in parts)

        vocab = []
        for t in range(spec.n_topics):
            words: set[str] = set()
            while len(words) < spec.vocab_per_topic:
                words.add(compound(topic_stems[t]))
            vocab.append(sorted(words))
        noise_vocab = sorted({compound(noise_stems) for _ in range(12)})

        def noisy(word: str, topic: int) -> str:
            if rng.random() >= spec.noise_rate:
                return word
            if rng.random() < 0.5 and spec.n_topics > 1:
                other = rng.choice([t for t in range(spec.n_topics) if t != topic])
                return rng.choice(vocab[other])
            return rng.choice(noise_vocab)

        # Repos host topics round-robin and are named after their first topic.
        repo_of_topic = [t % spec.n_repos for t in range(spec.n_topics)]
        repos = []
        for r in range(spec.n_repos):
            hosted = [t for t in range(spec.n_topics) if repo_of_topic[t] == r]
            stem = topic_stems[hosted[0]][0] if hosted else f"misc{r}"
            repos.append(f"{stem.capitalize()}Platform")

        devs = [f"dev{i:02d}" for i in range(spec.n_devs)]
        dev_topic = {dev: i % spec.n_topics for i, dev in enumerate(devs)}
        topic_devs: dict[int, list[str]] = {t: [] for t in range(spec.n_topics)}
        for dev, topic in dev_topic.items():
            topic_devs[topic].append(dev)
        managers = {t: f"mgr{t}" for t in range(spec.n_topics)}
        director = "dir0"

        files_per_repo: dict[str, list[str]] = {}
        for r, repo in enumerate(repos):
            hosted = [t for t in range(spec.n_topics) if repo_of_topic[t] == r]
            pool = []
            for t in hosted:
                for i, stem in enumerate(topic_stems[t]):
                    pool.append(f"src/{stem}_{i}{FILE_EXTS[i % len(FILE_EXTS)]}")
            files_per_repo[repo] = pool or [f"src/misc_{r}.py"]

        # Org chart first: devs report to their topic manager, managers to
        # the director. Events live in the reporter's home repo.
        for dev in devs:
            topic = dev_topic[dev]
            self.emit(
                repos[repo_of_topic[topic]], "user_reports_to",
                user=dev, manager=managers[topic],
                name=f"Dev {dev[3:]}", job_title="Software Engineer",
                manager_name=f"Manager {topic}", manager_job_title="Engineering Manager",
            )
            self.reports += 1
        for t in range(spec.n_topics):
            if topic_devs[t]:
                self.emit(
                    repos[repo_of_topic[t]], "user_reports_to",
                    user=managers[t], manager=director,
                    name=f"Manager {t}", job_title="Engineering Manager",
                    manager_name="Director", manager_job_title="Director of Engineering",
                )
                self.reports += 1

        epics: dict[int, str] = {}
        truth: list[QueryTruth] = []
        pr_counter = 0
        wi_counter = 0
        topic_history: dict[int, list[tuple[list[str], str]]] = {
            t: [] for t in range(spec.n_topics)
        }

        for round_no in range(spec.prs_per_dev):
            for dev in devs:
                topic = dev_topic[dev]
                repo = repos[repo_of_topic[topic]]
                pr_counter += 1
                pr = f"pr{pr_counter:04d}"

                foreign = [h for h in topic_history[topic] if h[3] != dev]
                if foreign and rng.random() < TWIN_RATE:
                    # Verbatim near-duplicate of an earlier mate's pull
                    # request: identical text, so only the graph can tell
                    # the planted answer from its twin.
                    words, title, description, _ = rng.choice(foreign)
                    words = list(words)
                else:
                    words = rng.sample(vocab[topic], min(6, len(vocab[topic])))
                    title_words = [noisy(w, topic) for w in words[:2]]
                    desc_words = [noisy(w, topic) for w in words[1:6]]
                    title = f"{rng.choice(VERBS)} {' '.join(title_words)}"
                    description = f"{rng.choice(VERBS)} {' '.join(desc_words)} paths tests"
                topic_history[topic].append((words, title, description, dev))
                self.emit(
                    repo, "pr_created", pr=pr, author=dev,
                    title=title, description=description,
                    organization="contoso", project=f"{repo}Proj",
                    url=f"https://example.test/{repo}/pr/{pr_counter}",
                    name=f"Dev {dev[3:]}", job_title="Software Engineer",
                )

                for path in rng.sample(files_per_repo[repo], rng.choice((1, 2, 3))):
                    self.emit(repo, "file_changed", pr=pr, path=path)
                    self.files.add(f"{repo}:{path}")
                    self.changes.add((pr, path))

                mates = [d for d in topic_devs[topic] if d != dev]
                reviewers = rng.sample(mates, min(len(mates), rng.choice((1, 2)))) if mates else []
                for reviewer in reviewers:
                    self.emit(repo, "review_assigned", pr=pr, reviewer=reviewer,
                              name=f"Dev {reviewer[3:]}")
                    self.reviews.add((reviewer, pr))
                    if rng.random() < 0.5:
                        self.emit(repo, "review_commented", pr=pr, commenter=reviewer)
                        self.comments.add((reviewer, pr))

                if rng.random() < spec.link_rate:
                    wi_counter += 1
                    wi = f"wi{wi_counter:04d}"
                    # Owner is a reviewer (a topic mate) when one exists; a
                    # single-dev topic falls back to the author.
                    owner = reviewers[0] if reviewers else (rng.choice(mates) if mates else dev)
                    # The work item paraphrases its pull request: one title
                    # compound, two description compounds, plus topic filler.
                    from_title = rng.choice(words[:2])
                    from_desc = rng.sample(words[2:6], 2)
                    extra = rng.choice(vocab[topic])
                    wi_title = f"{rng.choice(VERBS)} {noisy(from_title, topic)} behavior"
                    wi_desc = " ".join(
                        [noisy(from_desc[0], topic), noisy(from_desc[1], topic),
                         noisy(extra, topic), rng.choice(VERBS)]
                    )
                    self.emit(
                        repo, "wi_created", wi=wi, title=wi_title, description=wi_desc,
                        assigned_to=owner,
                        url=f"https://example.test/{repo}/wi/{wi_counter}",
                    )
                    self.wis.add(wi)
                    self.emit(repo, "wi_linked", wi=wi, pr=pr)
                    self.linked += 1
                    if topic not in epics:
                        epic = f"epic{topic}"
                        self.emit(repo, "wi_created", wi=epic,
                                  title=f"{topic_stems[topic][0]} roadmap")
                        epics[topic] = epic
                        self.wis.add(epic)
                    self.emit(repo, "wi_parented", parent=epics[topic], child=wi)
                    self.parented.add((epics[topic], wi))
                    truth.append(QueryTruth(
                        wi_doc_id=f"WorkItem:{wi}", repo=repo, topic=topic,
                        owner=owner, linked_pr_doc_ids=[f"PullRequest:{pr}"],
                    ))

                if rng.random() < 0.7:
                    self.emit(repo, "pr_state_changed", pr=pr, state="completed")

        repos_seen = sorted({ev.repo for ev in self.events})
        users = set(devs) | {managers[t] for t in range(spec.n_topics) if topic_devs[t]}
        if any(topic_devs[t] for t in range(spec.n_topics)):
            users.add(director)
        manifest = {
            "node:User": len(users),
            "node:PullRequest": pr_counter,
            "node:WorkItem": len(self.wis),
            "node:File": len(self.files),
            "node:Repository": len(repos_seen),
            "edge:creates": pr_counter,
            "edge:contains": pr_counter,
            "edge:reviews": len(self.reviews),
            "edge:changes": len(self.changes),
            "edge:linked_to": self.linked,
            "edge:parent_of": len(self.parented),
            "edge:comments_on": len(self.comments),
            "edge:reports_to": self.reports,
        }
        expert_truth = {t: list(topic_devs[t]) for t in range(spec.n_topics) if topic_devs[t]}
        return Corpus(
            spec=self.spec,
            events=self.events,
            manifest=manifest,
            artifact_truth=truth,
            expert_truth=expert_truth,
            repos=repos_seen,
        )


def generate(spec: Optional[CorpusSpec] = None) -> Corpus:
    """Generate a corpus; deterministic for a given spec."""
    return _Generator(spec or CorpusSpec()).run()
