from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from sociograph.graph import EdgeType, GraphStore, NodeKind
from sociograph.ingest import (
    BOOTSTRAP,
    INCREMENTAL,
    EventRecord,
    IngestionPipeline,
    PipelineState,
    Registry,
    RegistryEntry,
    classify_file_type,
    detect_gap,
    event_to_mutations,
    parse_event_file_name,
    read_event_file,
    replay,
    write_event_file,
)

BASE = datetime(2024, 1, 1, tzinfo=timezone.utc)


def ev(i: int, repo: str, kind: str, minutes: int, **payload) -> EventRecord:
    return EventRecord(
        event_id=f"e{i:05d}",
        repo=repo,
        event_kind=kind,
        timestamp=BASE + timedelta(minutes=minutes),
        payload={k: str(v) for k, v in payload.items()},
    )


def pr_story(repo: str, start: int, pr: str, author: str, idx_start: int) -> list[EventRecord]:
    i = idx_start
    return [
        ev(i, repo, "pr_created", start, pr=pr, author=author,
           title=f"Fix {pr} parser", description="tokenizer details"),
        ev(i + 1, repo, "file_changed", start + 1, pr=pr, path="src/main.py"),
        ev(i + 2, repo, "review_assigned", start + 2, pr=pr, reviewer="rev1"),
        ev(i + 3, repo, "pr_state_changed", start + 3, pr=pr, state="completed"),
    ]


def make_pipeline(tmp_path: Path) -> IngestionPipeline:
    event_dir = tmp_path / "events"
    event_dir.mkdir(parents=True, exist_ok=True)
    return IngestionPipeline(GraphStore(), Registry(), PipelineState(), event_dir)


# --- event files and mapping ---------------------------------------------------


def test_event_file_round_trip(tmp_path):
    events = pr_story("alpha", 0, "pr1", "ann", 0)
    path = tmp_path / "alpha.bootstrap.000.events.csv"
    write_event_file(path, events)
    back, errors = read_event_file(path)
    assert errors == []
    assert back == events


def test_malformed_rows_reported_not_fatal(tmp_path):
    path = tmp_path / "alpha.bootstrap.000.events.csv"
    good = ev(1, "alpha", "pr_created", 0, pr="pr1", author="ann")
    write_event_file(path, [good])
    with open(path, "a", encoding="utf-8") as fh:
        fh.write("e9,alpha,pr_created,not-a-time,pr%3Dx\n")
        fh.write("e10,alpha,bogus_kind,2024-01-01T00:00:00Z,\n")
        fh.write("e11,alpha,pr_created,2024-01-01T00:00:00Z,\n")  # missing ids
    events, errors = read_event_file(path)
    assert [e.event_id for e in events] == ["e00001"]
    assert len(errors) == 3


def test_parse_event_file_name():
    assert parse_event_file_name("repoA.bootstrap.000.events.csv") == ("repoA", "bootstrap", 0)
    assert parse_event_file_name("r.incremental.012.events.csv") == ("r", "incremental", 12)
    # The sequence part is optional for a repo's first drop.
    assert parse_event_file_name("repoA.bootstrap.events.csv") == ("repoA", "bootstrap", 0)
    for bad in ("x.events.csv", "a.b.c.d.events.csv", "a.weekly.0.events.csv", "notacsv.txt"):
        with pytest.raises(ValueError):
            parse_event_file_name(bad)


def test_classify_file_type():
    assert classify_file_type("src/app.py") == "source"
    assert classify_file_type("conf/app.yaml") == "configuration"
    assert classify_file_type("Proj.csproj") == "project"
    assert classify_file_type("README.md") == "other"


def test_event_mapping_builds_expected_edges():
    g = replay(pr_story("alpha", 0, "pr1", "ann", 0))
    stats = g.stats()
    assert stats.node_count_by_kind[NodeKind.REPOSITORY] == 1
    assert stats.node_count_by_kind[NodeKind.PULL_REQUEST] == 1
    assert stats.edge_count_by_type[EdgeType.CREATES] == 1
    assert stats.edge_count_by_type[EdgeType.CONTAINS] == 1
    assert stats.edge_count_by_type[EdgeType.CHANGES] == 1
    assert stats.edge_count_by_type[EdgeType.REVIEWS] == 1
    pr = g.get_node(next(iter([n.id for n in g.nodes(NodeKind.PULL_REQUEST)])))
    assert pr.attributes["state"] == "completed"
    assert pr.attributes["repo"] == "alpha"


def test_wi_and_org_events():
    events = [
        ev(0, "alpha", "pr_created", 0, pr="pr1", author="ann"),
        ev(1, "alpha", "wi_created", 1, wi="wi1", title="Quota overflow"),
        ev(2, "alpha", "wi_linked", 2, wi="wi1", pr="pr1"),
        ev(3, "alpha", "wi_created", 3, wi="epic1", title="Epic"),
        ev(4, "alpha", "wi_parented", 4, parent="epic1", child="wi1"),
        ev(5, "alpha", "user_reports_to", 5, user="ann", manager="mgr"),
    ]
    g = replay(events)
    stats = g.stats()
    assert stats.edge_count_by_type[EdgeType.LINKED_TO] == 1
    assert stats.edge_count_by_type[EdgeType.PARENT_OF] == 1
    assert stats.edge_count_by_type[EdgeType.REPORTS_TO] == 1


# --- discovery -----------------------------------------------------------------


def test_discover_registers_new_files(tmp_path):
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv",
                     pr_story("alpha", 0, "pr1", "ann", 0))
    write_event_file(pipe.event_dir / "beta.incremental.001.events.csv",
                     [ev(10, "beta", "pr_created", 50, pr="pr2", author="bob")])
    new = pipe.discover()
    assert len(new) == 2
    assert all(e.status == "discovered" for e in new)
    assert pipe.discover() == []  # idempotent


def test_discover_parses_name_convention(tmp_path):
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "repoA.bootstrap.000.events.csv",
                     [ev(0, "repoA", "pr_created", 0, pr="p", author="a")])
    (pipe.event_dir / "garbage.events.csv").write_text("event_id,repo\n")
    new = pipe.discover()
    assert len(new) == 1
    entry = new[0]
    assert entry.stream_kind == BOOTSTRAP
    assert entry.repos_covered == ["repoA"]
    assert entry.file_timestamp == BASE


def test_registry_round_trip(tmp_path):
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv",
                     pr_story("alpha", 0, "pr1", "ann", 0))
    pipe.discover()
    pipe.run_bootstrap(["alpha"], now=BASE + timedelta(hours=1))
    reg_path = tmp_path / "registry.tsv"
    pipe.registry.save(reg_path)
    loaded = Registry.load(reg_path)
    assert set(loaded.entries) == set(pipe.registry.entries)
    entry = loaded.entries["alpha.bootstrap.000.events.csv"]
    assert entry.status == "completed"
    assert entry.processing_duration_ms is not None


# --- bootstrap -------------------------------------------------------------------


def test_bootstrap_applies_fixture_counts(tmp_path):
    pipe = make_pipeline(tmp_path)
    events = []
    for i, pr in enumerate(["pr1", "pr2", "pr3"]):
        events.append(ev(i, "alpha", "pr_created", i, pr=pr, author=f"dev{i}"))
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv", events)
    pipe.discover()
    report = pipe.run_bootstrap(["alpha"], now=BASE + timedelta(hours=1))
    assert report.files_processed == 1
    assert report.events_applied == 3
    stats = pipe.graph.stats()
    assert stats.node_count_by_kind[NodeKind.REPOSITORY] == 1
    assert stats.node_count_by_kind[NodeKind.PULL_REQUEST] == 3
    assert stats.edge_count_by_type[EdgeType.CONTAINS] == 3
    assert stats.edge_count_by_type[EdgeType.CREATES] == 3
    assert pipe.state.last_successful_run[BOOTSTRAP] == BASE + timedelta(hours=1)


def test_empty_bootstrap_file_completes(tmp_path):
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv", [])
    pipe.discover()
    report = pipe.run_bootstrap(["alpha"], now=BASE)
    assert report.events_applied == 0
    assert pipe.registry.entries["alpha.bootstrap.000.events.csv"].status == "completed"


def test_bootstrap_twice_is_idempotent(tmp_path):
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv",
                     pr_story("alpha", 0, "pr1", "ann", 0))
    pipe.discover()
    pipe.run_bootstrap(["alpha"], now=BASE)
    snap = pipe.graph.snapshot()
    report = pipe.run_bootstrap(["alpha"], now=BASE + timedelta(hours=8))
    assert report.files_processed == 0  # guarded by registry status
    assert pipe.graph.snapshot() == snap


# --- incremental -----------------------------------------------------------------


def _bootstrapped_pipeline(tmp_path) -> IngestionPipeline:
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv",
                     [ev(0, "alpha", "pr_created", 0, pr="pr1", author="ann")])
    pipe.discover()
    pipe.run_bootstrap(["alpha"], now=BASE + timedelta(minutes=5))
    return pipe


def test_incremental_applies_review(tmp_path):
    pipe = _bootstrapped_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.incremental.001.events.csv",
                     [ev(1, "alpha", "review_assigned", 60, pr="pr1", reviewer="bob")])
    pipe.discover()
    report = pipe.run_incremental(now=BASE + timedelta(hours=2))
    assert report.events_applied == 1
    assert pipe.graph.stats().edge_count_by_type[EdgeType.REVIEWS] == 1
    assert pipe.state.last_successful_run[INCREMENTAL] == BASE + timedelta(hours=2)


def test_incremental_skips_repo_under_healing_lock(tmp_path):
    pipe = _bootstrapped_pipeline(tmp_path)
    pipe.state.healing_lock.add("alpha")
    write_event_file(pipe.event_dir / "alpha.incremental.001.events.csv",
                     [ev(1, "alpha", "review_assigned", 60, pr="pr1", reviewer="bob")])
    pipe.discover()
    report = pipe.run_incremental(now=BASE + timedelta(hours=2))
    assert report.events_applied == 0
    assert any("healing" in s for s in report.skipped)
    entry = pipe.registry.entries["alpha.incremental.001.events.csv"]
    assert entry.status == "discovered"


def test_incremental_files_applied_in_timestamp_order(tmp_path):
    pipe = _bootstrapped_pipeline(tmp_path)
    # Name order (001, 002) is the reverse of time order here.
    late = [ev(5, "alpha", "pr_state_changed", 120, pr="pr1", state="completed")]
    early = [ev(4, "alpha", "pr_state_changed", 60, pr="pr1", state="active")]
    write_event_file(pipe.event_dir / "alpha.incremental.001.events.csv", late)
    write_event_file(pipe.event_dir / "alpha.incremental.002.events.csv", early)
    pipe.discover()
    pipe.run_incremental(now=BASE + timedelta(hours=3))
    # Chronological replay of everything is the oracle.
    all_events = (
        [ev(0, "alpha", "pr_created", 0, pr="pr1", author="ann")] + early + late
    )
    assert pipe.graph.snapshot() == replay(all_events).snapshot()
    pr = [n for n in pipe.graph.nodes(NodeKind.PULL_REQUEST)][0]
    assert pr.attributes["state"] == "completed"


def test_incremental_unknown_repo_triggers_gap_handling(tmp_path):
    pipe = make_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "beta.incremental.001.events.csv",
                     [ev(1, "beta", "pr_created", 60, pr="pr9", author="zoe")])
    pipe.discover()
    report = pipe.run_incremental(now=BASE + timedelta(hours=2))
    assert report.gaps == ["beta"]
    assert "beta" in pipe.state.healing_lock


def test_last_successful_run_never_decreases(tmp_path):
    pipe = _bootstrapped_pipeline(tmp_path)
    write_event_file(pipe.event_dir / "alpha.incremental.001.events.csv",
                     [ev(1, "alpha", "pr_updated", 30, pr="pr1")])
    pipe.discover()
    pipe.run_incremental(now=BASE + timedelta(hours=4))
    high_water = pipe.state.last_successful_run[INCREMENTAL]
    # A run with an older injected clock cannot move the clock backwards.
    pipe.run_incremental(now=BASE + timedelta(hours=1))
    assert pipe.state.last_successful_run[INCREMENTAL] == high_water
    pipe.run_bootstrap(["alpha"], now=BASE)  # already processed; clock keeps max
    assert pipe.state.last_successful_run[BOOTSTRAP] == BASE + timedelta(minutes=5)


# --- gap detection ----------------------------------------------------------------


def _entry_with_events(tmp_path, events, name="alpha.incremental.001.events.csv"):
    write_event_file(tmp_path / name, events)
    repo, stream, _ = parse_event_file_name(name)
    return RegistryEntry(
        file_name=name, size_bytes=1, file_timestamp=events[0].timestamp if events else BASE,
        stream_kind=stream, repos_covered=[repo],
    )


def test_gap_when_older_than_retention(tmp_path):
    entry = _entry_with_events(
        tmp_path, [ev(1, "alpha", "pr_updated", 4 * 24 * 60, pr="pr1")]
    )
    state = PipelineState(retention_days=3)
    state.last_successful_run[INCREMENTAL] = BASE
    assert detect_gap(entry, state, tmp_path) is True


def test_no_gap_at_equal_timestamps(tmp_path):
    entry = _entry_with_events(tmp_path, [ev(1, "alpha", "pr_updated", 0, pr="pr1")])
    state = PipelineState(retention_days=3)
    state.last_successful_run[INCREMENTAL] = BASE
    assert detect_gap(entry, state, tmp_path) is False


def test_no_gap_at_exactly_retention_boundary(tmp_path):
    # "bigger than" is strict: exactly three days is not a gap.
    entry = _entry_with_events(
        tmp_path, [ev(1, "alpha", "pr_updated", 3 * 24 * 60, pr="pr1")]
    )
    state = PipelineState(retention_days=3)
    state.last_successful_run[INCREMENTAL] = BASE
    assert detect_gap(entry, state, tmp_path) is False
    # One minute past the boundary tips it over.
    entry2 = _entry_with_events(
        tmp_path, [ev(2, "alpha", "pr_updated", 3 * 24 * 60 + 1, pr="pr1")],
        name="alpha.incremental.002.events.csv",
    )
    assert detect_gap(entry2, state, tmp_path) is True


def test_detect_gap_is_pure(tmp_path):
    entry = _entry_with_events(
        tmp_path, [ev(1, "alpha", "pr_updated", 10 * 24 * 60, pr="pr1")]
    )
    state = PipelineState(retention_days=3)
    state.last_successful_run[INCREMENTAL] = BASE
    first = detect_gap(entry, state, tmp_path)
    assert detect_gap(entry, state, tmp_path) == first
    assert entry.status == "discovered"
    assert state.healing_lock == set()


# --- healing ------------------------------------------------------------------------


def days(n: float) -> int:
    return int(n * 24 * 60)


def test_heal_after_dropped_incremental_converges(tmp_path):
    """Drop one incremental window, deliver a later one, heal, compare with
    a clean chronological replay of every event."""
    pipe = make_pipeline(tmp_path)
    boot = [ev(i, "alpha", "pr_created", i, pr=f"pr{i}", author="ann") for i in range(3)]
    win1 = [ev(10, "alpha", "review_assigned", days(1), pr="pr0", reviewer="bob")]
    win2 = [ev(20, "alpha", "pr_state_changed", days(5), pr="pr0", state="completed")]

    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv", boot)
    pipe.discover()
    pipe.run_bootstrap(["alpha"], now=BASE + timedelta(minutes=30))

    # win1 is dropped by the source; win2 arrives much later.
    write_event_file(pipe.event_dir / "alpha.incremental.002.events.csv", win2)
    pipe.discover()
    report = pipe.run_incremental(now=BASE + timedelta(days=5, hours=1))
    assert report.gaps == ["alpha"]
    assert "alpha" in pipe.state.healing_lock

    # The fresh bootstrap stream contains full history including the gap.
    write_event_file(pipe.event_dir / "alpha.bootstrap.001.events.csv", boot + win1 + win2)
    pipe.discover()
    heal_report = pipe.heal(["alpha"], now=BASE + timedelta(days=5, hours=2))
    assert "alpha" not in pipe.state.healing_lock
    assert heal_report.errors == []

    # Leftover incremental file is now fully covered and gets superseded.
    final = pipe.run_incremental(now=BASE + timedelta(days=5, hours=3))
    assert any("superseded" in s for s in final.skipped)

    assert pipe.graph.snapshot() == replay(boot + win1 + win2).snapshot()


def test_heal_without_prior_data_is_plain_bootstrap(tmp_path):
    pipe = make_pipeline(tmp_path)
    boot = [ev(0, "alpha", "pr_created", 0, pr="pr1", author="ann")]
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv", boot)
    pipe.discover()
    report = pipe.heal(["alpha"], now=BASE)
    assert report.events_applied == 1
    assert "alpha" not in pipe.state.healing_lock
    assert pipe.graph.snapshot() == replay(boot).snapshot()


def test_heal_failure_keeps_repo_quarantined(tmp_path):
    pipe = make_pipeline(tmp_path)
    pipe.state.healing_lock.add("ghost")
    report = pipe.heal(["ghost"], now=BASE)
    assert report.errors
    assert "ghost" in pipe.state.healing_lock


def test_incremental_arriving_mid_heal_applies_after(tmp_path):
    pipe = make_pipeline(tmp_path)
    boot = [ev(0, "alpha", "pr_created", 0, pr="pr1", author="ann")]
    write_event_file(pipe.event_dir / "alpha.bootstrap.000.events.csv", boot)
    pipe.discover()
    pipe.run_bootstrap(["alpha"], now=BASE + timedelta(minutes=5))

    dropped = [ev(1, "alpha", "review_assigned", days(0.5), pr="pr1", reviewer="bob")]
    late = [ev(2, "alpha", "pr_updated", days(4), pr="pr1", title="Updated title")]
    write_event_file(pipe.event_dir / "alpha.incremental.002.events.csv", late)
    pipe.discover()
    pipe.run_incremental(now=BASE + timedelta(days=4, minutes=5))
    assert "alpha" in pipe.state.healing_lock

    # While healing, a new incremental window arrives.
    heal_time = BASE + timedelta(days=4, hours=1)
    write_event_file(pipe.event_dir / "alpha.bootstrap.001.events.csv", boot + dropped + late)
    during = [ev(3, "alpha", "pr_state_changed", days(4) + 90, pr="pr1", state="completed")]
    write_event_file(pipe.event_dir / "alpha.incremental.003.events.csv", during)
    pipe.discover()
    pipe.heal(["alpha"], now=heal_time)
    pipe.run_incremental(now=heal_time + timedelta(hours=8))

    assert pipe.graph.snapshot() == replay(boot + dropped + late + during).snapshot()


# --- randomized convergence (shared with the acceptance suite) ---------------------


def run_random_schedule(tmp_path: Path, seed: int) -> None:
    """One randomized bootstrap/incremental/gap/heal schedule; asserts the
    final graph equals a chronological replay of all events."""
    rng = random.Random(seed)
    repos = [f"repo{i}" for i in range(rng.randint(1, 3))]
    pipe = make_pipeline(tmp_path / f"s{seed}")

    counter = 0
    all_events: list[EventRecord] = []

    def make_events(repo: str, start_min: int, end_min: int) -> list[EventRecord]:
        nonlocal counter
        events = []
        t = start_min
        while t < end_min:
            counter += 1
            kind = rng.choice(["pr_created", "review_assigned", "pr_state_changed",
                               "wi_created", "wi_linked", "file_changed"])
            pr = f"{repo}-pr{rng.randint(0, 5)}"
            payload = {
                "pr_created": dict(pr=pr, author=f"dev{rng.randint(0, 3)}",
                                   title=f"change {counter}"),
                "review_assigned": dict(pr=pr, reviewer=f"dev{rng.randint(0, 3)}"),
                "pr_state_changed": dict(pr=pr, state=rng.choice(["active", "completed"])),
                "wi_created": dict(wi=f"{repo}-wi{rng.randint(0, 3)}", title=f"task {counter}"),
                "wi_linked": dict(wi=f"{repo}-wi{rng.randint(0, 3)}", pr=pr),
                "file_changed": dict(pr=pr, path=f"src/f{rng.randint(0, 4)}.py"),
            }[kind]
            events.append(ev(counter, repo, kind, t, **payload))
            t += rng.randint(30, 240)
        all_events.extend(events)
        return events

    # Bootstrap every repo over its first day.
    for repo in repos:
        boot = make_events(repo, 0, days(1))
        write_event_file(pipe.event_dir / f"{repo}.bootstrap.000.events.csv", boot)
    pipe.discover()
    pipe.run_bootstrap(repos, now=BASE + timedelta(days=1))

    # Per repo: a few incremental windows, one possibly dropped.
    gapped: dict[str, list[EventRecord]] = {}
    seq = 1
    clock = BASE + timedelta(days=1)
    for repo in repos:
        n_windows = rng.randint(2, 4)
        drop_at = rng.randint(0, n_windows - 2) if rng.random() < 0.7 else None
        window_start = days(1)
        for w in range(n_windows):
            # A dropped window forces the next delivery past retention.
            width = days(rng.uniform(3.5, 5.0)) if w == drop_at else days(rng.uniform(0.2, 1.5))
            window_end = window_start + width
            events = make_events(repo, window_start, window_end)
            if w == drop_at:
                gapped.setdefault(repo, [])
            else:
                write_event_file(
                    pipe.event_dir / f"{repo}.incremental.{seq:03d}.events.csv", events)
                seq += 1
            window_start = window_end
        clock = max(clock, BASE + timedelta(minutes=window_start))

    pipe.discover()
    report = pipe.run_incremental(now=clock)
    for repo in gapped:
        assert repo in report.gaps, f"expected gap for {repo}"

    # Fresh full bootstrap heals whatever was flagged.
    if pipe.state.healing_lock:
        heal_time = clock + timedelta(hours=1)
        for repo in sorted(pipe.state.healing_lock):
            full = sorted(
                (e for e in all_events if e.repo == repo),
                key=lambda e: (e.timestamp, e.event_id),
            )
            write_event_file(pipe.event_dir / f"{repo}.bootstrap.001.events.csv", full)
        pipe.discover()
        pipe.heal(sorted(pipe.state.healing_lock), now=heal_time)
        pipe.run_incremental(now=heal_time + timedelta(hours=8))

    assert pipe.graph.snapshot() == replay(all_events).snapshot()


def test_randomized_convergence_schedules(tmp_path):
    for seed in range(12):
        run_random_schedule(tmp_path, seed)
