from __future__ import annotations

import filecmp
from pathlib import Path

import pytest

from sociograph.cli import main
from sociograph.config import Workspace
from sociograph.graph import NodeId, NodeKind
from sociograph.recommend import RecommendationQuery, recommend


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SMALL = ["--seed", "3", "--repos", "2", "--devs", "6", "--topics", "3", "--prs-per-dev", "3"]


def test_synth_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code1, out1, _ = run(capsys, "--data-dir", str(a), "synth", *SMALL)
    code2, out2, _ = run(capsys, "--data-dir", str(b), "synth", *SMALL)
    assert code1 == code2 == 0
    assert out1 == out2
    names = sorted(p.name for p in (a / "events").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a / "events", b / "events", names, shallow=False)
    assert mismatch == [] and errors == []


def test_full_pipeline_equals_library(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(capsys, "--data-dir", str(data), "synth", *SMALL)[0] == 0
    code, out, err = run(capsys, "--data-dir", str(data), "ingest", "bootstrap",
                         "--now", "2024-02-01T00:00:00Z")
    assert code == 0, err
    assert "events_applied" in out
    assert run(capsys, "--data-dir", str(data), "index", "build")[0] == 0

    ws = Workspace(data)
    graph = ws.load_graph()
    artifact_index, expert_index = ws.load_indices()
    requester = sorted(n.id.local_id for n in graph.nodes(NodeKind.USER))[0]
    wi = graph.nodes(NodeKind.WORK_ITEM)[0]
    title = wi.attributes.get("title", "sync")

    code, out, _ = run(capsys, "--data-dir", str(data), "recommend",
                       "--title", title, "--user", requester, "-k", "5")
    assert code == 0
    direct = recommend(
        RecommendationQuery(title, "", NodeId(NodeKind.USER, requester), k=5),
        artifact_index, expert_index, graph,
    )
    for r in direct.artifacts:
        assert r.doc_id in out
    # byte-stable across runs
    code2, out2, _ = run(capsys, "--data-dir", str(data), "recommend",
                         "--title", title, "--user", requester, "-k", "5")
    assert out == out2


def test_heal_check_reports_gap(tmp_path, capsys):
    data = tmp_path / "data"
    run(capsys, "--data-dir", str(data), "synth", *SMALL)
    run(capsys, "--data-dir", str(data), "ingest", "bootstrap", "--now", "2024-01-10T00:00:00Z")

    # Craft an incremental file 4 days past the last run.
    from sociograph.ingest import EventRecord, write_event_file
    from sociograph.encoding import parse_ts
    ws = Workspace(data)
    repo = sorted({p.name.split(".")[0] for p in ws.event_dir.iterdir()})[0]
    late = EventRecord(
        "late01", repo, "pr_updated", parse_ts("2024-01-14T00:00:00Z"), {"pr": "pr0001"}
    )
    write_event_file(ws.event_dir / f"{repo}.incremental.001.events.csv", [late])

    code, out, _ = run(capsys, "--data-dir", str(data), "heal", "--check")
    assert code == 0
    assert "gap: repo" in out and repo in out
    assert "4.0 days" in out

    # Dry-run must not change state.
    code, out2, _ = run(capsys, "--data-dir", str(data), "heal", "--check")
    assert out2 == out


def test_feed_command(tmp_path, capsys):
    data = tmp_path / "data"
    run(capsys, "--data-dir", str(data), "synth", *SMALL)
    run(capsys, "--data-dir", str(data), "ingest", "bootstrap", "--now", "2024-02-01T00:00:00Z")
    code, out, _ = run(capsys, "--data-dir", str(data), "feed", "--user", "dev00", "--limit", "5")
    assert code == 0
    assert out.strip()


def test_eval_writes_reports_and_figures(tmp_path, capsys):
    data = tmp_path / "data"
    run(capsys, "--data-dir", str(data), "synth", *SMALL)
    run(capsys, "--data-dir", str(data), "ingest", "bootstrap", "--now", "2024-02-01T00:00:00Z")
    code, out, err = run(capsys, "--data-dir", str(data), "eval",
                         "--configs", "plus_description,plus_graph",
                         "--k-values", "3,5", "--max-queries", "10")
    assert code == 0, err
    reports = data / "reports"
    for target in ("artifact", "expert"):
        assert (reports / f"ablation_{target}.tsv").exists()
        assert (reports / f"ablation_{target}.txt").exists()
        assert (reports / f"ablation_{target}.png").stat().st_size > 0
    assert "artifact recommendation" in out
    # TSV is byte-stable across repeat runs.
    first = (reports / "ablation_artifact.tsv").read_bytes()
    run(capsys, "--data-dir", str(data), "eval",
        "--configs", "plus_description,plus_graph", "--k-values", "3,5", "--max-queries", "10")
    assert (reports / "ablation_artifact.tsv").read_bytes() == first


def test_unknown_flag_rejected(tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--data-dir", str(tmp_path), "synth", "--bogus-flag"])
    assert excinfo.value.code != 0


def test_missing_truth_diagnostic(tmp_path, capsys):
    code, out, err = run(capsys, "--data-dir", str(tmp_path / "empty"), "eval")
    assert code == 1
    assert "missing ground truth" in err


def test_recommend_without_index_fails_cleanly(tmp_path, capsys):
    code, _, err = run(capsys, "--data-dir", str(tmp_path / "none"),
                       "recommend", "--title", "x", "--user", "u")
    assert code == 1
    assert err.startswith("error:")
