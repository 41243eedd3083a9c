"""Operator command line: synth, ingest, heal, index, recommend, feed, serve, eval.

All paths live under ``--data-dir`` (default ./data). Commands that depend on
wall-clock time accept ``--now`` so runs are reproducible and self-healing is
testable without waiting for real days to pass.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import Workspace, workspace_from_args
from .encoding import parse_ts
from .evaluate import CONFIGS, evaluate, queries_from_truth
from .graph import GraphError, NodeId, NodeKind
from .index import build_artifact_index, build_expert_index
from .ingest import BOOTSTRAP, INCREMENTAL, IngestError, IngestReport, detect_gap, gap_days
from .recommend import RecommendationQuery, recommend
from .report import render_text_table, write_reports
from .synth import CorpusSpec, SpecError, generate, load_artifact_truth, load_expert_truth


def _print_report(report: IngestReport) -> None:
    print(f"files_processed: {report.files_processed}")
    print(f"events_applied: {report.events_applied}")
    print(f"errors: {len(report.errors)}")
    for err in report.errors:
        print(f"  error: {err}")
    for note in report.skipped:
        print(f"  skipped: {note}")
    if report.gaps:
        print(f"gaps: {', '.join(sorted(set(report.gaps)))}")


def cmd_synth(ws: Workspace, args) -> int:
    spec = CorpusSpec(
        seed=args.seed,
        n_repos=args.repos,
        n_devs=args.devs,
        n_topics=args.topics,
        prs_per_dev=args.prs_per_dev,
        link_rate=args.link_rate,
        vocab_per_topic=args.vocab,
        noise_rate=args.noise,
    )
    corpus = generate(spec)
    corpus.write(ws.data_dir)
    print(f"repos: {', '.join(corpus.repos)}")
    print(f"events: {len(corpus.events)}")
    print(f"queries: {len(corpus.artifact_truth)}")
    print(f"expected_nodes: {sum(v for k, v in corpus.manifest.items() if k.startswith('node:'))}")
    print(f"expected_edges: {sum(v for k, v in corpus.manifest.items() if k.startswith('edge:'))}")
    return 0


def cmd_ingest(ws: Workspace, args) -> int:
    pipeline = ws.load_pipeline()
    discovered = pipeline.discover()
    print(f"discovered: {len(discovered)}")
    now = parse_ts(args.now) if args.now else None
    if args.mode == "bootstrap":
        repos = args.repos.split(",") if args.repos else sorted(
            {e.repo for e in pipeline.registry.entries.values() if e.stream_kind == BOOTSTRAP}
        )
        if not repos:
            print("error: no bootstrap files discovered", file=sys.stderr)
            return 1
        report = pipeline.run_bootstrap(repos, now=now)
    else:
        if not now:
            print("error: ingest incremental requires --now", file=sys.stderr)
            return 1
        report = pipeline.run_incremental(now=now)
    ws.save_pipeline(pipeline)
    _print_report(report)
    return 0 if not report.errors else 1


def cmd_heal(ws: Workspace, args) -> int:
    pipeline = ws.load_pipeline()
    pipeline.discover()
    if args.check:
        flagged = 0
        for entry in sorted(
            (e for e in pipeline.registry.entries.values()
             if e.stream_kind == INCREMENTAL and e.status == "discovered"),
            key=lambda e: e.file_name,
        ):
            if detect_gap(entry, pipeline.state, pipeline.event_dir):
                days = gap_days(entry, pipeline.state, pipeline.event_dir)
                print(
                    f"gap: repo {entry.repo} file {entry.file_name} is "
                    f"{days:.1f} days past the last run "
                    f"(retention {pipeline.state.retention_days})"
                )
                flagged += 1
        for repo in sorted(pipeline.state.healing_lock):
            print(f"quarantined: {repo}")
        if not flagged and not pipeline.state.healing_lock:
            print("no gaps detected")
        return 0
    repos = args.repos.split(",") if args.repos else sorted(pipeline.state.healing_lock)
    if not repos:
        print("nothing to heal")
        return 0
    now = parse_ts(args.now) if args.now else None
    report = pipeline.heal(repos, now=now)
    ws.save_pipeline(pipeline)
    _print_report(report)
    return 0 if not report.errors else 1


def cmd_index(ws: Workspace, args) -> int:
    graph = ws.load_graph()
    artifact = build_artifact_index(graph)
    expert = build_expert_index(graph)
    ws.save_indices(artifact, expert)
    verb = "refreshed" if args.action == "refresh" else "built"
    print(f"{verb} artifact index: {artifact.doc_count} docs")
    print(f"{verb} expert index: {expert.doc_count} docs")
    return 0


def cmd_recommend(ws: Workspace, args) -> int:
    graph = ws.load_graph()
    artifact_index, expert_index = ws.load_indices()
    query = RecommendationQuery(
        title=args.title,
        description=args.description,
        requester=NodeId(NodeKind.USER, args.user),
        k=args.k,
    )
    response = recommend(query, artifact_index, expert_index, graph)
    for label, results in (("artifacts", response.artifacts), ("experts", response.experts)):
        print(f"{label}:")
        for r in results:
            proximity = "-" if r.proximity is None else str(r.proximity)
            print(f"  {r.final_rank}. {r.doc_id}  relevance={r.relevance:.6f}  proximity={proximity}")
    if response.flags:
        print(f"flags: {', '.join(response.flags)}")
    return 0


def cmd_feed(ws: Workspace, args) -> int:
    feed = ws.load_feed()
    items = feed.get_feed(NodeId(NodeKind.USER, args.user), args.view, args.limit)
    from .encoding import format_ts

    for item in items:
        followed = "*" if item.followed else " "
        print(
            f"{format_ts(item.timestamp)} {followed} {item.event_kind:18s} "
            f"{str(item.actor):24s} {item.subject}"
        )
    return 0


def cmd_serve(ws: Workspace, args) -> int:
    from .service import serve

    ui_dir = args.ui or ws.config.get("ui_dir") or None
    serve(ws, ui_dir=ui_dir)
    return 0


def cmd_eval(ws: Workspace, args) -> int:
    graph = ws.load_graph()
    truth_path = ws.truth_dir / "artifact_truth.tsv"
    expert_path = ws.truth_dir / "expert_truth.tsv"
    if not truth_path.exists():
        print(f"error: missing ground truth {truth_path} (run synth first)", file=sys.stderr)
        return 1
    truth = load_artifact_truth(truth_path)
    expert_truth = load_expert_truth(expert_path)
    queries = queries_from_truth(graph, truth, expert_truth)
    configs = tuple(args.configs.split(",")) if args.configs else CONFIGS
    ks = tuple(int(k) for k in args.k_values.split(","))
    tables = evaluate(graph, queries, configs, ks, max_queries=args.max_queries)
    for target in ("artifact", "expert"):
        print(render_text_table(tables[target]))
        print()
    written = write_reports(tables, ws.reports_dir)
    for path in written:
        print(f"wrote: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sociograph",
        description="Socio-technical graph platform: ingest events, index, recommend, serve.",
    )
    parser.add_argument("--data-dir", default="data", help="root for all data files")
    parser.add_argument("--config", default=None, help="key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic event corpus with ground truth")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--repos", type=int, default=4)
    p.add_argument("--devs", type=int, default=20)
    p.add_argument("--topics", type=int, default=5)
    p.add_argument("--prs-per-dev", type=int, default=10)
    p.add_argument("--link-rate", type=float, default=0.8)
    p.add_argument("--vocab", type=int, default=40)
    p.add_argument("--noise", type=float, default=0.1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="replay event files into the graph")
    p.add_argument("mode", choices=("bootstrap", "incremental"))
    p.add_argument("--repos", default=None, help="comma-separated repo names (bootstrap)")
    p.add_argument("--now", default=None, help="injected clock, ISO-8601")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("heal", help="re-bootstrap repositories flagged with data gaps")
    p.add_argument("--check", action="store_true", help="dry-run gap report")
    p.add_argument("--repos", default=None, help="comma-separated repo names")
    p.add_argument("--now", default=None, help="injected clock, ISO-8601")
    p.set_defaults(func=cmd_heal)

    p = sub.add_parser("index", help="build or refresh the BM25 indices")
    p.add_argument("action", choices=("build", "refresh"))
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("recommend", help="artifact + expert recommendations for a query")
    p.add_argument("--title", default="")
    p.add_argument("--description", default="")
    p.add_argument("--user", required=True)
    p.add_argument("-k", type=int, default=10)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("feed", help="print a user's news feed")
    p.add_argument("--user", required=True)
    p.add_argument("--view", default="most_recent", choices=("most_recent", "relevance", "team_only"))
    p.add_argument("--limit", type=int, default=25)
    p.set_defaults(func=cmd_feed)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--ui", default=None, help="directory of built portal files to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="run the accuracy/MRR ablation and write reports")
    p.add_argument("--configs", default=None, help="comma-separated subset of: " + ",".join(CONFIGS))
    p.add_argument("--k-values", default="3,5,10")
    p.add_argument("--max-queries", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ws = workspace_from_args(args.data_dir, args.config)
    ws.ensure_dirs()
    try:
        return args.func(ws, args)
    except (GraphError, IngestError, SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
