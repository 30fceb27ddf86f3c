"""The assertflow command line.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
Report-producing subcommands write matplotlib figures next to their
delimited output files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from assertflow import artifacts as art
from assertflow import bridge as bridge_mod
from assertflow import metrics as metrics_mod
from assertflow.agents import AgentRuntime, StochasticErrorModel
from assertflow.config import load_bridge_agents, load_pipeline_config
from assertflow.equiv import TraceSuite, check_equivalence
from assertflow.errors import AssertflowError
from assertflow.ids import canonical_json
from assertflow.store import ArtifactStore, open_store
from assertflow.sva import (
    Trace,
    check_syntax,
    eval_assertion,
    parse_assertion,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assertflow",
        description="SVA pipeline, bounded semantics checking, and data synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    sva = sub.add_parser("sva", help="assertion lint and evaluation")
    sva_sub = sva.add_subparsers(dest="sva_command", required=True)
    lint = sva_sub.add_parser("lint", help="syntax-check an assertion file")
    lint.add_argument("file", help="assertion file, or - for stdin")
    lint.add_argument("--format", choices=("text", "json"), default="text")
    evalp = sva_sub.add_parser("eval", help="evaluate an assertion over a trace")
    evalp.add_argument("file", help="assertion file, or - for stdin")
    evalp.add_argument("--trace", required=True, help="trace JSON file")
    evalp.add_argument("--attempt", type=int, default=None,
                       help="single attempt cycle (default: all)")
    evalp.add_argument("--format", choices=("text", "json"), default="text")

    equiv = sub.add_parser("equiv", help="bounded equivalence of two assertions")
    equiv.add_argument("--a", required=True, dest="file_a")
    equiv.add_argument("--b", required=True, dest="file_b")
    equiv.add_argument("--signals", default=None, help="comma-separated alphabet")
    equiv.add_argument("--bound", type=int, default=None)
    equiv.add_argument("--sample", type=int, default=None,
                       help="sampled mode with this many traces")
    equiv.add_argument("--seed", type=int, default=0)
    equiv.add_argument("--format", choices=("text", "json"), default="text")

    pipe = sub.add_parser("pipeline", help="run the generation pipeline")
    pipe_sub = pipe.add_subparsers(dest="pipeline_command", required=True)
    run = pipe_sub.add_parser("run", help="execute all stages on a design spec")
    run.add_argument("--spec", required=True)
    run.add_argument("--config", default=None,
                     help="agents/stages JSON (required unless --remote)")
    run.add_argument("--resume", default=None, help="existing run id to resume")
    run.add_argument("--store", default=None)
    run.add_argument("--remote", default=None, metavar="URL",
                     help="submit to a running service instead of executing in-process")
    run.add_argument("--token", default=None, help="shared token for --remote")

    br = sub.add_parser("bridge", help="data synthesis and filter simulation")
    br_sub = br.add_subparsers(dest="bridge_command", required=True)
    synth = br_sub.add_parser("synth", help="generate and validate candidates")
    synth.add_argument("--task", required=True, choices=bridge_mod.TASKS)
    synth.add_argument("--golden", required=True, help="golden artifact JSON file")
    synth.add_argument("--k", type=int, default=3)
    synth.add_argument("--config", default=None,
                       help="bridge agents JSON (required unless --remote)")
    synth.add_argument("--reviewer", default="cli")
    synth.add_argument("--verifier", default="schema", choices=("schema", "expert_queue"))
    synth.add_argument("--store", default=None)
    synth.add_argument("--remote", default=None, metavar="URL",
                       help="call a running service instead of executing in-process")
    synth.add_argument("--token", default=None, help="shared token for --remote")
    sim = br_sub.add_parser("simulate-filter", help="simulate unanimous k-agent filtering")
    sim.add_argument("--k", default="1..5", help="k values, e.g. 1..5 or 1,3,5")
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--gtp-fraction", type=float, default=None)
    sim.add_argument("--model", default=None, help="error-model JSON file")
    sim.add_argument("--out", default=None, help="CSV output path (figures alongside)")
    build = br_sub.add_parser("build-dataset", help="construct the dataset from outcomes")
    build.add_argument("--out", required=True)
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--store", default=None)

    met = sub.add_parser("metrics", help="evaluation reports")
    met_sub = met.add_subparsers(dest="metrics_command", required=True)
    rep = met_sub.add_parser("report", help="score a run's assertions against suites")
    rep.add_argument("--run", required=True)
    rep.add_argument("--suites", required=True,
                     help="trace-suite JSON file or directory of them")
    rep.add_argument("--format", choices=("table", "csv", "structured"), default="table")
    rep.add_argument("--out", default=None, help="output path (figures alongside)")
    rep.add_argument("--save", action="store_true", help="store the report for GET /metrics")
    rep.add_argument("--store", default=None)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--store", default=None)
    serve.add_argument("--config", default=None, help="pipeline config JSON")
    serve.add_argument("--bridge-config", default=None, help="bridge agents JSON")
    serve.add_argument("--token", default=None)
    serve.add_argument("--sync", action="store_true", help="run pipelines inline")

    return parser


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(doc, as_json: bool, text: str) -> None:
    print(canonical_json(doc) if as_json else text)


# --------------------------------------------------------------------------
# Subcommand bodies

def cmd_sva_lint(args) -> int:
    text = _read_text(args.file)
    report = check_syntax(text)
    if args.format == "json":
        _emit({"ok": report.ok,
               "diagnostics": [{"line": d.line, "column": d.column,
                                "message": d.message, "token": d.token}
                               for d in report.diagnostics]}, True, "")
    elif report.ok:
        print("ok")
    for d in report.diagnostics:
        print(f"{args.file}:{d.line}:{d.column}: {d.message}", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_sva_eval(args) -> int:
    ast = parse_assertion(_read_text(args.file))
    trace = Trace.from_doc(json.loads(_read_text(args.trace)))
    result = eval_assertion(ast, trace)
    per_attempt = [v.value for v in result.per_attempt]
    if args.attempt is not None:
        verdict = result.per_attempt[args.attempt].value
        _emit({"attempt": args.attempt, "verdict": verdict}, args.format == "json",
              f"attempt {args.attempt}: {verdict}")
        return 0
    _emit({"overall": result.overall.value, "per_attempt": per_attempt},
          args.format == "json",
          f"overall: {result.overall.value}\nper attempt: {' '.join(per_attempt)}")
    return 0


def cmd_equiv(args) -> int:
    ast_a = parse_assertion(_read_text(args.file_a))
    ast_b = parse_assertion(_read_text(args.file_b))
    signals = tuple(s.strip() for s in args.signals.split(",")) if args.signals else None
    mode = "sampled" if args.sample else "auto"
    result = check_equivalence(ast_a, ast_b, signals=signals, bound=args.bound,
                               mode=mode, sample_n=args.sample or 100_000,
                               seed=args.seed)
    doc = {"verdict": result.verdict, "mode": result.mode,
           "traces_checked": result.traces_checked,
           "warnings": list(result.warnings)}
    text = f"{result.verdict} ({result.mode}, {result.traces_checked} traces)"
    if result.counterexample is not None:
        cex = result.counterexample
        doc["counterexample"] = {"trace": cex.trace.to_doc(),
                                 "attempt_cycle": cex.attempt_cycle,
                                 "verdict_a": cex.verdict_a.value,
                                 "verdict_b": cex.verdict_b.value}
        text += (f"\ncounterexample at attempt {cex.attempt_cycle}: "
                 f"a={cex.verdict_a.value} b={cex.verdict_b.value}\n"
                 f"trace: {canonical_json(cex.trace.to_doc())}")
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _emit(doc, args.format == "json", text)
    return 0 if result.verdict == "equivalent" else 1


def cmd_pipeline_run(args) -> int:
    from assertflow.pipeline import run_pipeline

    spec = art.deserialize_artifact(_read_text(args.spec))
    if not spec.id:
        spec = art.assign_id(spec)

    if args.remote:
        return _remote_pipeline_run(args, spec)

    if not args.config:
        raise AssertflowError("--config is required when running in-process")
    store = open_store(args.store)
    config = load_pipeline_config(args.config)
    runtime = AgentRuntime(base_dir=Path(args.config).parent)
    run = run_pipeline(spec, config, store, runtime, run_id=args.resume)
    print(canonical_json({"run_id": run.run_id, "status": run.status,
                          "counts": run.counts,
                          "syntax_pass_rate": run.syntax_pass_rate,
                          "stage_status": run.stage_status}))
    return 0 if run.status == "done" else 1


def _run_status(doc: dict) -> str:
    statuses = list(doc.get("stage_status", {}).values())
    if any(s == "failed" for s in statuses):
        return "failed"
    if statuses and all(s == "done" for s in statuses):
        return "done"
    return "running"


def _remote_pipeline_run(args, spec) -> int:
    import time

    import httpx

    headers = {"x-assertflow-token": args.token} if args.token else {}
    base = args.remote.rstrip("/")
    with httpx.Client(timeout=30.0, headers=headers) as client:
        response = client.post(f"{base}/runs", json=spec.to_doc())
        if response.status_code not in (200, 202):
            raise AssertflowError(
                f"service rejected the run: {response.status_code} {response.text}")
        run_id = response.json()["run_id"]
        deadline = time.monotonic() + 300
        while time.monotonic() < deadline:
            doc = client.get(f"{base}/runs/{run_id}").json()
            status = _run_status(doc)
            if status in ("done", "failed"):
                print(canonical_json({"run_id": run_id, "status": status,
                                      "counts": doc.get("counts", {}),
                                      "syntax_pass_rate": doc.get("syntax_pass_rate"),
                                      "stage_status": doc.get("stage_status", {})}))
                return 0 if status == "done" else 1
            time.sleep(0.2)
    raise AssertflowError(f"remote run {run_id} did not finish within the wait budget")


def cmd_bridge_synth(args) -> int:
    if args.remote:
        import httpx

        artifact = art.deserialize_artifact(_read_text(args.golden))
        headers = {"x-assertflow-token": args.token} if args.token else {}
        with httpx.Client(timeout=120.0, headers=headers) as client:
            response = client.post(f"{args.remote.rstrip('/')}/bridge/synth", json={
                "task": args.task, "golden": artifact.to_doc(), "k": args.k,
                "reviewer": args.reviewer, "verifier": args.verifier})
            if response.status_code != 200:
                raise AssertflowError(
                    f"service rejected synth: {response.status_code} {response.text}")
            print(canonical_json(response.json()))
        return 0

    if not args.config:
        raise AssertflowError("--config is required when running in-process")
    store = open_store(args.store)
    ledger = bridge_mod.BridgeLedger(store)
    agents = load_bridge_agents(args.config)
    generator = agents.get("generator")
    if generator is None:
        raise AssertflowError("bridge config must define a 'generator' agent")
    runtime = AgentRuntime(base_dir=Path(args.config).parent)

    artifact = art.deserialize_artifact(_read_text(args.golden))
    if not artifact.id:
        artifact = art.assign_id(artifact)
    goldens = [g for g in bridge_mod.ingest_golden([artifact], args.reviewer)
               if g.task == args.task]
    if not goldens:
        raise AssertflowError(
            f"golden artifact {artifact.kind} does not anchor task {args.task}")

    summary = {"task": args.task, "goldens": 0, "candidates": 0,
               "accepted": 0, "rejected": 0, "expert_pending": 0}
    from assertflow.store import ReviewQueue

    queue = ReviewQueue(store)
    for golden in goldens:
        ledger.save_golden(golden)
        candidate_set = bridge_mod.generate_candidates(golden, generator, runtime)
        if golden.task != "sva_to_checkpoint":
            group_agent = agents.get("augmenter", generator)
            candidate_set = bridge_mod.augment(golden, candidate_set, group_agent, runtime)
        summary["goldens"] += 1
        summary["candidates"] += len(candidate_set.candidates)
        for candidate in candidate_set.candidates:
            if golden.task == "sva_to_checkpoint":
                reverse_agent = agents.get("reverse", generator)
                golden_sva = art.SvaAssertion.from_doc(golden.payload["sva"])
                outcome = bridge_mod.validate_reverse(
                    golden_sva, candidate, args.k, bridge_mod.EquivCheckConfig(),
                    reverse_agent, runtime)
                bridge_mod.apply_outcome(candidate, outcome)
                ledger.append_outcome(outcome)
            else:
                result = bridge_mod.validate_direct(candidate, args.verifier,
                                                    golden, queue)
                if isinstance(result, bridge_mod.ExpertTicket):
                    ledger.save_ticket(result)
                else:
                    ledger.append_outcome(result)
            ledger.save_candidate(candidate)
            summary[candidate.status if candidate.status in
                    ("accepted", "rejected", "expert_pending") else "rejected"] += 1
    print(canonical_json(summary))
    return 0


def _parse_k_values(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(p) for p in text.split(",") if p.strip()]


def cmd_simulate_filter(args) -> int:
    defaults = bridge_mod.load_calibrated_filter_config()
    model_doc = json.loads(Path(args.model).read_text())["model"] if args.model \
        else defaults["model"]
    model = StochasticErrorModel.from_doc(model_doc)
    k_values = _parse_k_values(args.k)
    n_items = args.n if args.n is not None else defaults["n_items"]
    seed = args.seed if args.seed is not None else defaults["seed"]
    gtp = args.gtp_fraction if args.gtp_fraction is not None else defaults["gtp_fraction"]
    stats = bridge_mod.simulate_filter(model, k_values, n_items, gtp, seed)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["k", "n_items", "tp", "fp", "tn", "fn",
                     "fp_rate", "fn_rate", "precision"])
    for s in stats:
        writer.writerow([s.k, s.n_items, s.tp, s.fp, s.tn, s.fn,
                         s.fp_rate, s.fn_rate, s.precision])
    csv_text = buffer.getvalue()
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text, encoding="utf-8")
        from assertflow.figures import render_filter_figure

        figure = render_filter_figure(stats, out)
        print(f"wrote {out} and {figure}")
    else:
        print(csv_text, end="")
    return 0


def cmd_build_dataset(args) -> int:
    store = open_store(args.store)
    ledger = bridge_mod.BridgeLedger(store)
    from assertflow.store import ReviewQueue

    queue = ReviewQueue(store)
    goldens, candidates, outcomes = ledger.load_all()
    # resolve any decided expert tickets before refusing on pending ones
    for ticket in ledger.load_tickets():
        candidate = candidates.get(ticket.candidate_ref)
        if candidate is not None and candidate.status == "expert_pending":
            outcome = bridge_mod.resolve_expert_ticket(ticket, candidate, queue)
            if outcome is not None:
                outcomes.append(outcome)
                ledger.append_outcome(outcome)
                ledger.save_candidate(candidate)
    dataset = bridge_mod.build_dataset(outcomes, candidates, goldens, seed=args.seed)
    out = Path(args.out)
    out.write_text(dataset.jsonl_text, encoding="utf-8")
    manifest_path = out.with_suffix(out.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(dataset.manifest, indent=1, sort_keys=True),
                             encoding="utf-8")
    store.save_dataset(dataset.dataset_id, dataset.jsonl_text, dataset.manifest)
    print(canonical_json({"dataset_id": dataset.dataset_id,
                          "records": len(dataset.records),
                          "out": str(out)}))
    return 0


def _load_suites(path: str) -> dict[str, TraceSuite]:
    target = Path(path)
    files = sorted(target.glob("*.json")) if target.is_dir() else [target]
    suites = {}
    for file in files:
        suite = TraceSuite.from_doc(json.loads(file.read_text()))
        suites[suite.design_ref] = suite
    if not suites:
        raise AssertflowError(f"no trace suites found at {path}")
    return suites


def cmd_metrics_report(args) -> int:
    store = open_store(args.store)
    run = store.load_run(args.run)
    svas = [store.get(sva_id) for sva_id in run.stage_artifacts.get("svas", [])]
    if not svas:
        raise AssertflowError(f"run {args.run} has no generated assertions")
    suites = _load_suites(args.suites)
    report = metrics_mod.compute_report(svas, suites, run_ref=run.run_id)
    rendered = metrics_mod.emit_report(report, args.format)
    if args.save:
        store.save_report(run.run_id, report.to_doc())
    if args.out:
        out = Path(args.out)
        out.write_text(rendered, encoding="utf-8")
        from assertflow.figures import render_report_figures

        figures = render_report_figures(report, out)
        print(f"wrote {out} and " + ", ".join(str(f) for f in figures))
    else:
        print(rendered, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from assertflow.service import ServiceConfig, create_app

    store = open_store(args.store)
    pipeline_config = load_pipeline_config(args.config) if args.config else None
    bridge_agents = load_bridge_agents(args.bridge_config) if args.bridge_config else {}
    runtime = AgentRuntime(base_dir=Path(args.config).parent if args.config else None)
    app = create_app(store, pipeline_config, runtime,
                     ServiceConfig(token=args.token, run_sync=args.sync,
                                   bridge_agents=bridge_agents))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_HANDLERS = {
    ("sva", "lint"): cmd_sva_lint,
    ("sva", "eval"): cmd_sva_eval,
    ("equiv", None): cmd_equiv,
    ("pipeline", "run"): cmd_pipeline_run,
    ("bridge", "synth"): cmd_bridge_synth,
    ("bridge", "simulate-filter"): cmd_simulate_filter,
    ("bridge", "build-dataset"): cmd_build_dataset,
    ("metrics", "report"): cmd_metrics_report,
    ("serve", None): cmd_serve,
}


def cli_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    second = getattr(args, f"{args.command}_command", None) \
        if args.command in ("sva", "pipeline", "bridge", "metrics") else None
    handler = _HANDLERS[(args.command, second)]
    try:
        return handler(args)
    except AssertflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
