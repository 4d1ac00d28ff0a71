"""Command-line front end.

Subcommands:

* ``validate <spec>``      parse a spec file and report findings
* ``paths <spec> <flow>``  print every execution path of one flow
* ``select <spec>``        compute an event selection (fic / cec / fc)
* ``simulate <spec>``      run one simulation and export traces
* ``run <plan.json>``      run an experiment grid, emit cell JSON + table
* ``compare <plan.json>``  run all four selection methods side by side

Exit codes: 0 on success, 1 for validation or selection findings, 2 for
I/O and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coverage import reconstruct, score
from .experiment import (
    ExperimentPlan,
    aggregate_cells,
    build_selection,
    compare_methods,
    format_comparison_table,
    format_grid_table,
    load_plan,
    load_spec_source,
    observability_for,
    rows_csv,
    run_plan,
)
from .flow_model import Event, enumerate_paths
from .selection import Selection
from .spec_io import SpecSemanticError, SpecSyntaxError, parse_system
from .tracing_sim import (
    ConfigError,
    WorkloadConfig,
    records_csv,
    run_simulation,
    summary_json,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_IO = 2


def _read_spec(path: str):
    if path == "prototype":
        return load_spec_source(path)
    return parse_system(Path(path).read_text(encoding="utf-8"))


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        spec = _read_spec(args.spec)
    except (SpecSyntaxError, SpecSemanticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    print(
        f"{spec.name}: {len(spec.flows)} flows, "
        f"{len(spec.topology.links)} links, "
        f"{len(spec.topology.components)} components: ok"
    )
    return EXIT_OK


def cmd_paths(args: argparse.Namespace) -> int:
    spec = _read_spec(args.spec)
    flow = spec.flow_by_id.get(args.flow_id)
    if flow is None:
        print(f"error: no flow {args.flow_id!r} in {spec.name}", file=sys.stderr)
        return EXIT_FINDINGS
    for path in enumerate_paths(flow, max_paths=args.max_paths):
        print(",".join(path.transitions))
    return EXIT_OK


def _selection_json(spec, selection: Selection | None, events, obs) -> dict:
    return {
        "events": [
            {
                "src": e.src,
                "dest": e.dest,
                "cmd": e.cmd,
                "link": spec.topology.event_link_map[e],
                "reason": selection.rationale.get(e, "ALL") if selection else "ALL",
            }
            for e in sorted(events, key=lambda e: (e.src, e.dest, e.cmd))
        ],
        "links": sorted(obs.enabled_links),
        "undistinguishable": (
            [
                {"flow": fid, "paths": [list(a), list(b)]}
                for fid, a, b in selection.undistinguishable
            ]
            if selection
            else []
        ),
        "observability": {
            "queue_capacity": dict(sorted(obs.queue_capacity.items())),
            "port_bandwidth": obs.port_bandwidth,
        },
    }


def cmd_select(args: argparse.Namespace) -> int:
    spec = _read_spec(args.spec)
    method = args.metric if args.metric != "fc" else f"fc:{args.k}"
    scope = tuple(args.scope.split(",")) if args.scope else None
    selection, events = build_selection(spec, scope, method, args.capacity)
    obs = observability_for(spec, events, args.capacity, args.port_bandwidth)
    body = _selection_json(spec, selection, events, obs)
    text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out} ({len(events)} events on {len(obs.enabled_links)} links)")
    else:
        print(text, end="")
    if selection is not None and selection.undistinguishable:
        print(
            f"warning: {len(selection.undistinguishable)} path pair(s) share "
            "identical label sequences and stay undistinguishable",
            file=sys.stderr,
        )
        return EXIT_FINDINGS
    return EXIT_OK


def _events_from_selection_file(path: str) -> frozenset[Event]:
    body = json.loads(Path(path).read_text(encoding="utf-8"))
    return frozenset(
        Event(item["src"], item["dest"], item["cmd"]) for item in body["events"]
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _read_spec(args.spec)
    if args.selection:
        events = _events_from_selection_file(args.selection)
    else:
        events = spec.all_events
    obs = observability_for(spec, events, args.capacity, args.port_bandwidth)
    workload = WorkloadConfig(
        instances_per_initiator=args.instances, seed=args.seed
    )
    result = run_simulation(spec, workload, obs, drain=not args.no_drain)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ground_truth.csv").write_text(
        records_csv(result.ground_truth, include_transition=True), encoding="utf-8"
    )
    (out_dir / "observed.csv").write_text(
        records_csv(result.observed), encoding="utf-8"
    )

    recons = reconstruct(
        result.observed,
        spec,
        selected_events=result.selected_events,
        lossless=result.lossless,
    )
    totals = result.instances_per_flow()
    report = score(recons, sum(totals.values()), totals)
    summary = summary_json(result)
    summary["coverage"] = report.to_json()
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(report.format_table())
    print(
        f"events: {len(result.ground_truth)} emitted, "
        f"{len(result.observed)} observed, {result.total_drops} dropped, "
        f"{result.total_residual} residual over {result.cycles} cycles"
    )
    print(f"wrote {out_dir}/ground_truth.csv observed.csv summary.json")
    return EXIT_OK


def _load_plan_file(path: str) -> ExperimentPlan:
    return load_plan(json.loads(Path(path).read_text(encoding="utf-8")))


def cmd_run(args: argparse.Namespace) -> int:
    plan = _load_plan_file(args.plan)
    spec = load_spec_source(plan.spec_source)
    paths = run_plan(plan, spec)
    rows = aggregate_cells(paths)
    out_dir = Path(plan.out_dir)
    (out_dir / "summary.csv").write_text(rows_csv(rows), encoding="utf-8")
    print(format_grid_table(rows))
    print(f"wrote {len(paths)} cell files and summary.csv to {out_dir}/")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    plan = _load_plan_file(args.plan)
    spec = load_spec_source(plan.spec_source)
    paths = compare_methods(plan, spec)
    rows = aggregate_cells(paths)
    out_dir = Path(plan.out_dir)
    (out_dir / "comparison.csv").write_text(rows_csv(rows), encoding="utf-8")
    print(format_comparison_table(rows))
    print(f"wrote {len(paths)} cell files and comparison.csv to {out_dir}/")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowtrace",
        description="Flow observability modeling, simulation and selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a spec file")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="print the execution paths of a flow")
    p.add_argument("spec")
    p.add_argument("flow_id")
    p.add_argument("--max-paths", type=int, default=4096)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("select", help="compute an event selection")
    p.add_argument("spec")
    p.add_argument("--metric", choices=("fic", "cec", "fc"), required=True)
    p.add_argument("--k", type=int, default=16, help="event count for --metric fc")
    p.add_argument("--scope", help="comma-separated initiator list")
    p.add_argument("--capacity", type=int, default=8, help="base queue capacity")
    p.add_argument("--port-bandwidth", type=int, default=1)
    p.add_argument("--out", help="write the selection JSON here")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="run one simulation")
    p.add_argument("spec")
    p.add_argument("--selection", help="selection JSON from 'select'")
    p.add_argument("--capacity", type=int, default=8)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--port-bandwidth", type=int, default=1)
    p.add_argument("--no-drain", action="store_true")
    p.add_argument("--out-dir", default="sim_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run an experiment plan")
    p.add_argument("plan")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="compare selection methods")
    p.add_argument("plan")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecSyntaxError, SpecSemanticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except (OSError, json.JSONDecodeError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
