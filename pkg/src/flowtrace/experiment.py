"""Experiment grid: selection x capacity x seed cells, with aggregation.

A plan names a spec, an observation scope, a selection method, a list of
base queue capacities and a seed list.  Each cell runs the full pipeline
(select events, re-allocate queue capacity onto the enabled links, run
the simulation, reconstruct and score) and is written to its own JSON
file; aggregate tables are recomputed purely from those files, so they
can be rebuilt offline.  Cell file bodies contain no timestamps and all
dictionaries are key-sorted, which makes re-runs byte-identical.
"""

from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .coverage import reconstruct, score
from .flow_model import Event
from .selection import (
    Selection,
    SelectionProblem,
    reallocate_queues,
    select_cec,
    select_fc_baseline,
    select_fic,
)
from .spec_io import SystemSpec, load_prototype, parse_system
from .tracing_sim import (
    ObservabilityConfig,
    WorkloadConfig,
    run_simulation,
)

__all__ = [
    "DEFAULT_SEEDS",
    "SEED_ENV_VAR",
    "ExperimentPlan",
    "aggregate_cells",
    "cell_filename",
    "compare_methods",
    "format_comparison_table",
    "format_grid_table",
    "load_plan",
    "load_spec_source",
    "ratio_cell",
    "rows_csv",
    "run_cell",
    "run_plan",
    "scoped_flows",
    "observability_for",
    "build_selection",
    "method_label",
]

DEFAULT_SEEDS: tuple[int, ...] = tuple(range(1, 11))
SEED_ENV_VAR = "FLOWTRACE_SEEDS"
COMPARE_METHODS: tuple[str, ...] = ("none", "fic", "cec", "fc:16")


def _seeds_from_env() -> tuple[int, ...] | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if not raw:
        return None
    return tuple(int(part) for part in raw.replace(",", " ").split())


def default_seeds() -> tuple[int, ...]:
    """The built-in seed list, overridable via ``FLOWTRACE_SEEDS`` for CI."""
    return _seeds_from_env() or DEFAULT_SEEDS


@dataclass(frozen=True)
class ExperimentPlan:
    """One experiment grid over (selection method, capacity, seed)."""

    spec_source: str = "prototype"
    scope: tuple[str, ...] | None = None  # initiator subset; None means ALL
    selection_method: str = "none"  # none | fic | cec | fc:<k>
    capacities: tuple[int, ...] = (8,)
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    instances_per_initiator: int = 100
    initiation_delay: tuple[int, int] = (1, 10)
    transition_latency: tuple[int, int] = (1, 5)
    port_bandwidth: int = 1
    drain: bool = True
    out_dir: str = "results"

    def __post_init__(self) -> None:
        if not self.capacities:
            raise ValueError("plan needs at least one capacity")
        if not self.seeds:
            raise ValueError("plan needs at least one seed")
        _parse_method(self.selection_method)

    def workload(self, seed: int) -> WorkloadConfig:
        return WorkloadConfig(
            instances_per_initiator=self.instances_per_initiator,
            initiation_delay=self.initiation_delay,
            transition_latency=self.transition_latency,
            seed=seed,
        )


def _parse_method(method: str) -> tuple[str, int | None]:
    method = method.lower()
    if method in ("none", "fic", "cec"):
        return method, None
    if method.startswith("fc:"):
        k = int(method.split(":", 1)[1])
        if k < 1:
            raise ValueError("fc selection needs a positive k")
        return "fc", k
    raise ValueError(f"unknown selection method {method!r}")


def method_label(method: str) -> str:
    kind, k = _parse_method(method)
    return f"fc{k}" if kind == "fc" else kind


def load_plan(data: Mapping) -> ExperimentPlan:
    """Build a plan from parsed JSON, applying the CI seed override."""
    scope = data.get("scope")
    if scope in (None, "ALL", "all"):
        scope_tuple = None
    elif isinstance(scope, str):
        scope_tuple = (scope,)
    else:
        scope_tuple = tuple(scope)
        if not scope_tuple:
            raise ValueError("scope must name at least one initiator")
    workload = data.get("workload", {})
    seeds = data.get("seeds")
    env_seeds = _seeds_from_env()
    if seeds is None:
        seeds_tuple = env_seeds or DEFAULT_SEEDS
    else:
        seeds_tuple = tuple(int(s) for s in seeds)
    return ExperimentPlan(
        spec_source=data.get("spec", "prototype"),
        scope=scope_tuple,
        selection_method=str(data.get("selection", "none")),
        capacities=tuple(int(c) for c in data.get("capacities", [8])),
        seeds=seeds_tuple,
        instances_per_initiator=int(
            workload.get("instances_per_initiator", 100)
        ),
        initiation_delay=tuple(workload.get("initiation_delay", (1, 10))),
        transition_latency=tuple(workload.get("transition_latency", (1, 5))),
        port_bandwidth=int(data.get("port_bandwidth", 1)),
        drain=bool(data.get("drain", True)),
        out_dir=str(data.get("out_dir", "results")),
    )


def load_spec_source(source: str) -> SystemSpec:
    if source == "prototype":
        return load_prototype()
    return parse_system(Path(source).read_text(encoding="utf-8"))


def scoped_flows(spec: SystemSpec, scope: tuple[str, ...] | None):
    if scope is None:
        return spec.flows
    known = {c for c, _ in spec.initiators}
    unknown = set(scope) - known
    if unknown:
        raise ValueError(f"unknown initiators in scope: {sorted(unknown)}")
    flows = spec.flows_of_initiators(scope)
    if not flows:
        raise ValueError("scope selects no flows")
    return flows


def build_selection(
    spec: SystemSpec,
    scope: tuple[str, ...] | None,
    method: str,
    base_capacity: int,
) -> tuple[Selection | None, frozenset[Event]]:
    """Resolve a method name into the selected event set for a scope."""
    flows = scoped_flows(spec, scope)
    kind, k = _parse_method(method)
    if kind == "none":
        events: set[Event] = set()
        for f in flows:
            events |= f.events
        return None, frozenset(events)
    problem = SelectionProblem(
        flows,
        spec.topology.event_link_map,
        base_capacity * len(spec.topology.links),
    )
    if kind == "fic":
        sel = select_fic(problem)
    elif kind == "cec":
        sel = select_cec(problem)
    else:
        sel = select_fc_baseline(problem, k or 16)
    return sel, sel.events


def observability_for(
    spec: SystemSpec,
    events: frozenset[Event],
    base_capacity: int,
    port_bandwidth: int = 1,
) -> ObservabilityConfig:
    """Enable the events' links with re-allocated queue capacities."""
    elmap = spec.topology.event_link_map
    links = frozenset(elmap[e] for e in events)
    all_links = [l.id for l in spec.topology.links]
    capacities = reallocate_queues(base_capacity, all_links, links)
    return ObservabilityConfig(events, links, capacities, port_bandwidth)


def run_cell(
    spec: SystemSpec,
    plan: ExperimentPlan,
    method: str,
    capacity: int,
    seed: int,
) -> dict:
    """Run one (method, capacity, seed) cell and return its JSON body."""
    selection, events = build_selection(spec, plan.scope, method, capacity)
    obs = observability_for(spec, events, capacity, plan.port_bandwidth)
    result = run_simulation(spec, plan.workload(seed), obs, drain=plan.drain)

    scope_ids = {f.id for f in scoped_flows(spec, plan.scope)}
    recons = [
        r
        for r in reconstruct(
            result.observed,
            spec,
            selected_events=result.selected_events,
            lossless=result.lossless,
        )
        if r.tag.flow in scope_ids
    ]
    per_flow_n = {
        fid: n
        for fid, n in result.instances_per_flow().items()
        if fid in scope_ids
    }
    for fid in scope_ids:
        per_flow_n.setdefault(fid, 0)
    total = sum(per_flow_n.values())
    report = score(recons, total, per_flow_n)

    observed_per_link: dict[str, int] = dict.fromkeys(result.enabled_links, 0)
    for record in result.observed:
        observed_per_link[record.link] += 1
    # Conservation must hold per link in every cell.
    for link in result.enabled_links:
        assert result.detected[link] == (
            observed_per_link[link] + result.drops[link] + result.residual[link]
        ), f"conservation violated on {link}"

    return {
        "method": method_label(method),
        "capacity": capacity,
        "seed": seed,
        "scope": sorted(plan.scope) if plan.scope else "ALL",
        "links": sorted(obs.enabled_links),
        "link_count": len(obs.enabled_links),
        "selected_events": sorted(str(e) for e in events),
        "rationale": (
            {str(e): r for e, r in sorted(selection.rationale.items())}
            if selection
            else {}
        ),
        "coverage": report.to_json(),
        "lossless": result.lossless,
        "cycles": result.cycles,
        "ground_truth_events": len(result.ground_truth),
        "observed_events": len(result.observed),
        "detected": dict(sorted(result.detected.items())),
        "drops": dict(sorted(result.drops.items())),
        "residual": dict(sorted(result.residual.items())),
        "max_occupancy": dict(sorted(result.max_occupancy.items())),
    }


def cell_filename(method: str, capacity: int, seed: int) -> str:
    return f"{method_label(method)}_{capacity}_{seed}.json"


def write_cell(out_dir: Path, body: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    # body["method"] is already the file label (e.g. "fc16").
    path = out_dir / f"{body['method']}_{body['capacity']}_{body['seed']}.json"
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_plan(plan: ExperimentPlan, spec: SystemSpec | None = None) -> list[Path]:
    """Run every cell of the plan; returns the written cell files."""
    spec = spec or load_spec_source(plan.spec_source)
    out_dir = Path(plan.out_dir)
    paths = []
    for capacity in plan.capacities:
        for seed in plan.seeds:
            body = run_cell(spec, plan, plan.selection_method, capacity, seed)
            paths.append(write_cell(out_dir, body))
    return paths


def compare_methods(
    plan: ExperimentPlan, spec: SystemSpec | None = None
) -> list[Path]:
    """Run the four canonical methods on identical seeds and budget."""
    spec = spec or load_spec_source(plan.spec_source)
    out_dir = Path(plan.out_dir)
    capacity = plan.capacities[0]
    paths = []
    for method in COMPARE_METHODS:
        for seed in plan.seeds:
            body = run_cell(spec, plan, method, capacity, seed)
            paths.append(write_cell(out_dir, body))
    return paths


def ratio_cell(numerator: float, denominator: int) -> str:
    """Render one ``A/B (r)`` table cell."""
    ratio = numerator / denominator if denominator else 0.0
    return f"{numerator:g}/{denominator} ({ratio:.3g})"


def aggregate_cells(paths: Iterable[Path | str]) -> list[dict]:
    """Median-over-seeds rows grouped by (method, capacity).

    A pure function of the cell files, so tables can be recomputed
    offline from previously written results.
    """
    groups: dict[tuple[str, int], list[dict]] = {}
    for path in paths:
        body = json.loads(Path(path).read_text(encoding="utf-8"))
        groups.setdefault((body["method"], body["capacity"]), []).append(body)
    rows = []
    for (method, capacity), cells in sorted(groups.items()):
        totals = {c["coverage"]["total"] for c in cells}
        if len(totals) != 1:
            raise ValueError(
                f"cells of {method}@{capacity} disagree on instance totals"
            )
        total = totals.pop()
        observed = statistics.median(c["coverage"]["observed"] for c in cells)
        complete = statistics.median(c["coverage"]["complete"] for c in cells)
        links = max(c["link_count"] for c in cells)
        rows.append(
            {
                "method": method,
                "capacity": capacity,
                "links": links,
                "seeds": len(cells),
                "total": total,
                "observed_median": observed,
                "complete_median": complete,
                "fic": observed / total if total else 0.0,
                "cec": complete / total if total else 0.0,
                "fic_cell": ratio_cell(observed, total),
                "cec_cell": ratio_cell(complete, total),
            }
        )
    return rows


def format_grid_table(rows: Sequence[dict]) -> str:
    header = f"{'method':<8} {'cap':>4} {'links':>5} {'FIC':>18} {'CEC':>18}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row['method']:<8} {row['capacity']:>4} {row['links']:>5} "
            f"{row['fic_cell']:>18} {row['cec_cell']:>18}"
        )
    return "\n".join(lines)


def format_comparison_table(rows: Sequence[dict]) -> str:
    order = {method_label(m): i for i, m in enumerate(COMPARE_METHODS)}
    rows = sorted(rows, key=lambda r: order.get(r["method"], 99))
    header = f"{'method':<8} {'links':>5} {'FIC':>18} {'CEC':>18}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row['method']:<8} {row['links']:>5} "
            f"{row['fic_cell']:>18} {row['cec_cell']:>18}"
        )
    return "\n".join(lines)


def rows_csv(rows: Sequence[dict]) -> str:
    cols = [
        "method",
        "capacity",
        "links",
        "seeds",
        "total",
        "observed_median",
        "complete_median",
        "fic",
        "cec",
    ]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in cols))
    return "\n".join(lines) + "\n"
