"""Workload execution and the lossy communication-tracing model.

One simulation run drives a seeded multi-initiator workload over a
system spec and pushes every emitted event through a model of the
on-chip tracing hardware: a monitor per enabled link feeding a bounded
FIFO queue, and one shared trace port that off-loads queued events in a
time-multiplexed, round-robin fashion.  When a queue is full the newest
detected event is dropped, which is the only loss mechanism.

Per cycle the pipeline is:

1. every instance whose next transition is due fires it and emits the
   labeled event on its link (a link carries at most one event per
   cycle; colliding emissions are pushed to the next cycle),
2. each enabled link's monitor enqueues the event if it is selected for
   observation, dropping it when the queue is full,
3. the output controller dequeues up to ``port_bandwidth`` events,
   scanning the queues round-robin and resuming after the last serviced
   link.

Randomness comes exclusively from ``WorkloadConfig.seed``, driving a
single Mersenne-Twister generator (``random.Random``) whose draw order
is fixed: per-initiator initiation delays and flow choices first, then
transition choices and latencies in firing order.  Identical inputs
therefore produce bit-identical results.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .flow_model import Event, Flow, enabled_transitions, fire
from .spec_io import SystemSpec

__all__ = [
    "ConfigError",
    "EventRecord",
    "InstanceTag",
    "Livelock",
    "ObservabilityConfig",
    "SimulationResult",
    "WorkloadConfig",
    "event_generation_trace",
    "records_csv",
    "run_simulation",
    "summary_json",
]

DEFAULT_CYCLE_BUDGET = 1_000_000


class ConfigError(Exception):
    """Observability configuration inconsistent with the system spec."""


class Livelock(Exception):
    """An instance failed to finish within the configured cycle budget."""


@dataclass(frozen=True, order=True)
class InstanceTag:
    """Unique identity of one flow instance within a run."""

    flow: str
    initiator: str
    seq: int

    def __str__(self) -> str:
        return f"{self.flow}#{self.initiator}.{self.seq}"


@dataclass(frozen=True)
class EventRecord:
    """One timestamped, instance-tagged event observation.

    ``transition`` is only present on ground-truth records; monitors see
    events, not the transitions that produced them.
    """

    cycle: int
    event: Event
    link: str
    tag: InstanceTag
    transition: str | None = None


@dataclass(frozen=True)
class WorkloadConfig:
    """Seeded random workload: who initiates how many instances, how fast."""

    instances_per_initiator: int = 100
    initiation_delay: tuple[int, int] = (1, 10)
    transition_latency: tuple[int, int] = (1, 5)
    seed: int = 1

    def __post_init__(self) -> None:
        if self.instances_per_initiator < 1:
            raise ValueError("instances_per_initiator must be positive")
        for name in ("initiation_delay", "transition_latency"):
            lo, hi = getattr(self, name)
            if lo < 1 or lo > hi:
                raise ValueError(f"{name} must satisfy 1 <= min <= max")


@dataclass(frozen=True)
class ObservabilityConfig:
    """Which events are observed and with what queue resources."""

    selected_events: frozenset[Event]
    enabled_links: frozenset[str]
    queue_capacity: Mapping[str, int]
    port_bandwidth: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "selected_events", frozenset(self.selected_events))
        object.__setattr__(self, "enabled_links", frozenset(self.enabled_links))
        object.__setattr__(self, "queue_capacity", dict(self.queue_capacity))

    @classmethod
    def uniform(
        cls,
        events: Iterable[Event],
        event_link_map: Mapping[Event, str],
        capacity: int,
        port_bandwidth: int = 1,
    ) -> "ObservabilityConfig":
        """Enable exactly the links carrying ``events``, same capacity each."""
        selected = frozenset(events)
        links = frozenset(event_link_map[e] for e in selected)
        return cls(selected, links, {l: capacity for l in links}, port_bandwidth)


@dataclass(frozen=True)
class SimulationResult:
    """Ground truth, the lossy observed trace, and per-link accounting."""

    ground_truth: tuple[EventRecord, ...]
    observed: tuple[EventRecord, ...]
    drops: Mapping[str, int]
    max_occupancy: Mapping[str, int]
    detected: Mapping[str, int]
    residual: Mapping[str, int]
    cycles: int
    selected_events: frozenset[Event]
    enabled_links: frozenset[str]

    @property
    def total_drops(self) -> int:
        return sum(self.drops.values())

    @property
    def total_residual(self) -> int:
        return sum(self.residual.values())

    @property
    def lossless(self) -> bool:
        """True when every detected event made it into the observed trace."""
        return self.total_drops == 0 and self.total_residual == 0

    def instances_per_flow(self) -> dict[str, int]:
        tags: dict[str, set[InstanceTag]] = {}
        for rec in self.ground_truth:
            tags.setdefault(rec.tag.flow, set()).add(rec.tag)
        return {flow: len(s) for flow, s in tags.items()}


class _Instance:
    """Mutable per-instance execution state; internal to the engine."""

    __slots__ = ("tag", "flow", "marking", "birth", "order", "next_transition")

    def __init__(self, tag: InstanceTag, flow: Flow, birth: int, order: int):
        self.tag = tag
        self.flow = flow
        self.marking = flow.initial
        self.birth = birth
        self.order = order
        self.next_transition: str | None = None


def _check_config(spec: SystemSpec, obs: ObservabilityConfig) -> None:
    unknown = obs.selected_events - spec.all_events
    if unknown:
        sample = sorted(unknown, key=lambda e: (e.src, e.dest, e.cmd))[0]
        raise ConfigError(f"selected event {sample} is not part of any flow")
    elmap = spec.topology.event_link_map
    expected = frozenset(elmap[e] for e in obs.selected_events)
    if expected != obs.enabled_links:
        raise ConfigError(
            "enabled_links must be exactly the links of the selected events"
        )
    for link in obs.enabled_links:
        cap = obs.queue_capacity.get(link, 0)
        if cap < 1:
            raise ConfigError(f"enabled link {link} needs a positive queue capacity")
    if obs.port_bandwidth < 1:
        raise ConfigError("port_bandwidth must be positive")


def run_simulation(
    spec: SystemSpec,
    workload: WorkloadConfig,
    obs: ObservabilityConfig,
    *,
    drain: bool = True,
    cycle_budget: int = DEFAULT_CYCLE_BUDGET,
) -> SimulationResult:
    """Execute the workload and the tracing model; fully deterministic.

    Every initiator starts exactly ``instances_per_initiator`` instances,
    each of which runs to its end marking in the ground truth.  With
    ``drain`` enabled (the default) the controller keeps off-loading
    after the last instance completes until all queues are empty, so
    detected events split exactly into observed and dropped; with
    ``drain=False`` events still queued at the end are reported as
    residual instead.
    """
    _check_config(spec, obs)
    elmap = spec.topology.event_link_map
    rng = random.Random(workload.seed)

    # Pre-drawn initiation schedule: delays accumulate per initiator and
    # each initiation picks one of the initiator's flows uniformly.
    schedule: list[tuple[int, str, int, str]] = []
    for initiator, flow_ids in spec.initiators:
        at = 0
        choices = sorted(flow_ids)
        for seq in range(workload.instances_per_initiator):
            at += rng.randint(*workload.initiation_delay)
            schedule.append((at, initiator, seq, rng.choice(choices)))
    schedule.sort(key=lambda item: (item[0], item[1], item[2]))

    queues: dict[str, deque[EventRecord]] = {l: deque() for l in obs.enabled_links}
    rr_order = sorted(obs.enabled_links)
    rr_pos = len(rr_order) - 1  # controller starts its scan at rr_order[0]
    drops = dict.fromkeys(obs.enabled_links, 0)
    detected = dict.fromkeys(obs.enabled_links, 0)
    max_occupancy = dict.fromkeys(obs.enabled_links, 0)
    ground: list[EventRecord] = []
    observed: list[EventRecord] = []

    pending: list[tuple[int, int, _Instance]] = []  # (due, order, instance)
    sched_pos = 0
    order_counter = 0
    cycle = 0
    lat_lo, lat_hi = workload.transition_latency

    def schedule_next(inst: _Instance, now: int) -> None:
        enabled = sorted(enabled_transitions(inst.flow, inst.marking))
        if not enabled:
            return  # reached the end marking
        pick = enabled[0] if len(enabled) == 1 else rng.choice(enabled)
        inst.next_transition = pick
        heapq.heappush(pending, (now + rng.randint(lat_lo, lat_hi), inst.order, inst))

    while True:
        have_work = bool(pending) or sched_pos < len(schedule)
        queued = any(queues.values())
        if not have_work and not (drain and queued):
            break

        # Idle-cycle skip: nothing due and nothing queued to off-load.
        if not queued:
            horizon = []
            if pending:
                horizon.append(pending[0][0])
            if sched_pos < len(schedule):
                horizon.append(schedule[sched_pos][0])
            nxt = min(horizon)
            if nxt > cycle:
                cycle = nxt

        # (1) Fire due transitions, serializing one event per link per cycle.
        link_used: set[str] = set()
        due: list[_Instance] = []
        while pending and pending[0][0] <= cycle:
            due.append(heapq.heappop(pending)[2])
        for inst in due:
            if cycle - inst.birth > cycle_budget:
                raise Livelock(
                    f"instance {inst.tag} still running after {cycle_budget} cycles"
                )
            tid = inst.next_transition
            assert tid is not None
            event = inst.flow.labeling[tid]
            link = elmap[event]
            if link in link_used:
                heapq.heappush(pending, (cycle + 1, inst.order, inst))
                continue
            link_used.add(link)
            record = EventRecord(cycle, event, link, inst.tag, tid)
            ground.append(record)
            # (2) Monitor: enqueue selected events, drop-newest when full.
            if link in queues and event in obs.selected_events:
                detected[link] += 1
                q = queues[link]
                if len(q) < obs.queue_capacity[link]:
                    q.append(replace(record, transition=None))
                    if len(q) > max_occupancy[link]:
                        max_occupancy[link] = len(q)
                else:
                    drops[link] += 1
            inst.marking = fire(inst.flow, inst.marking, tid)
            schedule_next(inst, cycle)

        # New instances initiate after all firings of the cycle.
        while sched_pos < len(schedule) and schedule[sched_pos][0] <= cycle:
            at, initiator, seq, flow_id = schedule[sched_pos]
            sched_pos += 1
            inst = _Instance(
                InstanceTag(flow_id, initiator, seq),
                spec.flow_by_id[flow_id],
                cycle,
                order_counter,
            )
            order_counter += 1
            schedule_next(inst, cycle)

        # (3) Output controller: round-robin off-load.
        budget = obs.port_bandwidth
        while budget > 0 and rr_order:
            for step in range(1, len(rr_order) + 1):
                idx = (rr_pos + step) % len(rr_order)
                q = queues[rr_order[idx]]
                if q:
                    observed.append(q.popleft())
                    rr_pos = idx
                    budget -= 1
                    break
            else:
                break

        cycle += 1

    residual = {l: len(q) for l, q in queues.items()}
    return SimulationResult(
        ground_truth=tuple(ground),
        observed=tuple(observed),
        drops=drops,
        max_occupancy=max_occupancy,
        detected=detected,
        residual=residual,
        cycles=cycle,
        selected_events=obs.selected_events,
        enabled_links=obs.enabled_links,
    )


def event_generation_trace(
    result: SimulationResult,
) -> dict[int, list[tuple[str, Event]]]:
    """Per-cycle histogram of detected events (link, event) pairs.

    The summed sizes equal the total detected count; spikes above the
    port bandwidth explain where queue pressure and drops come from.
    """
    out: dict[int, list[tuple[str, Event]]] = {}
    for rec in result.ground_truth:
        if rec.link in result.enabled_links and rec.event in result.selected_events:
            out.setdefault(rec.cycle, []).append((rec.link, rec.event))
    return out


def records_csv(records: Iterable[EventRecord], include_transition: bool = False) -> str:
    """Render records in the line-per-event export format."""
    header = "cycle,link,src,dest,cmd,flow,initiator,seq"
    if include_transition:
        header += ",transition"
    lines = [header]
    for r in records:
        line = (
            f"{r.cycle},{r.link},{r.event.src},{r.event.dest},{r.event.cmd},"
            f"{r.tag.flow},{r.tag.initiator},{r.tag.seq}"
        )
        if include_transition:
            line += f",{r.transition or ''}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def summary_json(result: SimulationResult) -> dict:
    """JSON-ready accounting summary of one run."""
    return {
        "cycles": result.cycles,
        "ground_truth_events": len(result.ground_truth),
        "observed_events": len(result.observed),
        "detected": dict(sorted(result.detected.items())),
        "drops": dict(sorted(result.drops.items())),
        "residual": dict(sorted(result.residual.items())),
        "max_occupancy": dict(sorted(result.max_occupancy.items())),
        "total_drops": result.total_drops,
        "total_residual": result.total_residual,
    }
