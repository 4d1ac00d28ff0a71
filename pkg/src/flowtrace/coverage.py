"""Reconstruction of flow executions from observed traces, and scoring.

Reconstruction groups observed records by instance tag, restores each
instance's emission order from the per-record cycle stamps (queuing skews
cross-link off-load order, but timestamps are trustworthy), and computes
which execution paths of the flow are consistent with what was seen:

* In the general lossy case a path is a candidate when the instance's
  observed label sequence embeds into the path's label sequence as an
  order-preserving subsequence; losing records can only widen the set.
* When the run is known to be loss-free (the trace hardware reports zero
  drops and nothing left in the queues) the observed sequence must equal
  the path's projection onto the selected event set exactly, which is
  what makes a fully observed instance resolve to a unique path.

Scoring turns reconstructions into the two coverage ratios: FIC (share
of executed instances with at least one observed event) and CEC (share
whose start and end events were both observed), plus the fraction of
complete instances whose path is uniquely determined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .flow_model import (
    Event,
    FlowPath,
    end_events,
    enumerate_paths,
    path_labels,
    start_events,
)
from .spec_io import SystemSpec
from .tracing_sim import EventRecord, InstanceTag, SimulationResult

__all__ = [
    "CoverageReport",
    "InconsistentTrace",
    "InstanceReconstruction",
    "Interleaving",
    "interleavings",
    "reconstruct",
    "reconstruct_result",
    "score",
]


class InconsistentTrace(Exception):
    """An instance's observations match no execution path of its flow."""


@dataclass(frozen=True)
class InstanceReconstruction:
    """What one flow instance's observed events reveal about its execution.

    ``observed_events`` is in emission order (sorted by cycle stamp).
    ``start_seen``/``end_seen`` carry ``(offload_index, cycle)`` of the
    first observed start event and the last observed end event, the
    coordinates used for interleaving extraction.
    """

    tag: InstanceTag
    observed_events: tuple[EventRecord, ...]
    started: bool
    completed: bool
    candidate_paths: tuple[FlowPath, ...]
    start_seen: tuple[int, int] | None = None
    end_seen: tuple[int, int] | None = None


def _is_subsequence(needle: Sequence[Event], haystack: Sequence[Event]) -> bool:
    it = iter(haystack)
    return all(x in it for x in needle)


def reconstruct(
    observed: Iterable[EventRecord],
    spec: SystemSpec,
    selected_events: frozenset[Event] | None = None,
    lossless: bool = False,
) -> list[InstanceReconstruction]:
    """One reconstruction per distinct tag seen in the observed trace.

    ``selected_events`` is the observability the trace was captured
    under; it is required for ``lossless`` (exact-projection) matching.
    Raises :class:`InconsistentTrace` when some tag matches no path,
    which signals a corrupted trace or a spec/simulator mismatch.
    """
    if lossless and selected_events is None:
        raise ValueError("lossless matching requires the selected event set")

    groups: dict[InstanceTag, list[tuple[int, EventRecord]]] = {}
    for index, rec in enumerate(observed):
        groups.setdefault(rec.tag, []).append((index, rec))

    paths_cache: dict[str, list[FlowPath]] = {}
    labels_cache: dict[str, list[tuple[Event, ...]]] = {}
    starts_cache: dict[str, frozenset[Event]] = {}
    ends_cache: dict[str, frozenset[Event]] = {}

    out: list[InstanceReconstruction] = []
    for tag, indexed in groups.items():
        flow = spec.flow_by_id.get(tag.flow)
        if flow is None:
            raise ValueError(f"observed tag {tag} references unknown flow")
        if tag.flow not in paths_cache:
            paths_cache[tag.flow] = enumerate_paths(flow)
            labels_cache[tag.flow] = [
                path_labels(flow, p) for p in paths_cache[tag.flow]
            ]
            starts_cache[tag.flow] = start_events(flow)
            ends_cache[tag.flow] = end_events(flow)

        ordered = sorted(indexed, key=lambda pair: pair[1].cycle)
        records = tuple(rec for _, rec in ordered)
        labels = tuple(rec.event for rec in records)

        if lossless:
            assert selected_events is not None
            candidates = tuple(
                path
                for path, seq in zip(paths_cache[tag.flow], labels_cache[tag.flow])
                if tuple(e for e in seq if e in selected_events) == labels
            )
        else:
            candidates = tuple(
                path
                for path, seq in zip(paths_cache[tag.flow], labels_cache[tag.flow])
                if _is_subsequence(labels, seq)
            )
        if not candidates:
            raise InconsistentTrace(
                f"instance {tag}: observed events {[str(e) for e in labels]} "
                f"match no execution path of flow {tag.flow}"
            )

        starts, ends = starts_cache[tag.flow], ends_cache[tag.flow]
        started = any(e in starts for e in labels)
        completed = started and any(e in ends for e in labels)
        start_seen = next(
            ((i, r.cycle) for i, r in ordered if r.event in starts), None
        )
        end_seen = next(
            ((i, r.cycle) for i, r in reversed(ordered) if r.event in ends), None
        )
        out.append(
            InstanceReconstruction(
                tag=tag,
                observed_events=records,
                started=started,
                completed=completed,
                candidate_paths=candidates,
                start_seen=start_seen,
                end_seen=end_seen,
            )
        )
    out.sort(key=lambda r: r.observed_events[0].cycle if r.observed_events else 0)
    return out


def reconstruct_result(
    result: SimulationResult, spec: SystemSpec
) -> list[InstanceReconstruction]:
    """Reconstruct from a simulation result, using exact matching when the
    run is known loss-free."""
    return reconstruct(
        result.observed,
        spec,
        selected_events=result.selected_events,
        lossless=result.lossless,
    )


@dataclass(frozen=True)
class CoverageReport:
    """Coverage ratios over one observed trace."""

    fic: float
    cec: float
    observed_instances: int
    complete_instances: int
    total_instances: int
    path_resolved: float
    per_flow: Mapping[str, tuple[int, int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_flow", dict(self.per_flow))

    def to_json(self) -> dict:
        return {
            "fic": self.fic,
            "cec": self.cec,
            "observed": self.observed_instances,
            "complete": self.complete_instances,
            "total": self.total_instances,
            "path_resolved": self.path_resolved,
            "per_flow": {
                fid: {"observed": i, "complete": c, "total": n}
                for fid, (i, c, n) in sorted(self.per_flow.items())
            },
        }

    def format_table(self) -> str:
        """Human-readable per-flow table in the ``A/B (r)`` cell style."""

        def cell(a: int, b: int) -> str:
            ratio = a / b if b else 0.0
            return f"{a}/{b} ({ratio:g})"

        width = max([len("flow")] + [len(fid) for fid in self.per_flow])
        lines = [
            f"{'flow':<{width}}  {'FIC':>18}  {'CEC':>18}",
            f"{'ALL':<{width}}  "
            f"{cell(self.observed_instances, self.total_instances):>18}  "
            f"{cell(self.complete_instances, self.total_instances):>18}",
        ]
        for fid, (i, c, n) in sorted(self.per_flow.items()):
            lines.append(f"{fid:<{width}}  {cell(i, n):>18}  {cell(c, n):>18}")
        return "\n".join(lines)


def score(
    recons: Iterable[InstanceReconstruction],
    ground_truth_n: int,
    per_flow_n: Mapping[str, int],
) -> CoverageReport:
    """Fold reconstructions into FIC, CEC, and path-resolution ratios.

    ``ground_truth_n`` is the number of instances actually executed and
    ``per_flow_n`` its per-flow split, both taken from the simulator's
    ground truth (on silicon they would come from elsewhere or be fixed
    across compared observabilities).  Pure fold: permuting the input
    changes nothing.
    """
    recons = list(recons)
    distinct = {r.tag for r in recons}
    if len(distinct) != len(recons):
        raise ValueError("duplicate reconstruction tags")
    if ground_truth_n < len(distinct):
        raise ValueError("more reconstructed tags than executed instances")

    observed = sum(1 for r in recons if r.observed_events)
    complete = sum(1 for r in recons if r.completed)
    resolved = sum(
        1 for r in recons if r.completed and len(r.candidate_paths) == 1
    )
    per_flow: dict[str, tuple[int, int, int]] = {
        fid: (0, 0, n) for fid, n in per_flow_n.items()
    }
    for r in recons:
        i, c, n = per_flow.get(r.tag.flow, (0, 0, 0))
        per_flow[r.tag.flow] = (
            i + (1 if r.observed_events else 0),
            c + (1 if r.completed else 0),
            n,
        )
    return CoverageReport(
        fic=observed / ground_truth_n if ground_truth_n else 0.0,
        cec=complete / ground_truth_n if ground_truth_n else 0.0,
        observed_instances=observed,
        complete_instances=complete,
        total_instances=ground_truth_n,
        path_resolved=resolved / complete if complete else 1.0,
        per_flow=per_flow,
    )


class Interleaving(Enum):
    """How two completed flow instances relate in time."""

    CONTAINS = "contains"
    OVERLAPS = "overlaps"
    PRECEDES = "precedes"


def interleavings(
    recons: Iterable[InstanceReconstruction],
    use_emission_cycles: bool = False,
) -> list[tuple[InstanceTag, InstanceTag, Interleaving]]:
    """Pairwise interleaving relations between completed instances.

    By default an instance's interval is measured in off-load positions,
    which is all an observer of the trace port sees; with
    ``use_emission_cycles`` the monitors' cycle stamps are used instead.
    For each unordered pair exactly one relation is reported, oriented so
    it reads left to right: ``(a, b, PRECEDES)`` means ``a`` ended before
    ``b`` started, ``(a, b, CONTAINS)`` means ``a``'s interval strictly
    contains ``b``'s.  Boundary ties classify as ``OVERLAPS``: strict
    inequality is required for both PRECEDES and CONTAINS.
    """
    coord = 1 if use_emission_cycles else 0
    intervals: list[tuple[int, int, InstanceTag]] = []
    for r in recons:
        if not (r.completed and r.start_seen and r.end_seen):
            continue
        a, b = r.start_seen[coord], r.end_seen[coord]
        if a > b:  # off-load order can invert the endpoints; normalize
            a, b = b, a
        intervals.append((a, b, r.tag))
    intervals.sort(key=lambda iv: (iv[0], iv[1], iv[2]))

    out: list[tuple[InstanceTag, InstanceTag, Interleaving]] = []
    for i in range(len(intervals)):
        a0, a1, tag_a = intervals[i]
        for j in range(i + 1, len(intervals)):
            b0, b1, tag_b = intervals[j]
            if a1 < b0:
                relation = Interleaving.PRECEDES
            elif a0 < b0 and a1 > b1:
                relation = Interleaving.CONTAINS
            else:
                relation = Interleaving.OVERLAPS
            out.append((tag_a, tag_b, relation))
    return out
