"""Labeled Petri-net models of system-level message flows.

A flow describes one communication protocol as a safe (one token per
place) Petri net.  Transitions carry communication events; executing the
token game from the initial marking to the end marking produces the
event sequence of one flow instance.  All types here are immutable and
all operations are pure functions, so values can be shared freely across
threads and simulation runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

__all__ = [
    "DEFAULT_PATH_BOUND",
    "Event",
    "Finding",
    "Flow",
    "FlowPath",
    "Marking",
    "NotEnabled",
    "PathExplosion",
    "Transition",
    "ValidationReport",
    "enabled_transitions",
    "end_events",
    "enumerate_paths",
    "fire",
    "path_labels",
    "start_events",
    "validate",
]

DEFAULT_PATH_BOUND = 4096


class NotEnabled(Exception):
    """A transition was fired in a marking that does not enable it."""


class PathExplosion(Exception):
    """Path enumeration exceeded its configured bound."""


@dataclass(frozen=True, order=True)
class Event:
    """A communication event: ``cmd`` sent from component ``src`` to ``dest``.

    The triple is the event's identity; two events are equal exactly when
    all three fields are equal.
    """

    src: str
    dest: str
    cmd: str

    def __post_init__(self) -> None:
        if not (self.src and self.dest and self.cmd):
            raise ValueError("event fields must be non-empty")
        if self.src == self.dest:
            raise ValueError(f"event source and destination must differ: {self.src!r}")

    def __str__(self) -> str:
        return f"{self.src}:{self.dest}:{self.cmd}"


@dataclass(frozen=True)
class Transition:
    """A transition with its preset (consumed places) and postset (produced)."""

    id: str
    preset: frozenset[str]
    postset: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "preset", frozenset(self.preset))
        object.__setattr__(self, "postset", frozenset(self.postset))


@dataclass(frozen=True)
class Marking:
    """A state of a flow: the set of places currently holding a token."""

    marked: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "marked", frozenset(self.marked))

    @classmethod
    def of(cls, *places: str) -> "Marking":
        return cls(frozenset(places))

    def __contains__(self, place: str) -> bool:
        return place in self.marked

    def __len__(self) -> int:
        return len(self.marked)


@dataclass(frozen=True)
class FlowPath:
    """One complete execution of a flow, as the ordered transition ids fired."""

    transitions: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def __iter__(self) -> Iterator[str]:
        return iter(self.transitions)

    def __len__(self) -> int:
        return len(self.transitions)


@dataclass(frozen=True, eq=False)
class Flow:
    """A labeled Petri net describing one system flow.

    ``labeling`` maps every transition id to its event.  Labels may repeat
    across transitions of one flow, so an event alone does not identify a
    transition.  Structural well-formedness is checked by :func:`validate`,
    not at construction, so that defective flows can be built and reported.
    """

    id: str
    places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    labeling: Mapping[str, Event]
    initial_marking: frozenset[str]
    end_marking: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(
            self, "transitions", tuple(sorted(self.transitions, key=lambda t: t.id))
        )
        object.__setattr__(self, "labeling", dict(self.labeling))
        object.__setattr__(self, "initial_marking", frozenset(self.initial_marking))
        object.__setattr__(self, "end_marking", frozenset(self.end_marking))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Flow):
            return NotImplemented
        return (
            self.id == other.id
            and self.places == other.places
            and self.transitions == other.transitions
            and self.labeling == other.labeling
            and self.initial_marking == other.initial_marking
            and self.end_marking == other.end_marking
        )

    @cached_property
    def transition_by_id(self) -> dict[str, Transition]:
        return {t.id: t for t in self.transitions}

    @cached_property
    def events(self) -> frozenset[Event]:
        return frozenset(self.labeling.values())

    @property
    def initial(self) -> Marking:
        return Marking(self.initial_marking)


def enabled_transitions(flow: Flow, marking: Marking) -> frozenset[str]:
    """Ids of transitions whose whole preset is marked."""
    marked = marking.marked
    return frozenset(t.id for t in flow.transitions if t.preset <= marked)


def fire(flow: Flow, marking: Marking, transition_id: str) -> Marking:
    """Fire one enabled transition and return the successor marking.

    The successor is ``(marked - preset) | postset``.  The caller is
    responsible for recording the emitted event label; firing itself has
    no side effects.
    """
    transition = flow.transition_by_id.get(transition_id)
    if transition is None:
        raise NotEnabled(f"flow {flow.id!r} has no transition {transition_id!r}")
    if not transition.preset <= marking.marked:
        raise NotEnabled(
            f"transition {transition_id!r} is not enabled in marking "
            f"{sorted(marking.marked)}"
        )
    return Marking((marking.marked - transition.preset) | transition.postset)


def start_events(flow: Flow) -> frozenset[Event]:
    """Labels of transitions enabled in the initial marking."""
    return frozenset(
        flow.labeling[t.id]
        for t in flow.transitions
        if t.preset <= flow.initial_marking and t.id in flow.labeling
    )


def end_events(flow: Flow) -> frozenset[Event]:
    """Labels of transitions that produce only end-marking places."""
    return frozenset(
        flow.labeling[t.id]
        for t in flow.transitions
        if t.postset <= flow.end_marking and t.id in flow.labeling
    )


def path_labels(flow: Flow, path: FlowPath | Iterable[str]) -> tuple[Event, ...]:
    """The event-label sequence emitted by replaying ``path``."""
    return tuple(flow.labeling[t] for t in path)


def enumerate_paths(flow: Flow, max_paths: int = DEFAULT_PATH_BOUND) -> list[FlowPath]:
    """All maximal firing sequences from the initial marking.

    For a validated (acyclic, terminating) flow every returned path ends
    in the end marking.  Paths are returned in shortlex order: shortest
    first, ties broken lexicographically on the transition-id sequence.
    Raises :class:`PathExplosion` when the number of paths exceeds
    ``max_paths``, or when a firing sequence grows past any bound an
    acyclic net permits (a symptom of a cyclic flow).
    """
    # In an acyclic net the summed topological rank of all tokens strictly
    # increases with every firing, so no sequence can be longer than this.
    hard_limit = (len(flow.places) + 1) * (len(flow.transitions) + 1)
    paths: list[FlowPath] = []
    stack: list[str] = []

    def walk(marked: frozenset[str]) -> None:
        if len(stack) > hard_limit:
            raise PathExplosion(
                f"flow {flow.id!r}: firing sequence exceeded {hard_limit} steps; "
                "the flow is probably cyclic"
            )
        enabled = sorted(
            t.id for t in flow.transitions if t.preset <= marked
        )
        if not enabled:
            if len(paths) >= max_paths:
                raise PathExplosion(
                    f"flow {flow.id!r} has more than {max_paths} execution paths"
                )
            paths.append(FlowPath(tuple(stack)))
            return
        for tid in enabled:
            t = flow.transition_by_id[tid]
            stack.append(tid)
            walk((marked - t.preset) | t.postset)
            stack.pop()

    walk(flow.initial_marking)
    paths.sort(key=lambda p: (len(p.transitions), p.transitions))
    return paths


@dataclass(frozen=True)
class Finding:
    """One validation finding: a short defect code plus detail."""

    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    flow_id: str
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def __str__(self) -> str:
        if self.ok:
            return f"flow {self.flow_id}: ok"
        lines = [f"flow {self.flow_id}: {len(self.findings)} finding(s)"]
        lines += [f"  {f}" for f in self.findings]
        return "\n".join(lines)


_MARKING_EXPLORATION_LIMIT = 1 << 16


def validate(flow: Flow) -> ValidationReport:
    """Check every structural and behavioral invariant of a flow.

    Structural checks cover identifier uniqueness, labeling totality,
    marking sanity, per-transition preset/postset rules and acyclicity of
    the place/transition graph.  If the structure permits it, the token
    game is then explored exhaustively: every place must be reachable,
    every transition fireable, token merges must not occur, and every
    maximal firing sequence must terminate exactly in the end marking.
    """
    findings: list[Finding] = []

    def flag(code: str, detail: str) -> None:
        findings.append(Finding(code, detail))

    place_set = set(flow.places)
    if not flow.places:
        flag("empty net", "flow declares no places")
    if len(place_set) != len(flow.places):
        dupes = sorted({p for p in flow.places if flow.places.count(p) > 1})
        flag("duplicate place", ", ".join(dupes))

    seen_t: set[str] = set()
    for t in flow.transitions:
        if t.id in seen_t:
            flag("duplicate transition", t.id)
        seen_t.add(t.id)
        if not t.preset:
            flag("empty preset", t.id)
        if not t.postset:
            flag("empty postset", t.id)
        if t.preset & t.postset:
            flag("self-loop", f"{t.id} shares places {sorted(t.preset & t.postset)}")
        for p in (t.preset | t.postset) - place_set:
            flag("unknown place", f"{t.id} references {p}")

    for tid in flow.labeling:
        if tid not in seen_t:
            flag("label for unknown transition", tid)
    unlabeled = sorted(seen_t - set(flow.labeling))
    if unlabeled:
        flag("unlabeled transition", ", ".join(unlabeled))

    if not flow.initial_marking:
        flag("empty initial marking", flow.id)
    if not flow.end_marking:
        flag("empty end marking", flow.id)
    if flow.initial_marking & flow.end_marking:
        flag(
            "overlapping markings",
            f"initial and end markings share {sorted(flow.initial_marking & flow.end_marking)}",
        )
    for p in sorted((flow.initial_marking | flow.end_marking) - place_set):
        flag("unknown place", f"marking references {p}")
    for t in flow.transitions:
        for p in sorted(t.preset & flow.end_marking):
            flag("end place consumed", f"{p} is in the preset of {t.id}")

    if _has_cycle(flow):
        flag("cyclic structure", "place/transition graph contains a cycle")

    if findings:
        return ValidationReport(flow.id, tuple(findings))

    # Behavioral checks via exhaustive token-game exploration.
    reached_places: set[str] = set(flow.initial_marking)
    fired: set[str] = set()
    frontier = [flow.initial_marking]
    seen_markings = {flow.initial_marking}
    dead_ends: set[frozenset[str]] = set()
    collision_reported = False
    while frontier:
        if len(seen_markings) > _MARKING_EXPLORATION_LIMIT:
            flag("state explosion", "too many reachable markings to validate")
            break
        marked = frontier.pop()
        any_enabled = False
        for t in flow.transitions:
            if not t.preset <= marked:
                continue
            any_enabled = True
            fired.add(t.id)
            residue = marked - t.preset
            if residue & t.postset and not collision_reported:
                flag(
                    "token collision",
                    f"firing {t.id} merges tokens on {sorted(residue & t.postset)}",
                )
                collision_reported = True
            nxt = residue | t.postset
            reached_places |= t.postset
            if nxt not in seen_markings:
                seen_markings.add(nxt)
                frontier.append(nxt)
        if not any_enabled:
            dead_ends.add(marked)

    for tid in sorted(seen_t - fired):
        flag("dead transition", f"{tid} can never fire")
    for p in sorted(place_set - reached_places):
        flag("unreachable place", p)
    for marked in sorted(dead_ends, key=sorted):
        if marked != flow.end_marking:
            flag(
                "bad termination",
                f"a maximal firing sequence stops in {sorted(marked)} "
                f"instead of the end marking {sorted(flow.end_marking)}",
            )

    return ValidationReport(flow.id, tuple(findings))


def _has_cycle(flow: Flow) -> bool:
    """Detect a cycle in the bipartite place/transition digraph."""
    graph: dict[str, list[str]] = {f"p:{p}": [] for p in flow.places}
    for t in flow.transitions:
        node = f"t:{t.id}"
        graph[node] = [f"p:{p}" for p in t.postset if f"p:{p}" in graph]
        for p in t.preset:
            if f"p:{p}" in graph:
                graph[f"p:{p}"].append(node)

    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(graph, WHITE)

    def visit(node: str) -> bool:
        color[node] = GREY
        for nxt in graph[node]:
            if color[nxt] == GREY:
                return True
            if color[nxt] == WHITE and visit(nxt):
                return True
        color[node] = BLACK
        return False

    return any(color[n] == WHITE and visit(n) for n in list(graph))
