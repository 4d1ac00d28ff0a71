"""Coverage-driven selection of flow events to observe.

Three selectors are provided:

* :func:`select_fic` maximizes flow-instance coverage.  Because an
  instance is observed as soon as any of its events is observed, the
  selector picks events that every execution of a flow is guaranteed to
  emit, and minimizes the number of links those events occupy (fewer
  observed links means bigger re-allocated queues and fewer drops).
* :func:`select_cec` maximizes complete-execution coverage: it always
  selects every flow's start and end events, then adds the cheapest
  events that make the execution paths of each flow distinguishable from
  the observed projection.
* :func:`select_fc_baseline` is the frequency-coverage baseline: rank
  events by how many flows share them and take the top k, with no link
  minimization and no start/end mandate.

:func:`minimal_link_cover_oracle` is an exhaustive reference solver used
to check :func:`select_fic` optimality on small problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .flow_model import (
    Event,
    Flow,
    FlowPath,
    end_events,
    enumerate_paths,
    path_labels,
    start_events,
)

__all__ = [
    "EXACT_COVER_LIMIT",
    "ORACLE_LINK_LIMIT",
    "REASON_END",
    "REASON_FC_RANK",
    "REASON_FLOW_COVER",
    "REASON_PATH_DISAMBIG",
    "REASON_START",
    "Selection",
    "SelectionProblem",
    "TooLarge",
    "guaranteed_events",
    "minimal_link_cover_oracle",
    "reallocate_queues",
    "select_cec",
    "select_fc_baseline",
    "select_fic",
]

REASON_FLOW_COVER = "FLOW_COVER"
REASON_START = "START"
REASON_END = "END"
REASON_PATH_DISAMBIG = "PATH_DISAMBIG"
REASON_FC_RANK = "FC_RANK"

# Exact branch-and-bound is used up to this many candidate links; greedy
# cover beyond it.  The oracle refuses problems above its own bound.
EXACT_COVER_LIMIT = 20
ORACLE_LINK_LIMIT = 24


class TooLarge(Exception):
    """The exhaustive oracle was asked for a problem beyond its bound."""


def _event_key(e: Event) -> tuple[str, str, str]:
    return (e.src, e.dest, e.cmd)


@dataclass(frozen=True, eq=False)
class SelectionProblem:
    """The flows in observation scope plus the link resource model."""

    flows: tuple[Flow, ...]
    event_link_map: Mapping[Event, str]
    total_queue_budget: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "flows", tuple(self.flows))
        object.__setattr__(self, "event_link_map", dict(self.event_link_map))
        if self.total_queue_budget < 1:
            raise ValueError("total_queue_budget must be positive")
        for flow in self.flows:
            if not flow.events:
                raise ValueError(f"flow {flow.id} has no events")
            for e in flow.events:
                if e not in self.event_link_map:
                    raise ValueError(f"flow {flow.id}: event {e} is unmapped")

    @cached_property
    def paths_by_flow(self) -> dict[str, list[FlowPath]]:
        return {f.id: enumerate_paths(f) for f in self.flows}

    @cached_property
    def flow_link_candidates(self) -> dict[str, frozenset[str]]:
        """Links that cover each flow.

        A link covers a flow when it carries an event the flow is
        guaranteed to emit on every execution path; observing such a link
        observes every instance of the flow.  Flows with no guaranteed
        event (label-disjoint alternative paths) fall back to links
        carrying any of their events, so a cover always exists.
        """
        out: dict[str, frozenset[str]] = {}
        for flow in self.flows:
            events = guaranteed_events(flow, self.paths_by_flow[flow.id])
            if not events:
                events = flow.events
            out[flow.id] = frozenset(self.event_link_map[e] for e in events)
        return out


@dataclass(frozen=True)
class Selection:
    """A chosen event set, the links it occupies, and per-event rationale."""

    events: frozenset[Event]
    links: frozenset[str]
    rationale: Mapping[Event, str] = field(default_factory=dict)
    undistinguishable: tuple[tuple[str, tuple[str, ...], tuple[str, ...]], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", frozenset(self.events))
        object.__setattr__(self, "links", frozenset(self.links))
        object.__setattr__(self, "rationale", dict(self.rationale))


def guaranteed_events(flow: Flow, paths: Sequence[FlowPath] | None = None) -> frozenset[Event]:
    """Events emitted on every execution path of the flow."""
    if paths is None:
        paths = enumerate_paths(flow)
    events = set(flow.events)
    for path in paths:
        events &= set(path_labels(flow, path))
        if not events:
            break
    return frozenset(events)


def _cover_masks(problem: SelectionProblem) -> tuple[list[str], dict[str, int], int]:
    flows = sorted(problem.flow_link_candidates)
    links = sorted(set().union(*problem.flow_link_candidates.values()))
    mask: dict[str, int] = {l: 0 for l in links}
    for i, fid in enumerate(flows):
        for l in problem.flow_link_candidates[fid]:
            mask[l] |= 1 << i
    return links, mask, (1 << len(flows)) - 1


def _greedy_cover(links: list[str], mask: dict[str, int], full: int) -> list[str]:
    chosen: list[str] = []
    covered = 0
    while covered != full:
        # Most newly covered flows wins; ties go to the smallest link id.
        def gain(link: str) -> int:
            return (mask[link] | covered).bit_count() - covered.bit_count()

        best_gain = max(gain(l) for l in links)
        if best_gain == 0:
            raise AssertionError("uncoverable flow despite per-flow candidates")
        best = min(l for l in links if gain(l) == best_gain)
        chosen.append(best)
        covered |= mask[best]
    return chosen


def _all_minimum_covers(
    links: list[str], mask: dict[str, int], full: int, upper: int
) -> list[frozenset[str]]:
    """All link covers of minimum size, found by branch-and-bound.

    Branches on the first uncovered flow, trying each covering link; the
    bound is the size of the best cover found so far (ties kept).
    """
    flow_links: dict[int, list[str]] = {}
    n_flows = full.bit_count()
    for i in range(n_flows):
        flow_links[i] = [l for l in links if mask[l] >> i & 1]

    best_size = upper
    best: set[frozenset[str]] = set()

    def dfs(covered: int, chosen: tuple[str, ...]) -> None:
        nonlocal best_size, best
        if covered == full:
            if len(chosen) < best_size:
                best_size = len(chosen)
                best = {frozenset(chosen)}
            elif len(chosen) == best_size:
                best.add(frozenset(chosen))
            return
        if len(chosen) + 1 > best_size:
            return
        first = next(i for i in range(n_flows) if not covered >> i & 1)
        for link in flow_links[first]:
            dfs(covered | mask[link], chosen + (link,))

    dfs(0, ())
    return sorted(best, key=lambda c: tuple(sorted(c)))


def _events_for_cover(
    problem: SelectionProblem, cover: Iterable[str]
) -> dict[Event, str]:
    """One guaranteed event per flow on the chosen links, deduplicated."""
    chosen = set(cover)
    selected: dict[Event, str] = {}
    for flow in sorted(problem.flows, key=lambda f: f.id):
        events = guaranteed_events(flow, problem.paths_by_flow[flow.id])
        if not events:
            events = flow.events
        on_links = [e for e in events if problem.event_link_map[e] in chosen]
        pick = min(on_links, key=_event_key)
        selected.setdefault(pick, REASON_FLOW_COVER)
    return selected


def select_fic(problem: SelectionProblem) -> Selection:
    """Cover every flow with guaranteed events on as few links as possible.

    Exact (branch-and-bound over all minimum covers) for problems with at
    most :data:`EXACT_COVER_LIMIT` candidate links, greedy beyond that.
    Ties between minimum covers are broken by fewer selected events, then
    by the sorted link-id tuple.
    """
    links, mask, full = _cover_masks(problem)
    if len(links) <= EXACT_COVER_LIMIT:
        upper = len(_greedy_cover(links, mask, full))
        covers = _all_minimum_covers(links, mask, full, upper)
        ranked = sorted(
            covers,
            key=lambda c: (
                len(_events_for_cover(problem, c)),
                tuple(sorted(c)),
            ),
        )
        cover = ranked[0]
    else:
        cover = frozenset(_greedy_cover(links, mask, full))
    rationale = _events_for_cover(problem, cover)
    used = frozenset(problem.event_link_map[e] for e in rationale)
    return Selection(frozenset(rationale), used, rationale)


def _projection(labels: Sequence[Event], selected: frozenset[Event]) -> tuple[Event, ...]:
    return tuple(e for e in labels if e in selected)


def select_cec(problem: SelectionProblem) -> Selection:
    """Select start/end events of every flow plus path-disambiguating events.

    After the mandatory start and end events, events are added greedily:
    each step picks the event that splits the most still-confusable path
    pairs, preferring events on already-occupied links, then the smallest
    event.  Path pairs whose complete label sequences are identical can
    never be distinguished; they are reported in ``undistinguishable``
    and otherwise ignored.
    """
    rationale: dict[Event, str] = {}
    for flow in sorted(problem.flows, key=lambda f: f.id):
        for e in sorted(start_events(flow), key=_event_key):
            rationale.setdefault(e, REASON_START)
        for e in sorted(end_events(flow), key=_event_key):
            rationale.setdefault(e, REASON_END)

    label_seqs: dict[str, list[tuple[Event, ...]]] = {
        f.id: [path_labels(f, p) for p in problem.paths_by_flow[f.id]]
        for f in problem.flows
    }
    undistinguishable: list[tuple[str, tuple[str, ...], tuple[str, ...]]] = []
    pairs: list[tuple[str, int, int]] = []
    for flow in sorted(problem.flows, key=lambda f: f.id):
        seqs = label_seqs[flow.id]
        paths = problem.paths_by_flow[flow.id]
        for i, j in combinations(range(len(seqs)), 2):
            if seqs[i] == seqs[j]:
                undistinguishable.append(
                    (flow.id, paths[i].transitions, paths[j].transitions)
                )
            else:
                pairs.append((flow.id, i, j))

    def confusable(selected: frozenset[Event]) -> list[tuple[str, int, int]]:
        out = []
        for fid, i, j in pairs:
            if _projection(label_seqs[fid][i], selected) == _projection(
                label_seqs[fid][j], selected
            ):
                out.append((fid, i, j))
        return out

    flow_events: dict[str, frozenset[Event]] = {
        f.id: f.events for f in problem.flows
    }
    while True:
        selected = frozenset(rationale)
        remaining = confusable(selected)
        if not remaining:
            break
        used_links = {problem.event_link_map[e] for e in rationale}
        candidates = sorted(
            {
                e
                for fid, _, _ in remaining
                for e in flow_events[fid]
                if e not in rationale
            },
            key=_event_key,
        )
        best_event = None
        best_score: tuple[int, int, tuple[str, str, str]] | None = None
        for e in candidates:
            trial = selected | {e}
            split = sum(
                1
                for fid, i, j in remaining
                if _projection(label_seqs[fid][i], trial)
                != _projection(label_seqs[fid][j], trial)
            )
            score = (
                -split,
                0 if problem.event_link_map[e] in used_links else 1,
                _event_key(e),
            )
            if best_score is None or score < best_score:
                best_score = score
                best_event = e
        if best_event is None:
            break
        if best_score is not None and best_score[0] == 0:
            # No single event helps (labels differ only jointly): force
            # progress with the smallest candidate and re-evaluate.
            best_event = candidates[0]
        rationale.setdefault(best_event, REASON_PATH_DISAMBIG)

    links = frozenset(problem.event_link_map[e] for e in rationale)
    return Selection(
        frozenset(rationale), links, rationale, tuple(undistinguishable)
    )


def select_fc_baseline(problem: SelectionProblem, k: int) -> Selection:
    """Frequency-coverage baseline: top-k events by flow-sharing count.

    FC(e) is the number of in-scope flows containing e.  Ranking is FC
    descending with lexicographic tie-break.  Deliberately applies no
    link minimization and no start/end mandate.
    """
    counts: dict[Event, int] = {}
    for flow in problem.flows:
        for e in flow.events:
            counts[e] = counts.get(e, 0) + 1
    if k < 1 or k > len(counts):
        raise ValueError(f"k must be in 1..{len(counts)}, got {k}")
    ranked = sorted(counts, key=lambda e: (-counts[e], _event_key(e)))
    chosen = ranked[:k]
    links = frozenset(problem.event_link_map[e] for e in chosen)
    return Selection(
        frozenset(chosen), links, {e: REASON_FC_RANK for e in chosen}
    )


def reallocate_queues(
    base_capacity: int, all_links: Iterable[str], enabled: Iterable[str]
) -> dict[str, int]:
    """Redistribute disabled monitors' queue capacity to enabled links.

    The total capacity ``base_capacity * len(all_links)`` is conserved:
    each enabled link gets the floor share and the remainder goes to the
    lexicographically first enabled links, one extra slot each.
    """
    all_set = frozenset(all_links)
    enabled_sorted = sorted(set(enabled))
    if not enabled_sorted:
        raise ValueError("no enabled links to allocate to")
    if not set(enabled_sorted) <= all_set:
        raise ValueError("enabled links must be a subset of all links")
    if base_capacity < 1:
        raise ValueError("base capacity must be positive")
    total = base_capacity * len(all_set)
    share, extra = divmod(total, len(enabled_sorted))
    return {
        link: share + (1 if i < extra else 0)
        for i, link in enumerate(enabled_sorted)
    }


def minimal_link_cover_oracle(
    problem: SelectionProblem, max_links: int = ORACLE_LINK_LIMIT
) -> int:
    """Exact minimum link-cover size by subset enumeration.

    Uses the same per-flow candidate-link sets as :func:`select_fic` and
    tries every link subset in increasing size, so it is a trustworthy
    but slow reference.  Raises :class:`TooLarge` beyond ``max_links``
    candidate links.
    """
    links, mask, full = _cover_masks(problem)
    if len(links) > max_links:
        raise TooLarge(
            f"{len(links)} candidate links exceed the oracle bound {max_links}"
        )
    for size in range(1, len(links) + 1):
        for combo in combinations(links, size):
            m = 0
            for l in combo:
                m |= mask[l]
            if m == full:
                return size
    raise AssertionError("no cover found despite per-flow candidates")
