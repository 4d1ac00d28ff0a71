"""Shared fixtures and independent oracles used across the test suite."""

from __future__ import annotations

import random

import pytest

from flowtrace.flow_model import Event, Flow, Transition
from flowtrace.selection import SelectionProblem
from flowtrace.spec_io import load_prototype


def brute_force_paths(flow: Flow) -> list[tuple[str, ...]]:
    """Independent token-game path enumeration.

    Deliberately written as a naive recursive walk over explicit set
    markings so it shares no code with the production enumerator.
    """
    out: set[tuple[str, ...]] = set()

    def walk(marked: set[str], seq: list[str]) -> None:
        enabled = [t for t in flow.transitions if set(t.preset) <= marked]
        if not enabled:
            out.add(tuple(seq))
            return
        for t in enabled:
            walk((marked - set(t.preset)) | set(t.postset), seq + [t.id])

    walk(set(flow.initial_marking), [])
    return sorted(out, key=lambda seq: (len(seq), seq))


def linear_flow(flow_id: str, events: list[Event], prefix: str = "n") -> Flow:
    """A straight-line flow firing the given events in order."""
    places = [f"{prefix}{i}" for i in range(len(events) + 1)]
    transitions = []
    labeling = {}
    for i, event in enumerate(events):
        tid = f"{prefix}t{i}"
        transitions.append(
            Transition(tid, frozenset({places[i]}), frozenset({places[i + 1]}))
        )
        labeling[tid] = event
    return Flow(
        id=flow_id,
        places=tuple(places),
        transitions=tuple(transitions),
        labeling=labeling,
        initial_marking=frozenset({places[0]}),
        end_marking=frozenset({places[-1]}),
    )


def make_cpu_write_flow() -> Flow:
    """The coherent CPU write flow built directly from its net structure."""
    ev_start = Event("CPU_X", "Cache_X", "wr_req")
    ev_snp_req = Event("Cache_X", "Cache_Y", "snp_wr_req")
    ev_snp_resp = Event("Cache_Y", "Cache_X", "snp_wr_resp")
    ev_bus_wr = Event("Cache_X", "Bus", "wr_req")
    ev_mem_rd = Event("Bus", "Mem", "rd_req")
    ev_mem_resp = Event("Mem", "Bus", "rd_resp")
    ev_bus_resp = Event("Bus", "Cache_X", "wr_resp")
    ev_done = Event("Cache_X", "CPU_X", "wr_resp")

    arcs = {
        "t1": ("p1", "p2", ev_start),
        "t2": ("p2", "p3", ev_snp_req),
        "t3": ("p3", "p4", ev_snp_resp),
        "t4": ("p4", "p5", ev_bus_wr),
        "t5": ("p5", "p6", ev_mem_rd),
        "t6": ("p6", "p7", ev_mem_resp),
        "t7": ("p7", "p8", ev_bus_resp),
        "t8": ("p8", "p9", ev_done),
        "t9": ("p4", "p9", ev_done),
        "t10": ("p2", "p9", ev_done),
    }
    transitions = tuple(
        Transition(tid, frozenset({pre}), frozenset({post}))
        for tid, (pre, post, _) in arcs.items()
    )
    return Flow(
        id="cpu_write",
        places=tuple(f"p{i}" for i in range(1, 10)),
        transitions=transitions,
        labeling={tid: ev for tid, (_, _, ev) in arcs.items()},
        initial_marking=frozenset({"p1"}),
        end_marking=frozenset({"p9"}),
    )


def random_selection_problem(rng: random.Random) -> SelectionProblem:
    """Random selection problems bounded to the exact-solver regime."""
    components = [f"C{i}" for i in range(rng.randint(3, 6))]
    n_links = rng.randint(3, 18)
    links = []
    link_events: dict[str, list[Event]] = {}
    for i in range(n_links):
        src = rng.choice(components)
        dest = rng.choice([c for c in components if c != src])
        lid = f"L{i:02d}"
        links.append(lid)
        link_events[lid] = [
            Event(src, dest, f"m{i}_{j}") for j in range(rng.randint(1, 3))
        ]
    event_link = {e: lid for lid, evs in link_events.items() for e in evs}
    all_events = list(event_link)

    flows = []
    for fi in range(rng.randint(2, 8)):
        length = rng.randint(1, 5)
        body = [rng.choice(all_events) for _ in range(length)]
        flow = linear_flow(f"flow{fi}", body, prefix=f"f{fi}_")
        if rng.random() < 0.4 and length >= 2:
            # Replace one segment with a two-way choice so that not every
            # event of the flow is guaranteed.
            k = rng.randrange(length)
            alt = rng.choice(all_events)
            t_extra = Transition(
                f"f{fi}_alt",
                frozenset({f"f{fi}_{k}"}),
                frozenset({f"f{fi}_{k + 1}"}),
            )
            labeling = dict(flow.labeling)
            labeling[t_extra.id] = alt
            flow = Flow(
                id=flow.id,
                places=flow.places,
                transitions=flow.transitions + (t_extra,),
                labeling=labeling,
                initial_marking=flow.initial_marking,
                end_marking=flow.end_marking,
            )
        flows.append(flow)
    return SelectionProblem(tuple(flows), event_link, 64)


@pytest.fixture
def cpu_write() -> Flow:
    return make_cpu_write_flow()


@pytest.fixture(scope="session")
def prototype():
    return load_prototype()
