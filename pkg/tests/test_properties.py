"""Randomized invariants of graph building, simulation, and transforms."""

import random
from collections import defaultdict

from hypothesis import given, settings, strategies as st

from kernsim.graph import build_graph, verify_acyclic
from kernsim.sim import simulate
from kernsim.synthetic import generate_synthetic_trace
from kernsim.transform import TransformPipeline, apply_pipeline

from .genspec import random_spec
from .oracles import nx_longest_makespan, rederive_edges

SETTINGS = settings(deadline=None, max_examples=40)


def _random_case(seed: int):
    rng = random.Random(seed)
    spec = random_spec(rng, approx_tasks=rng.randint(8, 80))
    doc, expected = generate_synthetic_trace(spec, seed=rng.randint(0, 10**9))
    graph = build_graph(doc)
    return doc, graph, expected


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_schedule_respects_every_edge(seed):
    _, graph, _ = _random_case(seed)
    result = simulate(graph)
    for u, v, _kind in graph.edges:
        parent = graph.tasks[u]
        assert result.start_of[v] >= \
            result.start_of[u] + parent.duration + parent.gap


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_no_lane_overlap(seed):
    _, graph, _ = _random_case(seed)
    result = simulate(graph)
    by_lane = defaultdict(list)
    for tid, start in result.start_of.items():
        task = graph.tasks[tid]
        if task.duration > 0:
            by_lane[str(task.lane)].append((start, start + task.duration))
    for intervals in by_lane.values():
        intervals.sort()
        for (_, end), (nxt, _) in zip(intervals, intervals[1:]):
            assert nxt >= end


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_makespan_lower_bounds(seed):
    _, graph, _ = _random_case(seed)
    result = simulate(graph)
    per_lane = defaultdict(int)
    for task in graph.tasks.values():
        per_lane[str(task.lane)] += task.duration
    if per_lane:
        assert result.makespan >= max(per_lane.values())
    assert result.makespan == nx_longest_makespan(graph)


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_builder_edges_match_independent_rederivation(seed):
    doc, graph, _ = _random_case(seed)
    got = {(u, v, kind.value) for u, v, kind in graph.edges}
    assert got == rederive_edges(doc)


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_simulation_is_deterministic(seed):
    _, graph, _ = _random_case(seed)
    a, b = simulate(graph), simulate(graph)
    assert a.start_of == b.start_of and a.makespan == b.makespan


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9),
       st.integers(min_value=1, max_value=7))
def test_scale_by_one_and_remove_insert_are_identities(seed, _k):
    _, graph, _ = _random_case(seed)
    base = simulate(graph)
    pipeline = TransformPipeline(steps=[
        {"op": "scale", "selector": {"all": True}, "factor": "1"},
    ])
    out = apply_pipeline(graph, pipeline)
    assert simulate(out).start_of == base.start_of


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_scaling_down_never_slows_down(seed):
    _, graph, _ = _random_case(seed)
    base = simulate(graph)
    half = apply_pipeline(graph, TransformPipeline(steps=[
        {"op": "scale", "selector": {"all": True}, "factor": "1/2"},
    ]))
    assert simulate(half).makespan <= base.makespan


@SETTINGS
@given(st.integers(min_value=0, max_value=10**9))
def test_transforms_preserve_acyclicity_and_purity(seed):
    _, graph, _ = _random_case(seed)
    snapshot = {tid: (t.duration, t.gap) for tid, t in graph.tasks.items()}
    victim = max(graph.tasks)
    pipeline = TransformPipeline(steps=[
        {"op": "scale", "selector": {"all": True}, "factor": "2"},
        {"op": "remove", "task_id": victim},
    ])
    out = apply_pipeline(graph, pipeline)
    verify_acyclic(out)
    assert victim not in out.tasks
    assert {tid: (t.duration, t.gap) for tid, t in graph.tasks.items()} \
        == snapshot
