"""Graph transformation primitives and pipeline plumbing."""

import json
from fractions import Fraction

import pytest

from kernsim.errors import (
    AcyclicityViolated,
    BadPipeline,
    BadSelector,
    UnknownAnchor,
    UnknownTask,
)
from kernsim.graph import Task, build_graph, verify_acyclic
from kernsim.layers import map_tasks_to_layers
from kernsim.sim import simulate
from kernsim.trace import LaneId, Phase, TaskKind, parse_trace
from kernsim.transform import (
    All,
    And,
    ByKind,
    ByLane,
    ByLayer,
    ByNameSubstring,
    Not,
    Or,
    Selector,
    TransformPipeline,
    apply_pipeline,
    default_launch_cost,
    insert_task,
    remove_task,
    scale_durations,
    select,
)
from kernsim.trace import LaneClass
from tests.crafted import TraceBuilder, gpu_bound_trace


def _graph(doc_dict):
    trace = parse_trace(json.dumps(doc_dict))
    graph = build_graph(trace)
    map_tasks_to_layers(graph, list(trace.layer_markers))
    return graph


def test_selector_algebra():
    g = _graph(gpu_bound_trace())
    sgemm = select(g, ByNameSubstring("sgemm"))
    assert len(sgemm) == 2
    gpu = select(g, ByKind(TaskKind.GPU_KERNEL))
    assert sgemm < gpu
    assert select(g, And([ByKind(TaskKind.GPU_KERNEL),
                          ByNameSubstring("sgemm")])) == sgemm
    assert select(g, Not(All())) == set()
    assert select(g, Or([ByNameSubstring("sgemm"),
                         ByNameSubstring("scudnn")])) == \
        sgemm | select(g, ByNameSubstring("scudnn"))
    assert select(g, ByLane(LaneClass.CPU_THREAD)) == \
        {t.id for t in g.tasks.values() if t.lane.is_cpu}


def test_selector_roundtrip():
    sel = And([ByKind(TaskKind.GPU_KERNEL),
               Not(Or([ByNameSubstring("sgemm"), ByLayer("conv1", Phase.FORWARD)]))])
    assert Selector.from_object(sel.to_object()) == sel
    with pytest.raises(BadSelector):
        Selector.from_object({"bogus": 1})


def test_scale_durations_rounding():
    g = _graph(gpu_bound_trace())
    before = {t.id: t.duration for t in g.tasks.values()}
    scale_durations(g, ByNameSubstring("sgemm"), Fraction(1, 3))
    for t in g.tasks.values():
        if "sgemm" in t.name:
            # half-up rounding of duration/3
            assert t.duration == (before[t.id] * 2 + 3) // 6
        else:
            assert t.duration == before[t.id]


def test_scale_factor_one_is_identity():
    g = _graph(gpu_bound_trace())
    base = simulate(g).makespan
    scale_durations(g, All(), Fraction(1))
    assert simulate(g).makespan == base


def test_remove_middle_of_chain_splices():
    b = TraceBuilder()
    ids = [b.event("CpuOther", n, "cpu:0", s, d)
           for n, s, d in (("A", 0, 1_000), ("B", 1_000, 2_000), ("C", 3_000, 3_000))]
    g = _graph(b.document())
    remove_task(g, ids[1])
    assert ids[1] not in g.tasks
    r = simulate(g)
    assert r.makespan == 4_000
    verify_acyclic(g)


def test_remove_all_tasks():
    b = TraceBuilder()
    ids = [b.event("CpuOther", f"t{i}", "cpu:0", i * 1_000, 1_000)
           for i in range(3)]
    g = _graph(b.document())
    for tid in ids:
        remove_task(g, tid)
    assert not g.tasks
    assert simulate(g).makespan == 0


def test_remove_unknown_task():
    g = _graph(gpu_bound_trace())
    with pytest.raises(UnknownTask):
        remove_task(g, 10_000)


def test_remove_discards_gap():
    b = TraceBuilder()
    b.event("CpuOther", "A", "cpu:0", 0, 1_000)
    mid = b.event("CpuOther", "B", "cpu:0", 1_000, 1_000)
    b.event("CpuOther", "C", "cpu:0", 7_000, 1_000)  # B carries a 5 us gap
    g = _graph(b.document())
    assert g.tasks[mid].gap == 5_000
    remove_task(g, mid)
    assert simulate(g).makespan == 2_000  # the gap went away with B


def test_insert_zero_duration_is_identity():
    g = _graph(gpu_bound_trace())
    base = simulate(g).makespan
    anchors = sorted(g.tasks)
    task = Task(id=g.next_id(), kind=TaskKind.COMM, name="noop",
                lane=LaneId.parse("comm:x"), duration=0)
    insert_task(g, task, after=[anchors[0]], before=[anchors[-1]])
    assert simulate(g).makespan == base
    verify_acyclic(g)


def test_insert_on_fresh_lane_runs_at_zero():
    g = _graph(gpu_bound_trace())
    task = Task(id=g.next_id(), kind=TaskKind.COMM, name="solo",
                lane=LaneId.parse("comm:solo"), duration=2_500)
    insert_task(g, task, after=[], before=[])
    assert simulate(g).start_of[task.id] == 0


def test_insert_unknown_anchor():
    g = _graph(gpu_bound_trace())
    task = Task(id=g.next_id(), kind=TaskKind.COMM, name="x",
                lane=LaneId.parse("comm:x"), duration=1)
    with pytest.raises(UnknownAnchor):
        insert_task(g, task, after=[99_999], before=[])


def test_insert_cycle_rejected():
    b = TraceBuilder()
    ids = [b.event("CpuOther", f"t{i}", "cpu:0", i * 1_000, 1_000)
           for i in range(2)]
    g = _graph(b.document())
    task = Task(id=g.next_id(), kind=TaskKind.COMM, name="x",
                lane=LaneId.parse("comm:x"), duration=1)
    with pytest.raises(AcyclicityViolated):
        insert_task(g, task, after=[ids[1]], before=[ids[0]])


def test_pipeline_roundtrip_and_replay():
    g = _graph(gpu_bound_trace())
    pipeline = TransformPipeline(steps=[
        {"op": "scale", "selector": ByNameSubstring("sgemm").to_object(),
         "factor": "1/3"},
        {"op": "set_priority", "selector": ByKind(TaskKind.GPU_KERNEL).to_object(),
         "priority": 3},
    ])
    reparsed = TransformPipeline.from_object(
        json.loads(json.dumps(pipeline.to_object())))
    g1 = apply_pipeline(g, pipeline)
    g2 = apply_pipeline(g, reparsed)
    assert {t: (v.duration, v.priority) for t, v in g1.tasks.items()} == \
        {t: (v.duration, v.priority) for t, v in g2.tasks.items()}
    assert simulate(g1).makespan == simulate(g2).makespan


def test_apply_pipeline_leaves_original_untouched():
    g = _graph(gpu_bound_trace())
    before = {t: v.duration for t, v in g.tasks.items()}
    apply_pipeline(g, TransformPipeline(steps=[
        {"op": "scale", "selector": All().to_object(), "factor": "1/2"}]))
    assert {t: v.duration for t, v in g.tasks.items()} == before


def test_empty_pipeline_is_deep_copy():
    g = _graph(gpu_bound_trace())
    out = apply_pipeline(g, TransformPipeline(steps=[]))
    assert out is not g
    assert out.tasks.keys() == g.tasks.keys()
    assert simulate(out).makespan == simulate(g).makespan


def test_bad_pipeline_rejected():
    with pytest.raises(BadPipeline):
        TransformPipeline.from_object({"no_steps": []})
    g = _graph(gpu_bound_trace())
    with pytest.raises(BadPipeline):
        apply_pipeline(g, TransformPipeline(steps=[{"op": "warp_drive"}]))


def test_identity_composition():
    g = _graph(gpu_bound_trace())
    base = simulate(g).makespan
    free_id = g.next_id()
    pipeline = TransformPipeline(steps=[
        {"op": "scale", "selector": All().to_object(), "factor": "1"},
        {"op": "insert",
         "task": {"id": free_id, "kind": "Comm", "name": "noop",
                  "lane": "comm:tmp", "duration_ns": 0},
         "after": [], "before": []},
        {"op": "remove", "task_id": free_id},
    ])
    out = apply_pipeline(g, pipeline)
    assert simulate(out).makespan == base
    assert out.tasks.keys() == g.tasks.keys()


def test_default_launch_cost_is_median_of_launches():
    b = TraceBuilder()
    for i, d in enumerate((2_000, 5_000, 9_000)):
        b.event("CpuApi", "cudaLaunchKernel", "cpu:0", i * 10_000, d,
                correlation=i + 1)
        b.event("GpuKernel", "k", "gpu:0:1", i * 10_000 + d, 100,
                correlation=i + 1)
    g = _graph(b.document())
    assert default_launch_cost(g) == 5_000


def test_remove_preserves_reachability():
    b = TraceBuilder()
    b.event("CpuApi", "launch", "cpu:0", 0, 1_000, correlation=1)
    mid = b.event("CpuOther", "mid", "cpu:0", 1_000, 1_000)
    b.event("CpuApi", "launch2", "cpu:0", 2_000, 1_000, correlation=2)
    b.event("GpuKernel", "k1", "gpu:0:1", 1_000, 500, correlation=1)
    b.event("GpuKernel", "k2", "gpu:0:1", 3_000, 500, correlation=2)
    g = _graph(b.document())
    import networkx as nx
    def reach(graph, skip):
        dg = nx.DiGraph()
        dg.add_nodes_from(t for t in graph.tasks if t != skip)
        dg.add_edges_from((u, v) for u, v, _ in graph.edges
                          if u != skip and v != skip)
        return {(a, b) for a in dg for b in nx.descendants(dg, a)}
    before = reach(g, mid)
    remove_task(g, mid)
    assert reach(g, None) >= before
