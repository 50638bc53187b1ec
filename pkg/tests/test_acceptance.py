"""Acceptance suite: end-to-end fidelity, oracles, and analytic checks."""

import json
import random
import time
from collections import defaultdict
from fractions import Fraction

from click.testing import CliRunner

from kernsim.api import Analysis
from kernsim.cli import main as cli_main
from kernsim.comm import (
    NetworkConfig,
    allreduce_duration_exact,
    insert_distributed,
    reduce_scatter_duration_exact,
)
from kernsim.graph import build_graph, verify_acyclic
from kernsim.sim import make_policy, simulate
from kernsim.synthetic import generate_synthetic_trace
from kernsim.trace import TaskKind
from kernsim.transform import TransformPipeline, apply_pipeline

from .crafted import (
    GPU_BOUND_COMPUTE,
    GPU_BOUND_MEMORY,
    P3_PARAMS,
    allreduce_trace,
    cpu_bound_trace,
    distributed_trace,
    fused_adam_trace,
    gpu_bound_trace,
    layered_trace,
    p3_trace,
)
from .genspec import random_spec
from .oracles import (
    min_makespan_over_orderings,
    nx_longest_makespan,
    rederive_edges,
)


def _analysis(doc: dict) -> Analysis:
    return Analysis.from_text(json.dumps(doc))


# 1. Generated traces replayed through the command line reproduce their
#    analytically computed makespan exactly, at scale, in bounded time.

def test_generated_traces_replay_exactly_through_cli(tmp_path):
    runner = CliRunner()
    rng = random.Random(20_260_826)
    started = time.monotonic()
    checked = 0
    for i in range(200):
        # Mostly small traces plus a handful near the size ceiling.
        approx = 5_000 if i % 50 == 0 else rng.randint(10, 400)
        spec = random_spec(rng, approx_tasks=approx)
        spec_path = tmp_path / "spec.json"
        trace_path = tmp_path / "trace.json"
        spec_path.write_text(json.dumps(spec))
        seed = rng.randint(0, 10**9)
        gen = runner.invoke(cli_main, ["gen", str(spec_path), "--seed",
                                       str(seed), "--out", str(trace_path),
                                       "--json"], catch_exceptions=False)
        assert gen.exit_code == 0, gen.output
        expected = json.loads(gen.output)["expected_makespan_ns"]
        sim = runner.invoke(cli_main, ["simulate", str(trace_path), "--json"],
                            catch_exceptions=False)
        assert sim.exit_code == 0, sim.output
        assert json.loads(sim.output)["makespan_ns"] == expected
        checked += 1
    assert checked >= 200
    assert time.monotonic() - started < 60


# 2. Simulated makespans equal an independent longest-weighted-path
#    computation on chain-per-lane graphs of up to 200 tasks.

def test_longest_path_oracle_small_graphs():
    rng = random.Random(777)
    for _ in range(60):
        spec = random_spec(rng, approx_tasks=rng.randint(8, 150))
        doc, _ = generate_synthetic_trace(spec, seed=rng.randint(0, 10**9))
        graph = build_graph(doc)
        assert len(graph.tasks) <= 200
        assert simulate(graph).makespan == nx_longest_makespan(graph)


# 3. Scheduling invariants hold on every randomized simulation: edges and
#    gaps are respected, lanes never overlap, both lower bounds hold, and
#    repeated runs are identical.

def test_simulation_invariants_hold_on_random_corpus():
    rng = random.Random(31337)
    for _ in range(60):
        spec = random_spec(rng, approx_tasks=rng.randint(10, 250))
        doc, _ = generate_synthetic_trace(spec, seed=rng.randint(0, 10**9))
        graph = build_graph(doc)
        result = simulate(graph)

        for u, v, _kind in graph.edges:
            parent = graph.tasks[u]
            assert result.start_of[v] >= \
                result.start_of[u] + parent.duration + parent.gap

        by_lane = defaultdict(list)
        per_lane_load = defaultdict(int)
        for tid, start in result.start_of.items():
            task = graph.tasks[tid]
            per_lane_load[str(task.lane)] += task.duration
            if task.duration > 0:
                by_lane[str(task.lane)].append((start, start + task.duration))
        for intervals in by_lane.values():
            intervals.sort()
            for (_, end), (nxt, _) in zip(intervals, intervals[1:]):
                assert nxt >= end

        assert result.makespan >= max(per_lane_load.values(), default=0)
        assert result.makespan >= nx_longest_makespan(graph)
        assert simulate(graph).start_of == result.start_of


# 4. The builder's edge set matches an independent re-derivation of the five
#    dependency rules on 100 randomized traces, and the corpus exercises
#    device-wide syncs, stream-scoped syncs, and blocking DtoH copies.

def test_dependency_rules_match_independent_rechecker():
    rng = random.Random(4242)
    device_wide = stream_scoped = blocking_dtoh = 0
    for _ in range(100):
        spec = random_spec(rng, approx_tasks=rng.randint(15, 200))
        doc, _ = generate_synthetic_trace(spec, seed=rng.randint(0, 10**9))
        names = [e.name for e in doc.events]
        device_wide += names.count("cudaDeviceSynchronize")
        stream_scoped += names.count("cudaStreamSynchronize")
        blocking_dtoh += names.count("memcpy_dtoh_async")
        graph = build_graph(doc)
        got = {(u, v, kind.value) for u, v, kind in graph.edges}
        assert got == rederive_edges(doc)
    assert device_wide > 0 and stream_scoped > 0 and blocking_dtoh > 0


# 5. Mixed-precision analytic: on a GPU-bound chain the prediction is the
#    sum of per-kernel scaled durations within 1 ns of rounding per task; a
#    CPU-bound trace barely improves.

def test_mixed_precision_analytic_bounds():
    a = _analysis(gpu_bound_trace())
    report = a.whatif("amp")
    exact = (
        sum(Fraction(d, 3) for d in GPU_BOUND_COMPUTE)
        + sum(Fraction(d, 2) for d in GPU_BOUND_MEMORY)
    )
    n_tasks = len(GPU_BOUND_COMPUTE) + len(GPU_BOUND_MEMORY)
    assert abs(report["predicted_makespan_ns"] - exact) <= n_tasks

    cpu = _analysis(cpu_bound_trace()).whatif("amp")
    assert 0 <= cpu["speedup"] <= 0.01


# 6. Data-parallel bandwidth law: collective durations scale exactly as
#    1/bandwidth, makespans never increase with bandwidth, and one worker
#    reproduces the original schedule exactly.

def test_distributed_bandwidth_law():
    a = _analysis(distributed_trace(2))
    durations: dict[int, list[int]] = {}
    makespans: list[int] = []
    for bw in (10, 20, 40):
        cfg = NetworkConfig.from_object({"workers": 4, "bandwidth_gbps": bw})
        graph = insert_distributed(a.graph.copy(), a.trace.gradient_buckets,
                                   cfg)
        durations[bw] = sorted(
            t.duration for t in graph.tasks.values()
            if t.kind is TaskKind.COMM)
        makespans.append(simulate(graph).makespan)
    for d10, d20, d40 in zip(durations[10], durations[20], durations[40]):
        assert d10 == 2 * d20 == 4 * d40
    assert makespans[0] >= makespans[1] >= makespans[2]

    single = insert_distributed(
        a.graph.copy(), a.trace.gradient_buckets,
        NetworkConfig.from_object({"workers": 1, "bandwidth_gbps": 10}))
    assert simulate(single).makespan == a.baseline.makespan


# 7. Optimizer fusion analytic: 100 uniform 5 us launches collapsing to one
#    launch plus a fused kernel removes exactly 495 us.

def test_fused_optimizer_saves_exactly_495_us():
    a = _analysis(fused_adam_trace())
    report = a.whatif("fused_adam")
    assert report["baseline_makespan_ns"] - report["predicted_makespan_ns"] \
        == 495_000


# 8. Priority scheduling of parameter-server transfers reaches the true
#    optimum over all frontier orderings and strictly beats arrival order.

def test_priority_transfers_reach_brute_force_optimum():
    a = _analysis(p3_trace())
    pipeline = a.pipeline_for("p3", P3_PARAMS)
    transformed = apply_pipeline(a.graph, pipeline)
    prioritized = simulate(transformed, make_policy("priority")).makespan
    fifo = simulate(transformed, make_policy("default")).makespan
    optimum = min_makespan_over_orderings(transformed)
    assert prioritized == optimum
    assert prioritized < fifo


# 9. Identity transformations are exact no-ops and every applied pipeline
#    keeps the graph acyclic.

def test_primitive_identities_on_random_corpus():
    rng = random.Random(909)
    for _ in range(25):
        spec = random_spec(rng, approx_tasks=rng.randint(8, 120))
        doc, _ = generate_synthetic_trace(spec, seed=rng.randint(0, 10**9))
        graph = build_graph(doc)
        base = simulate(graph)
        victim = max(tid for tid, t in graph.tasks.items())

        identity_pipelines = [
            TransformPipeline(steps=[]),
            TransformPipeline(steps=[
                {"op": "scale", "selector": {"all": True}, "factor": "1"}]),
            TransformPipeline(steps=[
                {"op": "insert",
                 "task": {"id": graph.next_id(), "kind": "CpuOther",
                          "name": "noop", "lane": "cpu:999",
                          "duration_ns": 0},
                 "after": [], "before": [], "sequenced": False}]),
            TransformPipeline(steps=[
                {"op": "scale", "selector": {"all": True}, "factor": "3"},
                {"op": "scale", "selector": {"all": True}, "factor": "1/3"}]),
        ]
        for pipeline in identity_pipelines:
            out = apply_pipeline(graph, pipeline)
            verify_acyclic(out)
            assert simulate(out).makespan == base.makespan


def test_remove_then_reinsert_is_identity():
    a = _analysis(gpu_bound_trace())
    base = a.baseline
    # Drop the final kernel, then re-add it behind the same predecessor.
    last = max(t.id for t in a.graph.tasks.values()
               if t.kind is TaskKind.GPU_KERNEL)
    task = a.graph.tasks[last]
    prev = max(t.id for t in a.graph.tasks.values()
               if t.kind is TaskKind.GPU_KERNEL and t.id != last)
    pipeline = TransformPipeline(steps=[
        {"op": "remove", "task_id": last},
        {"op": "insert",
         "task": {"id": last, "kind": task.kind.value, "name": task.name,
                  "lane": str(task.lane), "duration_ns": task.duration},
         "after": [prev], "before": [], "sequenced": True},
    ])
    out = apply_pipeline(a.graph, pipeline)
    verify_acyclic(out)
    assert simulate(out).makespan == base.makespan


def test_every_scenario_has_an_exact_degenerate_identity():
    cases = [
        (gpu_bound_trace(), "amp",
         {"compute_factor": "1", "memory_factor": "1"}),
        (fused_adam_trace(n_updates=1), "fused_adam", {}),
        (gpu_bound_trace(), "reconstruct_batchnorm", {}),
        (distributed_trace(2), "distributed", {"workers": 1}),
        (p3_trace(), "p3",
         dict(P3_PARAMS, bandwidth_gbps=10**9)),
        (allreduce_trace(9_000_000), "blueconnect",
         {"factorization": "2", "workers": 2, "channels": 1,
          "bandwidth_gbps": 8_000}),
        (layered_trace(), "metaflow", {}),
        (layered_trace(), "vdnn",
         {"pcie_bandwidth_gbps": 10**9, "launch_cost_ns": 0}),
        (layered_trace(), "gist",
         {"kernel_cost_ns": 0, "launch_cost_ns": 0, "lossy": True}),
        (allreduce_trace(), "dgc", {"compression_ratio": "1"}),
    ]
    for doc, scenario, params in cases:
        a = _analysis(doc)
        pipeline = a.pipeline_for(scenario, params)
        transformed, predicted = a.run_pipeline(pipeline)
        verify_acyclic(transformed)
        assert predicted.makespan == a.baseline.makespan, scenario


# 10. The runtime decomposition always sums to the makespan, and the
#     mixed-precision what-if shrinks GPU-dominated time while leaving
#     CPU-only time untouched.

def test_breakdown_conservation_everywhere():
    rng = random.Random(5150)
    analyses = [
        _analysis(doc) for doc in (
            gpu_bound_trace(), cpu_bound_trace(), layered_trace(),
            allreduce_trace(), distributed_trace(2),
            {"schema_version": 1, "time_unit": "microseconds",
             "events": [], "layer_markers": []},
        )
    ]
    for _ in range(30):
        spec = random_spec(rng, approx_tasks=rng.randint(8, 150))
        doc, _ = generate_synthetic_trace(spec, seed=rng.randint(0, 10**9))
        analyses.append(Analysis.from_trace(doc))
    for a in analyses:
        r = a.breakdown()
        assert r.cpu_only + r.gpu_only + r.parallel + r.idle == r.total \
            == a.baseline.makespan


def test_mixed_precision_moves_only_gpu_component():
    report = _analysis(gpu_bound_trace()).whatif("amp")
    base = report["baseline_breakdown"]
    pred = report["predicted_breakdown"]
    assert pred["gpu_only_ns"] < base["gpu_only_ns"]
    assert pred["cpu_only_ns"] == base["cpu_only_ns"]


# 11. A single-stage collective decomposition reproduces the replaced
#     allReduce's transfer time exactly in unrounded arithmetic.

def test_single_stage_decomposition_matches_allreduce_exactly():
    for workers in (2, 3, 4, 8, 61):
        for size in (1, 1_000, 12_345_678, 10**9):
            for bw in (8, 10, 25, 100):
                cfg = NetworkConfig.from_object({
                    "workers": workers, "bandwidth_gbps": bw})
                stages = 2 * reduce_scatter_duration_exact(
                    Fraction(size), workers, cfg)
                assert stages == allreduce_duration_exact(size, cfg)
