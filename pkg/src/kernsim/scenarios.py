"""Built-in what-if scenarios, each compiled to a transformation pipeline.

Every generator inspects the (already layer-mapped) graph and emits explicit,
replayable pipeline steps; the input graph is never mutated.  Kernel-name
conventions ("sgemm", "elementwise", ...) are parameters with library
defaults, since task selection is keyed off naming knowledge of cuDNN/cuBLAS.
"""

from __future__ import annotations

import statistics
from fractions import Fraction

from . import comm as commmod
from .comm import NetworkConfig
from .errors import (
    BadFactorization,
    BadRatio,
    MissingConvPairs,
    MissingLayerGradients,
    NoWeightUpdate,
    UnknownScenario,
)
from .graph import DependencyGraph, EdgeKind, Task
from .layers import GLOBAL_LAYER
from .trace import GPU_KINDS, LaneId, Phase, TaskKind, TraceDocument
from .transform import (
    And,
    ByKind,
    ByLayer,
    ByNameSubstring,
    GPU_TASKS,
    Not,
    Or,
    Selector,
    TransformPipeline,
    default_launch_cost,
    round_half_up,
)


# --- shared helpers ---

def _gpu_tasks(graph: DependencyGraph) -> list[Task]:
    return sorted(
        (t for t in graph.tasks.values() if t.kind in GPU_KINDS),
        key=lambda t: (t.trace_start or 0, t.id),
    )


def _launcher_of(graph: DependencyGraph) -> dict[int, int]:
    return {
        v: u for u, v, kind in graph.edges if kind is EdgeKind.LAUNCH_CORRELATION
    }


def _named_layers_forward_order(graph: DependencyGraph) -> list[str]:
    """Named layers ordered by earliest forward-phase trace timestamp."""
    first_seen: dict[str, int] = {}
    for t in graph.tasks.values():
        if t.layer is None or t.layer[0] == GLOBAL_LAYER:
            continue
        layer, phase = t.layer
        if phase is not Phase.FORWARD:
            continue
        ts = t.trace_start if t.trace_start is not None else 0
        if layer not in first_seen or ts < first_seen[layer]:
            first_seen[layer] = ts
    return sorted(first_seen, key=lambda l: (first_seen[l], l))


def _layer_tasks(graph: DependencyGraph, layer: str, phase: Phase | None = None,
                 gpu_only: bool = True) -> list[Task]:
    out = [
        t for t in graph.tasks.values()
        if t.layer is not None
        and t.layer[0] == layer
        and (phase is None or t.layer[1] is phase)
        and (not gpu_only or t.kind in GPU_KINDS)
    ]
    out.sort(key=lambda t: (t.trace_start or 0, t.id))
    return out


def median_elementwise_cost(graph: DependencyGraph,
                            keywords: tuple[str, ...] = ("elementwise", "pointwise")) -> int:
    kernels = [t for t in graph.tasks.values() if t.kind is TaskKind.GPU_KERNEL]
    matching = [
        t.duration for t in kernels
        if any(k in t.name.lower() for k in keywords)
    ]
    pool = matching or [t.duration for t in kernels]
    if not pool:
        return 0
    return round_half_up(Fraction(statistics.median(pool)))


def _first_cpu_lane(graph: DependencyGraph) -> LaneId:
    lanes = sorted({t.lane for t in graph.tasks.values() if t.lane.is_cpu}, key=str)
    return lanes[0] if lanes else LaneId.parse("cpu:0")


def _first_gpu_lane(graph: DependencyGraph) -> LaneId:
    lanes = sorted({t.lane for t in graph.tasks.values() if t.lane.is_gpu}, key=str)
    return lanes[0] if lanes else LaneId.parse("gpu:0:0")


class _Ids:
    """Deterministic id allocator for generated insert steps."""

    def __init__(self, graph: DependencyGraph):
        self._next = graph.next_id()

    def take(self) -> int:
        out = self._next
        self._next += 1
        return out


def _task_obj(task_id: int, kind: TaskKind, name: str, lane: LaneId,
              duration_ns: int, layer: tuple[str, Phase] | None = None,
              priority: int = 0, size_bytes: int | None = None) -> dict:
    obj = {
        "id": task_id,
        "kind": kind.value,
        "name": name,
        "lane": str(lane),
        "duration_ns": duration_ns,
        "priority": priority,
    }
    if layer is not None:
        obj["layer"] = layer[0]
        obj["phase"] = layer[1].value
    if size_bytes is not None:
        obj["size_bytes"] = size_bytes
    return obj


# --- scenarios ---

def whatif_amp(graph: DependencyGraph, compute_factor="1/3", memory_factor="1/2",
               compute_keywords="sgemm,scudnn") -> TransformPipeline:
    keywords = [k.strip() for k in str(compute_keywords).split(",") if k.strip()]
    compute_sel = And([GPU_TASKS, Or([ByNameSubstring(k) for k in keywords])])
    memory_sel = And([GPU_TASKS, Not(Or([ByNameSubstring(k) for k in keywords]))])
    return TransformPipeline(steps=[
        {"op": "scale", "selector": compute_sel.to_object(), "factor": str(compute_factor)},
        {"op": "scale", "selector": memory_sel.to_object(), "factor": str(memory_factor)},
    ])


def whatif_fused_adam(graph: DependencyGraph) -> TransformPipeline:
    kernels = [
        t for t in _gpu_tasks(graph)
        if t.kind is TaskKind.GPU_KERNEL
        and t.layer is not None and t.layer[1] is Phase.WEIGHT_UPDATE
    ]
    if not kernels:
        raise NoWeightUpdate("no weight-update GPU kernels in the graph")
    total = sum(t.duration for t in kernels)
    first, rest = kernels[0], kernels[1:]
    launcher = _launcher_of(graph)
    steps: list[dict] = [
        {"op": "set_duration", "task_id": first.id, "duration_ns": total}
    ]
    for t in rest:
        steps.append({"op": "remove", "task_id": t.id})
        if t.id in launcher:
            steps.append({"op": "remove", "task_id": launcher[t.id]})
    return TransformPipeline(steps=steps)


def whatif_reconstruct_batchnorm(graph: DependencyGraph, relu_keyword="relu",
                                 batchnorm_keyword="batchnorm",
                                 include_backward=False) -> TransformPipeline:
    relu_kw = str(relu_keyword).lower()
    bn_kw = str(batchnorm_keyword).lower()
    layers = {t.layer[0] for t in graph.tasks.values() if t.layer is not None}
    relu_layers = sorted(l for l in layers if relu_kw in l.lower())
    bn_layers = sorted(l for l in layers if bn_kw in l.lower())

    steps: list[dict] = []
    phases = [Phase.FORWARD] + ([Phase.BACKWARD] if include_backward else [])
    for layer in relu_layers:
        for phase in phases:
            for t in _layer_tasks(graph, layer, phase):
                steps.append({"op": "remove", "task_id": t.id})
    for layer in bn_layers:
        sel = And([GPU_TASKS, ByLayer(layer)])
        steps.append({"op": "scale", "selector": sel.to_object(), "factor": "1/2"})
    return TransformPipeline(steps=steps)


def whatif_distributed(graph: DependencyGraph, trace: TraceDocument | None = None,
                       **net_params) -> TransformPipeline:
    cfg = NetworkConfig.from_object(net_params)
    if cfg.n_workers == 1:
        # A single worker has nothing to reduce.
        return TransformPipeline(steps=[])
    buckets = net_params.get("buckets")
    if buckets is None and trace is not None:
        buckets = trace.gradient_buckets
    if buckets is None:
        raise MissingLayerGradients("no gradient bucket map available")
    if isinstance(buckets, dict):
        from .trace import GradientBucketMap
        buckets = GradientBucketMap(
            bucket_of_layer=dict(buckets["bucket_of_layer"]),
            bucket_size_bytes={int(k): v for k, v in buckets["bucket_size_bytes"].items()},
        )

    wu = commmod.earliest_weight_update_task(graph)
    if wu is None:
        raise NoWeightUpdate("no weight-update tasks in the graph")
    ids = _Ids(graph)
    steps: list[dict] = []
    for bucket in buckets.buckets():
        layers = buckets.layers_of_bucket(bucket)
        if not layers:
            continue
        size = buckets.bucket_size_bytes[bucket]
        after = []
        for layer in layers:
            src = commmod.last_backward_gpu_task(graph, layer)
            if src is None:
                from .errors import MissingLayer
                raise MissingLayer(
                    f"bucket {bucket}: layer {layer!r} has no backward GPU tasks")
            after.append(src.id)
        steps.append({
            "op": "insert",
            "task": _task_obj(
                ids.take(), TaskKind.COMM, f"allreduce_bucket_{bucket}",
                commmod.COLLECTIVE_LANE,
                commmod.allreduce_duration(size, cfg), size_bytes=size,
            ),
            "after": sorted(after),
            "before": [wu.id],
            "sequenced": True,
        })
    return TransformPipeline(steps=steps)


def _layer_gradients(graph: DependencyGraph, trace: TraceDocument | None,
                     params: dict) -> dict[str, int]:
    explicit = params.get("layer_gradient_bytes")
    if explicit:
        return {str(k): int(v) for k, v in explicit.items()}
    buckets = trace.gradient_buckets if trace is not None else None
    if buckets is None:
        raise MissingLayerGradients(
            "need layer_gradient_bytes or a gradient bucket map in the trace")
    out: dict[str, int] = {}
    for bucket in buckets.buckets():
        members = buckets.layers_of_bucket(bucket)
        if not members:
            continue
        share = buckets.bucket_size_bytes[bucket] // len(members)
        rem = buckets.bucket_size_bytes[bucket] - share * len(members)
        for i, layer in enumerate(members):
            out[layer] = share + (rem if i == 0 else 0)
    return out


def whatif_p3(graph: DependencyGraph, trace: TraceDocument | None = None,
              slice_size_bytes=4_194_304, n_servers=2, **net_params) -> TransformPipeline:
    cfg = NetworkConfig.from_object(net_params)
    slice_size = int(slice_size_bytes)
    if slice_size <= 0:
        raise BadRatio("slice_size_bytes must be positive")
    gradients = _layer_gradients(graph, trace, net_params)
    order = _named_layers_forward_order(graph)
    layers = [l for l in order if l in gradients]
    if not layers:
        raise MissingLayerGradients("no mapped layers with gradient sizes")

    send_lane = LaneId.parse("comm:send")
    recv_lane = LaneId.parse("comm:recv")
    ids = _Ids(graph)
    steps: list[dict] = []
    slice_counter = 0
    n_layers = len(order)
    for layer in layers:
        bwd = commmod.last_backward_gpu_task(graph, layer)
        if bwd is None:
            continue
        fwd_tasks = _layer_tasks(graph, layer, Phase.FORWARD)
        nxt = next(
            (t for t in fwd_tasks
             if (t.trace_start or 0) >= (bwd.trace_start or 0) + bwd.duration),
            None,
        )
        distance = n_layers - 1 - order.index(layer)
        priority = -distance
        g = gradients[layer]
        while g > 0:
            s = min(g, slice_size)
            dur = commmod.push_pull_duration(s, cfg)
            push_id, pull_id = ids.take(), ids.take()
            server = slice_counter % max(1, int(n_servers))
            pull_lane = send_lane if server == 0 else recv_lane
            steps.append({
                "op": "insert",
                "task": _task_obj(push_id, TaskKind.COMM, f"push_{layer}_{slice_counter}",
                                  send_lane, dur, priority=priority, size_bytes=s),
                "after": [bwd.id],
                "sequenced": False,
            })
            steps.append({
                "op": "insert",
                "task": _task_obj(pull_id, TaskKind.COMM, f"pull_{layer}_{slice_counter}",
                                  pull_lane, dur, priority=priority, size_bytes=s),
                "after": [push_id],
                "before": [nxt.id] if nxt is not None else [],
                "sequenced": False,
            })
            slice_counter += 1
            g -= s
    return TransformPipeline(steps=steps, schedule_policy="priority")


def whatif_blueconnect(graph: DependencyGraph, factorization="", **net_params) -> TransformPipeline:
    cfg = NetworkConfig.from_object(net_params)
    if isinstance(factorization, str):
        factors = [int(x) for x in factorization.split(",") if x.strip()]
    else:
        factors = [int(x) for x in factorization]
    if not factors or any(p < 2 for p in factors):
        raise BadFactorization(f"need factors >= 2, got {factors}")
    product = 1
    for p in factors:
        product *= p
    if product != cfg.n_workers:
        raise BadFactorization(
            f"factorization product {product} != n_workers {cfg.n_workers}")
    if len(factors) > cfg.channels:
        raise BadFactorization(
            f"{len(factors)} stages need at least that many channels, have {cfg.channels}")

    allreduces = sorted(
        (t for t in graph.tasks.values()
         if t.kind is TaskKind.COMM and "allreduce" in t.name.lower()),
        key=lambda t: t.id,
    )
    parents_of = graph.parents_of()
    children_of = graph.children_of()
    ids = _Ids(graph)
    steps: list[dict] = []
    for ar in allreduces:
        size = Fraction(ar.size_bytes or 0)
        parents = sorted(set(parents_of[ar.id]))
        children = sorted(set(children_of[ar.id]))
        steps.append({"op": "remove", "task_id": ar.id})
        prev: int | None = None
        stage_sizes = []
        cur = size
        for p in factors:
            stage_sizes.append((p, cur))
            cur = cur / p
        chain = list(enumerate(stage_sizes)) \
            + [(i, ps) for i, ps in reversed(list(enumerate(stage_sizes)))]
        for idx, (stage, (p, s)) in enumerate(chain):
            is_rs = idx < len(factors)
            dur = round_half_up(
                commmod.reduce_scatter_duration_exact(s, p, cfg)
            )
            name = ("reduce_scatter" if is_rs else "all_gather") + f"_{ar.name}_{stage + 1}"
            lane = LaneId.parse(f"comm:channel:{stage + 1}")
            tid = ids.take()
            steps.append({
                "op": "insert",
                "task": _task_obj(tid, TaskKind.COMM, name, lane, dur,
                                  size_bytes=int(s) if s == int(s) else None),
                "after": [prev] if prev is not None else parents,
                "before": children if idx == len(chain) - 1 else [],
                "sequenced": False,
            })
            prev = tid
    return TransformPipeline(steps=steps)


def whatif_metaflow(graph: DependencyGraph, remove_layers="", scale_layers="") -> TransformPipeline:
    if isinstance(remove_layers, str):
        removed = [l.strip() for l in remove_layers.split(",") if l.strip()]
    else:
        removed = list(remove_layers)
    if isinstance(scale_layers, str):
        scaled: list[tuple[str, str]] = []
        for part in scale_layers.split(","):
            if part.strip():
                layer, _, factor = part.partition(":")
                scaled.append((layer.strip(), factor.strip() or "1"))
    else:
        scaled = [(str(l), str(f)) for l, f in scale_layers]

    steps: list[dict] = []
    for layer in removed:
        for t in _layer_tasks(graph, layer):
            steps.append({"op": "remove", "task_id": t.id})
    for layer, factor in scaled:
        sel = And([GPU_TASKS, ByLayer(layer)])
        steps.append({"op": "scale", "selector": sel.to_object(), "factor": factor})
    return TransformPipeline(steps=steps)


MEMCPY_LANE_KEY = "0:memcpy"


def whatif_vdnn(graph: DependencyGraph, pcie_bandwidth_gbps=128,
                conv_keyword="conv", default_feature_map_bytes=4_194_304,
                feature_map_bytes=None, launch_cost_ns=None) -> TransformPipeline:
    kw = str(conv_keyword).lower()
    conv_layers = [
        l for l in _named_layers_forward_order(graph)
        if kw in l.lower()
        and _layer_tasks(graph, l, Phase.FORWARD)
        and _layer_tasks(graph, l, Phase.BACKWARD)
    ]
    if not conv_layers:
        raise MissingConvPairs("no convolution layers with forward and backward tasks")

    launch_cost = int(launch_cost_ns) if launch_cost_ns is not None \
        else default_launch_cost(graph)
    bw_bits = Fraction(str(pcie_bandwidth_gbps)) * commmod.NS_PER_SEC
    sizes = {str(k): int(v) for k, v in (feature_map_bytes or {}).items()}
    cpu_lane = _first_cpu_lane(graph)
    memcpy_lane = LaneId.parse(f"gpu:{MEMCPY_LANE_KEY}")
    ids = _Ids(graph)
    steps: list[dict] = []

    def cpu_step(tid: int, name: str, layer: tuple[str, Phase], after: list[int],
                 before: list[int] = ()) -> dict:
        return {
            "op": "insert",
            "task": _task_obj(tid, TaskKind.CPU_API, name, cpu_lane, launch_cost,
                              layer=layer),
            "after": list(after), "before": list(before), "sequenced": False,
        }

    for layer in conv_layers:
        size = sizes.get(layer, int(default_feature_map_bytes))
        copy_dur = round_half_up(Fraction(8 * size) / bw_bits * commmod.NS_PER_SEC)
        bwd_first = _layer_tasks(graph, layer, Phase.BACKWARD)[0]
        for fwd in _layer_tasks(graph, layer, Phase.FORWARD):
            tag_f = (layer, Phase.FORWARD)
            tag_b = (layer, Phase.BACKWARD)
            t1, t2, t3, t4, t5, t6 = (ids.take() for _ in range(6))
            steps.append(cpu_step(t1, "memcpyLaunch_vdnn_offload", tag_f, [fwd.id]))
            steps.append({
                "op": "insert",
                "task": _task_obj(t2, TaskKind.GPU_MEMCPY, "memcpy_dtoh_vdnn",
                                  memcpy_lane, copy_dur, layer=tag_f, size_bytes=size),
                "after": [t1], "sequenced": False,
            })
            steps.append(cpu_step(t3, "cudaFree_vdnn", tag_b, [t2]))
            steps.append(cpu_step(t4, "cudaMalloc_vdnn", tag_b, [t3]))
            steps.append(cpu_step(t5, "memcpyLaunch_vdnn_prefetch", tag_b, [t4]))
            steps.append({
                "op": "insert",
                "task": _task_obj(t6, TaskKind.GPU_MEMCPY, "memcpy_htod_vdnn",
                                  memcpy_lane, copy_dur, layer=tag_b, size_bytes=size),
                "after": [t5], "before": [bwd_first.id], "sequenced": False,
            })
    return TransformPipeline(
        steps=steps,
        schedule_policy="vdnn_prefetch",
        policy_params={"conv_order": conv_layers},
    )


def whatif_gist(graph: DependencyGraph, lossy=False, kernel_cost_ns=None,
                relu_keyword="relu", pool_keyword="pool",
                conv_keyword="conv", launch_cost_ns=None) -> TransformPipeline:
    cost = int(kernel_cost_ns) if kernel_cost_ns is not None \
        else median_elementwise_cost(graph)
    launch_cost = int(launch_cost_ns) if launch_cost_ns is not None \
        else default_launch_cost(graph)
    cpu_lane = _first_cpu_lane(graph)
    ids = _Ids(graph)
    steps: list[dict] = []

    def layer_type(task: Task, keyword: str) -> bool:
        return (
            task.layer is not None
            and task.layer[1] is Phase.FORWARD
            and keyword in task.layer[0].lower()
        )

    def gpu_insert(name: str, lane: LaneId, layer: tuple[str, Phase],
                   after: list[int], before: list[int]) -> int:
        launch_id, kernel_id = ids.take(), ids.take()
        steps.append({
            "op": "insert_gpu_with_launch",
            "kernel": _task_obj(kernel_id, TaskKind.GPU_KERNEL, name, lane, cost,
                                layer=layer),
            "launch_id": launch_id,
            "cpu_lane": str(cpu_lane),
            "launch_cost_ns": launch_cost,
            "after": list(after),
            "before": list(before),
            "sequenced": False,
        })
        return kernel_id

    relu_kw, pool_kw, conv_kw = (str(k).lower() for k in
                                 (relu_keyword, pool_keyword, conv_keyword))
    for lane, order in sorted(graph.lane_order.items(), key=lambda kv: str(kv[0])):
        if not lane.is_gpu:
            continue
        tasks = [graph.tasks[tid] for tid in order]
        for i, u in enumerate(tasks):
            if i + 1 >= len(tasks):
                break
            v = tasks[i + 1]
            w = tasks[i + 2] if i + 2 < len(tasks) else None
            if not (layer_type(u, relu_kw) and layer_type(v, pool_kw)):
                continue
            if w is not None and layer_type(w, conv_kw):
                encode = gpu_insert("gist_encode_ssdc", lane, v.layer,
                                    [v.id], [w.id])
            else:
                encode = gpu_insert("gist_encode_binarize", lane, v.layer,
                                    [v.id], [w.id] if w is not None else [])
            bwd = _layer_tasks(graph, u.layer[0], Phase.BACKWARD)
            if bwd:
                gpu_insert("gist_decode", lane, (u.layer[0], Phase.BACKWARD),
                           [encode], [bwd[0].id])
    if lossy:
        for lane, order in sorted(graph.lane_order.items(), key=lambda kv: str(kv[0])):
            if not lane.is_gpu:
                continue
            tasks = [graph.tasks[tid] for tid in order]
            for i, u in enumerate(tasks):
                if u.layer is None or u.layer[1] is not Phase.FORWARD:
                    continue
                if relu_kw in u.layer[0].lower():
                    continue
                nxt = tasks[i + 1] if i + 1 < len(tasks) else None
                gpu_insert("gist_dpr", lane, u.layer, [u.id],
                           [nxt.id] if nxt is not None else [])
    return TransformPipeline(steps=steps)


def whatif_dgc(graph: DependencyGraph, compression_ratio="0.01",
               compress_cost_ns=0, decompress_cost_ns=0) -> TransformPipeline:
    ratio = Fraction(str(compression_ratio))
    if ratio <= 0:
        raise BadRatio(f"compression ratio must be > 0, got {ratio}")
    comm_tasks = sorted(
        (t for t in graph.tasks.values() if t.kind is TaskKind.COMM),
        key=lambda t: t.id,
    )
    parents_of = graph.parents_of()
    children_of = graph.children_of()
    gpu_lane_default = _first_gpu_lane(graph)
    ids = _Ids(graph)
    steps: list[dict] = [
        {"op": "scale", "selector": ByKind(TaskKind.COMM).to_object(),
         "factor": str(ratio)},
    ]
    for r in comm_tasks:
        parents = sorted(set(parents_of[r.id]))
        children = sorted(set(children_of[r.id]))
        gpu_parents = [p for p in parents if graph.tasks[p].kind in GPU_KINDS]
        lane = graph.tasks[gpu_parents[0]].lane if gpu_parents else gpu_lane_default
        q_id, s_id, d_id = ids.take(), ids.take(), ids.take()
        steps.append({
            "op": "insert",
            "task": _task_obj(q_id, TaskKind.GPU_KERNEL, f"dgc_quantize_{r.id}",
                              lane, int(compress_cost_ns), layer=r.layer),
            "after": parents, "before": [r.id], "sequenced": False,
        })
        steps.append({
            "op": "insert",
            "task": _task_obj(s_id, TaskKind.GPU_KERNEL, f"dgc_sparsify_{r.id}",
                              lane, int(compress_cost_ns), layer=r.layer),
            "after": [q_id], "before": [r.id], "sequenced": False,
        })
        steps.append({
            "op": "insert",
            "task": _task_obj(d_id, TaskKind.GPU_KERNEL, f"dgc_decompress_{r.id}",
                              lane, int(decompress_cost_ns), layer=r.layer),
            "after": [r.id], "before": children, "sequenced": False,
        })
    return TransformPipeline(steps=steps)


# --- vDNN prefetch-delaying schedule policy ---

from .sim import SchedulePolicy, SimulationState  # noqa: E402


class VdnnPrefetchPolicy(SchedulePolicy):
    """Defers prefetch allocations until their conv layer is next in backward.

    Among ready ``cudaMalloc_vdnn`` tasks only the one for the closest
    upcoming offloaded conv layer (highest forward index not yet prefetched)
    may run; other prefetches wait.
    """

    name = "vdnn_prefetch"

    def __init__(self, conv_order: list[str] | None = None):
        self.conv_order = list(conv_order or [])
        self._done: set[int] = set()

    def begin(self, graph) -> None:
        self._done = set()

    def _rank(self, task: Task) -> int:
        if task.layer is None:
            return -1
        try:
            return self.conv_order.index(task.layer[0])
        except ValueError:
            return -1

    def choose(self, state: SimulationState, frontier: set[int]) -> int:
        mallocs = {
            tid for tid in frontier
            if state.tasks[tid].name.startswith("cudaMalloc_vdnn")
        }
        candidates = set(frontier) - mallocs
        if mallocs:
            eligible = max(mallocs, key=lambda tid: (self._rank(state.tasks[tid]), -tid))
            candidates.add(eligible)
        chosen = super().choose(state, candidates)
        if chosen in mallocs:
            self._done.add(chosen)
        return chosen


EXTRA_POLICIES = {"vdnn_prefetch": VdnnPrefetchPolicy}


# --- registry ---

def _num(default, description=""):
    return {"type": "number", "default": default, "description": description}


def _text(default, description=""):
    return {"type": "string", "default": default, "description": description}


def _flag(default, description=""):
    return {"type": "boolean", "default": default, "description": description}


NET_PARAMS = {
    "workers": _num(1, "number of workers"),
    "bandwidth_gbps": _num(10, "network bandwidth, Gbit/s"),
    "latency_us": _num(0, "per-primitive additive latency"),
    "channels": _num(1, "parallel communication channels"),
    "contention_factor": _text("1", "multiplier on theoretical transfer time"),
}

REGISTRY: dict[str, dict] = {
    "amp": {
        "generator": whatif_amp,
        "needs_trace": False,
        "description": "Mixed precision: shrink compute-bound GPU kernels by "
                       "3x and the rest by 2x.",
        "params": {
            "compute_factor": _text("1/3", "duration factor for matmul-style kernels"),
            "memory_factor": _text("1/2", "duration factor for other GPU tasks"),
            "compute_keywords": _text("sgemm,scudnn", "compute-kernel name keywords"),
        },
    },
    "fused_adam": {
        "generator": whatif_fused_adam,
        "needs_trace": False,
        "description": "Fuse all weight-update kernels into one of summed duration.",
        "params": {},
    },
    "reconstruct_batchnorm": {
        "generator": whatif_reconstruct_batchnorm,
        "needs_trace": False,
        "description": "Drop ReLU-layer GPU kernels, halve batchnorm kernels.",
        "params": {
            "relu_keyword": _text("relu"),
            "batchnorm_keyword": _text("batchnorm"),
            "include_backward": _flag(False, "also remove backward ReLU kernels"),
        },
    },
    "distributed": {
        "generator": whatif_distributed,
        "needs_trace": True,
        "description": "Add one allReduce per gradient bucket for data-parallel "
                       "training.",
        "params": dict(NET_PARAMS),
    },
    "p3": {
        "generator": whatif_p3,
        "needs_trace": True,
        "description": "Sliced, priority-scheduled parameter-server push/pull.",
        "params": {
            "slice_size_bytes": _num(4_194_304, "gradient slice size"),
            "n_servers": _num(2, "parameter servers, round-robin slice placement"),
            **NET_PARAMS,
        },
    },
    "blueconnect": {
        "generator": whatif_blueconnect,
        "needs_trace": False,
        "description": "Decompose each allReduce into reduce-scatter/all-gather "
                       "stages over parallel channels.",
        "params": {
            "factorization": _text("", "comma-separated worker factorization"),
            **NET_PARAMS,
        },
    },
    "metaflow": {
        "generator": whatif_metaflow,
        "needs_trace": False,
        "description": "Layer-wise removal and scaling for graph-substitution "
                       "policies.",
        "params": {
            "remove_layers": _text("", "comma-separated layer names to drop"),
            "scale_layers": _text("", "layer:factor pairs, comma-separated"),
        },
    },
    "vdnn": {
        "generator": whatif_vdnn,
        "needs_trace": False,
        "description": "Offload conv feature maps over PCIe with deferred "
                       "prefetching.",
        "params": {
            "pcie_bandwidth_gbps": _num(128, "PCIe bandwidth, Gbit/s"),
            "conv_keyword": _text("conv"),
            "default_feature_map_bytes": _num(4_194_304),
        },
    },
    "gist": {
        "generator": whatif_gist,
        "needs_trace": False,
        "description": "Insert feature-map encode/decode kernels (lossless or "
                       "lossy).",
        "params": {
            "lossy": _flag(False, "also insert precision-reduction kernels"),
            "relu_keyword": _text("relu"),
            "pool_keyword": _text("pool"),
            "conv_keyword": _text("conv"),
        },
    },
    "dgc": {
        "generator": whatif_dgc,
        "needs_trace": False,
        "description": "Compress gradients: shrink comm tasks, add "
                       "compression/decompression kernels.",
        "params": {
            "compression_ratio": _text("0.01"),
            "compress_cost_ns": _num(0),
            "decompress_cost_ns": _num(0),
        },
    },
}


def registry() -> list[dict]:
    """All scenarios plus "custom", suitable for UI form generation."""
    out = [
        {"name": name, "description": entry["description"], "params": entry["params"]}
        for name, entry in sorted(REGISTRY.items())
    ]
    out.append({
        "name": "custom",
        "description": "User-supplied transformation pipeline.",
        "params": {"pipeline": {"type": "object", "default": {"steps": []},
                                "description": "pipeline document"}},
    })
    return out


def generate_pipeline(graph: DependencyGraph, name: str, params: dict | None = None,
                      trace: TraceDocument | None = None) -> TransformPipeline:
    params = dict(params or {})
    if name == "custom":
        return TransformPipeline.from_object(params.get("pipeline", {"steps": []}))
    entry = REGISTRY.get(name)
    if entry is None:
        raise UnknownScenario(f"unknown scenario {name!r}")
    if entry["needs_trace"]:
        return entry["generator"](graph, trace=trace, **params)
    return entry["generator"](graph, **params)
