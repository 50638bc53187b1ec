"""Kernel-granularity dependency graph construction.

Edges come from five rules: same-lane CPU order, same-stream GPU order,
launch-call-to-kernel correlation, CUDA-synchronization blocking (including
blocking device-to-host memcpy launches), and same-channel communication
order.  Transformations later add ``Injected`` edges on top of these.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import CycleDetected, OrphanKernel
from .trace import (
    CPU_KINDS,
    GPU_KINDS,
    LaneId,
    Phase,
    TaskKind,
    TraceDocument,
)

DTOH_NAME_PREFIX = "memcpy_dtoh"


class EdgeKind(str, Enum):
    LANE_SEQ_CPU = "LaneSeqCpu"
    LANE_SEQ_GPU = "LaneSeqGpu"
    LAUNCH_CORRELATION = "LaunchCorrelation"
    SYNC_BLOCK = "SyncBlock"
    COMM_ORDER = "CommOrder"
    INJECTED = "Injected"


@dataclass
class Task:
    """One node of the dependency graph.

    ``ready_time`` starts at 0 for every task; original trace timestamps are
    kept only as construction metadata (``trace_start``) for ordering, gap
    computation and layer mapping, and are never consulted by simulation.
    """

    id: int
    kind: TaskKind
    name: str
    lane: LaneId
    duration: int               # ns
    gap: int = 0                # ns; CPU tasks only
    ready_time: int = 0         # ns
    correlation: int | None = None
    layer: tuple[str, Phase] | None = None
    priority: int = 0
    size_bytes: int | None = None
    trace_start: int | None = None

    @property
    def is_comm(self) -> bool:
        return self.kind is TaskKind.COMM


Edge = tuple[int, int, EdgeKind]


def lane_seq_kind(lane: LaneId) -> EdgeKind:
    if lane.is_cpu:
        return EdgeKind.LANE_SEQ_CPU
    if lane.is_gpu:
        return EdgeKind.LANE_SEQ_GPU
    return EdgeKind.COMM_ORDER


@dataclass
class DependencyGraph:
    tasks: dict[int, Task] = field(default_factory=dict)
    edges: set[Edge] = field(default_factory=set)
    # Tasks whose on-lane order is fixed (traced tasks and sequenced inserts).
    # Tasks absent from their lane's list are ordered by the scheduler alone.
    lane_order: dict[LaneId, list[int]] = field(default_factory=dict)

    def copy(self) -> "DependencyGraph":
        return DependencyGraph(
            tasks={tid: replace(t) for tid, t in self.tasks.items()},
            edges=set(self.edges),
            lane_order={lane: list(ids) for lane, ids in self.lane_order.items()},
        )

    def next_id(self) -> int:
        return max(self.tasks, default=-1) + 1

    def parents_of(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {tid: [] for tid in self.tasks}
        for u, v, _ in self.edges:
            out[v].append(u)
        return out

    def children_of(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {tid: [] for tid in self.tasks}
        for u, v, _ in self.edges:
            out[u].append(v)
        return out

    def to_object(self) -> dict:
        return {
            "tasks": [
                {
                    "id": t.id,
                    "kind": t.kind.value,
                    "name": t.name,
                    "lane": str(t.lane),
                    "duration_ns": t.duration,
                    "gap_ns": t.gap,
                    "correlation": t.correlation,
                    "layer": t.layer[0] if t.layer else None,
                    "phase": t.layer[1].value if t.layer else None,
                    "priority": t.priority,
                    "size_bytes": t.size_bytes,
                }
                for t in sorted(self.tasks.values(), key=lambda t: t.id)
            ],
            "edges": sorted([u, v, k.value] for u, v, k in self.edges),
            "lane_order": {str(lane): list(ids) for lane, ids in sorted(
                self.lane_order.items(), key=lambda kv: str(kv[0]))},
        }


def verify_acyclic(graph: DependencyGraph) -> list[int]:
    """Kahn topological sort with smallest-id tie-break; errors on a cycle."""
    indeg = {tid: 0 for tid in graph.tasks}
    children = graph.children_of()
    for _, v, _ in graph.edges:
        indeg[v] += 1
    heap = [tid for tid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for c in children[u]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(graph.tasks):
        cycle = _find_cycle(graph, {tid for tid in graph.tasks if indeg[tid] > 0})
        raise CycleDetected(f"dependency cycle: {cycle}", cycle)
    return order


def _find_cycle(graph: DependencyGraph, candidates: set[int]) -> list[int]:
    children = graph.children_of()
    color: dict[int, int] = {}
    stack_path: list[int] = []

    def dfs(start: int) -> list[int] | None:
        stack = [(start, iter(children[start]))]
        color[start] = 1
        stack_path.append(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for c in it:
                if c not in candidates:
                    continue
                if color.get(c) == 1:
                    i = stack_path.index(c)
                    return stack_path[i:] + [c]
                if color.get(c) is None:
                    color[c] = 1
                    stack_path.append(c)
                    stack.append((c, iter(children[c])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack_path.pop()
                stack.pop()
        return None

    for tid in sorted(candidates):
        if color.get(tid) is None:
            found = dfs(tid)
            if found:
                return found
    return sorted(candidates)


def _launch_calls(trace: TraceDocument) -> dict[int, "object"]:
    """Correlation id -> the CPU event that launched it."""
    launches: dict[int, object] = {}
    for e in trace.events:
        if e.kind in CPU_KINDS and e.correlation is not None:
            launches[e.correlation] = e
    return launches


def build_graph(trace: TraceDocument, strict: bool = False) -> DependencyGraph:
    """Construct the dependency graph for a validated trace.

    ``strict`` turns a GPU task without a matching CPU launch into an error;
    otherwise the correlation edge is dropped with no complaint (real traces
    drop events).
    """
    graph = DependencyGraph()
    for e in trace.events:
        graph.tasks[e.id] = Task(
            id=e.id,
            kind=e.kind,
            name=e.name,
            lane=e.lane,
            duration=e.duration,
            correlation=e.correlation,
            size_bytes=e.size_bytes,
            trace_start=e.start,
        )

    # Rules 1, 2 and 5: same-lane sequential order.
    by_lane: dict[LaneId, list] = {}
    for e in trace.events:
        by_lane.setdefault(e.lane, []).append(e)
    for lane, lane_events in sorted(by_lane.items(), key=lambda kv: str(kv[0])):
        lane_events.sort(key=lambda e: (e.start, e.id))
        graph.lane_order[lane] = [e.id for e in lane_events]
        kind = lane_seq_kind(lane)
        for a, b in zip(lane_events, lane_events[1:]):
            graph.edges.add((a.id, b.id, kind))

    # Rule 3: launch-call correlation.
    launches = _launch_calls(trace)
    for e in trace.events:
        if e.kind in GPU_KINDS:
            launch = launches.get(e.correlation)
            if launch is None:
                if strict:
                    raise OrphanKernel(
                        f"GPU task {e.id} correlation {e.correlation} has no CPU launch"
                    )
                continue
            graph.edges.add((launch.id, e.id, EdgeKind.LAUNCH_CORRELATION))

    link_syncs(trace, graph)
    compute_gaps(trace, graph)
    verify_acyclic(graph)
    return graph


def link_syncs(trace: TraceDocument, graph: DependencyGraph) -> DependencyGraph:
    """Rule 4: CUDA synchronization blocking (plus blocking DtoH memcpys).

    A sync gains one in-edge per awaited stream, from the newest GPU task on
    that stream whose launch call precedes the sync on the CPU-side timeline.
    An async ``memcpy_dtoh*`` launch blocks on its own memcpy's stream.
    """
    launches = _launch_calls(trace)
    gpu_lanes = sorted(
        {e.lane for e in trace.events if e.lane.is_gpu}, key=str
    )
    # Per stream: GPU events with a known launch, ordered by launch time.
    stream_tasks: dict[LaneId, list[tuple[int, int]]] = {lane: [] for lane in gpu_lanes}
    for e in trace.events:
        if e.kind in GPU_KINDS:
            launch = launches.get(e.correlation)
            if launch is not None:
                stream_tasks[e.lane].append((launch.start, e.id))
    for seq in stream_tasks.values():
        seq.sort()

    def latest_before(lane: LaneId, cutoff_start: int, exclude: int | None) -> int | None:
        best = None
        for launch_start, gid in stream_tasks.get(lane, []):
            if launch_start >= cutoff_start:
                break
            if gid != exclude:
                best = gid
        return best

    for e in trace.events:
        if e.kind is TaskKind.SYNC:
            targets = [e.sync_target] if e.sync_target is not None else gpu_lanes
            for lane in targets:
                gid = latest_before(lane, e.start, exclude=None)
                if gid is not None:
                    graph.edges.add((gid, e.id, EdgeKind.SYNC_BLOCK))
        elif e.kind in CPU_KINDS and e.name.startswith(DTOH_NAME_PREFIX):
            # Blocks until prior GPU work on the memcpy's own stream finishes.
            if e.correlation is None:
                continue
            memcpy = next(
                (g for g in trace.events if g.kind in GPU_KINDS and g.correlation == e.correlation),
                None,
            )
            if memcpy is None:
                continue
            gid = latest_before(memcpy.lane, e.start, exclude=memcpy.id)
            if gid is not None:
                graph.edges.add((gid, e.id, EdgeKind.SYNC_BLOCK))
    return graph


def compute_gaps(trace: TraceDocument, graph: DependencyGraph) -> DependencyGraph:
    """Per CPU task, the untraced time before its same-lane successor."""
    events = {e.id: e for e in trace.events}
    for lane, order in graph.lane_order.items():
        if not lane.is_cpu:
            continue
        for a_id, b_id in zip(order, order[1:]):
            a, b = events[a_id], events[b_id]
            graph.tasks[a_id].gap = max(0, b.start - a.end)
        if order:
            graph.tasks[order[-1]].gap = 0
    return graph
