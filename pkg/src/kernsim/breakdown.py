"""Runtime decomposition of a simulated schedule.

An exact interval sweep over [0, makespan) classifies every instant as
CPU-only, GPU-only, CPU+GPU parallel, or idle; the four components always
sum to the makespan.  CPU gaps count as CPU-busy time by default since they
model real (untraced) framework work.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import DependencyGraph
from .layers import UNMAPPED_LAYER
from .sim import SimulationResult
from .trace import TaskKind


@dataclass(frozen=True)
class BreakdownReport:
    cpu_only: int
    gpu_only: int
    parallel: int
    idle: int
    total: int
    per_layer: dict[str, tuple[int, int]] = field(default_factory=dict)

    def to_object(self) -> dict:
        return {
            "cpu_only_ns": self.cpu_only,
            "gpu_only_ns": self.gpu_only,
            "parallel_ns": self.parallel,
            "idle_ns": self.idle,
            "total_ns": self.total,
            "per_layer": {
                layer: {"cpu_ns": cpu, "gpu_ns": gpu}
                for layer, (cpu, gpu) in sorted(self.per_layer.items())
            },
        }


def compute_breakdown(
    result: SimulationResult,
    graph: DependencyGraph,
    comm_as_gpu: bool = True,
    dataload_as_cpu: bool = True,
    gaps_as_cpu_busy: bool = True,
) -> BreakdownReport:
    cpu_delta: dict[int, int] = {}
    gpu_delta: dict[int, int] = {}

    def mark(delta: dict[int, int], start: int, end: int) -> None:
        if end > start:
            delta[start] = delta.get(start, 0) + 1
            delta[end] = delta.get(end, 0) - 1

    for tid, start in result.start_of.items():
        task = graph.tasks[tid]
        end = start + task.duration
        if task.lane.is_cpu:
            if task.kind is TaskKind.DATA_LOAD and not dataload_as_cpu:
                continue
            mark(cpu_delta, start, end + (task.gap if gaps_as_cpu_busy else 0))
        elif task.lane.is_gpu:
            mark(gpu_delta, start, end)
        else:
            mark(gpu_delta if comm_as_gpu else cpu_delta, start, end)

    points = sorted(set(cpu_delta) | set(gpu_delta) | {0, result.makespan})
    points = [p for p in points if 0 <= p <= result.makespan]
    cpu_only = gpu_only = parallel = idle = 0
    cpu_level = gpu_level = 0
    for a, b in zip(points, points[1:]):
        cpu_level += cpu_delta.get(a, 0)
        gpu_level += gpu_delta.get(a, 0)
        span = b - a
        if cpu_level > 0 and gpu_level > 0:
            parallel += span
        elif cpu_level > 0:
            cpu_only += span
        elif gpu_level > 0:
            gpu_only += span
        else:
            idle += span

    return BreakdownReport(
        cpu_only=cpu_only,
        gpu_only=gpu_only,
        parallel=parallel,
        idle=idle,
        total=result.makespan,
        per_layer=per_layer_breakdown(result, graph),
    )


def per_layer_breakdown(
    result: SimulationResult, graph: DependencyGraph
) -> dict[str, tuple[int, int]]:
    """Per layer, the total CPU and GPU task durations (comm excluded)."""
    out: dict[str, list[int]] = {}
    for tid in result.start_of:
        task = graph.tasks[tid]
        if task.lane.is_comm:
            continue
        layer = task.layer[0] if task.layer is not None else UNMAPPED_LAYER
        bucket = out.setdefault(layer, [0, 0])
        if task.lane.is_cpu:
            bucket[0] += task.duration
        else:
            bucket[1] += task.duration
    return {layer: (cpu, gpu) for layer, (cpu, gpu) in out.items()}
