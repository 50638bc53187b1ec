"""Synchronization-free mapping of tasks to DNN layers and phases.

A CPU task belongs to the marker whose interval fully contains it on the
marker's lane (innermost marker when nested); a GPU task inherits the layer
of the CPU call that launched it.  Only original trace timestamps are
consulted, never simulated times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AmbiguousMarker
from .graph import DependencyGraph, EdgeKind
from .trace import CPU_KINDS, GPU_KINDS, LayerMarker, Phase

GLOBAL_LAYER = "_global"
UNMAPPED_LAYER = "_unmapped"


@dataclass
class LayerAssignment:
    mapped: dict[int, tuple[str, Phase]] = field(default_factory=dict)
    unmapped: set[int] = field(default_factory=set)

    def layer_of(self, task_id: int) -> tuple[str, Phase] | None:
        return self.mapped.get(task_id)


def _marker_for(task, markers: list[LayerMarker]) -> LayerMarker | None:
    start, end = task.trace_start, task.trace_start + task.duration
    covering = [
        m for m in markers
        if m.cpu_lane == task.lane and m.start <= start and end <= m.end
    ]
    if not covering:
        return None
    covering.sort(key=lambda m: (m.end - m.start, m.layer, m.phase.value))
    if len(covering) > 1:
        a, b = covering[0], covering[1]
        nested = (b.start <= a.start and a.end <= b.end)
        if not nested:
            raise AmbiguousMarker(
                f"task {task.id} falls inside overlapping markers "
                f"({a.layer}, {a.phase.value}) and ({b.layer}, {b.phase.value})"
            )
    return covering[0]


def map_tasks_to_layers(
    graph: DependencyGraph, markers: list[LayerMarker]
) -> LayerAssignment:
    """Assign (layer, phase) tags; the result is also written onto the tasks."""
    assignment = LayerAssignment()
    marker_list = list(markers)

    launcher_of: dict[int, int] = {}
    for u, v, kind in graph.edges:
        if kind is EdgeKind.LAUNCH_CORRELATION:
            launcher_of[v] = u

    for task in graph.tasks.values():
        if task.kind in CPU_KINDS and task.trace_start is not None:
            marker = _marker_for(task, marker_list)
            if marker is not None:
                layer = GLOBAL_LAYER if marker.layer == "*" else marker.layer
                assignment.mapped[task.id] = (layer, marker.phase)

    for task in graph.tasks.values():
        if task.kind in GPU_KINDS:
            launcher = launcher_of.get(task.id)
            if launcher is not None and launcher in assignment.mapped:
                assignment.mapped[task.id] = assignment.mapped[launcher]

    for tid in graph.tasks:
        if tid not in assignment.mapped:
            assignment.unmapped.add(tid)

    for tid, tag in assignment.mapped.items():
        graph.tasks[tid].layer = tag
    return assignment


def select_by_layer(
    graph: DependencyGraph, layer: str, phase: Phase | None = None
) -> set[int]:
    return {
        t.id
        for t in graph.tasks.values()
        if t.layer is not None
        and t.layer[0] == layer
        and (phase is None or t.layer[1] == phase)
    }
