"""Chrome-trace-format export of a simulated schedule.

Emits "X" (complete) events, one row per lane, with ts/dur in microseconds
as Chrome expects; lane names round-trip exactly through the tid field.
"""

from __future__ import annotations


from .errors import MismatchedInput
from .graph import DependencyGraph
from .sim import SimulationResult

_PID_OF_CLASS = {"CpuThread": 1, "GpuStream": 2, "CommChannel": 3}


def export_chrome_trace(result: SimulationResult, graph: DependencyGraph) -> dict:
    if set(result.start_of) != set(graph.tasks):
        raise MismatchedInput("simulation result and graph disagree on task ids")
    events = []
    for tid, start in sorted(result.start_of.items()):
        task = graph.tasks[tid]
        events.append({
            "name": task.name,
            "ph": "X",
            "ts": start / 1000,
            "dur": task.duration / 1000,
            "pid": _PID_OF_CLASS[task.lane.lane_class.value],
            "tid": str(task.lane),
            "args": {
                "id": task.id,
                "kind": task.kind.value,
                "layer": task.layer[0] if task.layer else None,
                "phase": task.layer[1].value if task.layer else None,
                "gap_ns": task.gap,
            },
        })
    return {"traceEvents": events}
