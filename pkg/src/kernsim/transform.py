"""Graph-transformation primitives and the serializable pipeline format.

A pipeline is an ordered list of step objects ``{"op": ..., ...}`` plus an
optional schedule-policy override; it is the scenario payload shared by the
CLI, the HTTP service and the UI.  Pipelines are applied to a copy of the
graph and every step must leave it acyclic.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import (
    AcyclicityViolated,
    BadPipeline,
    BadSelector,
    CycleDetected,
    UnknownAnchor,
    UnknownTask,
)
from .graph import DependencyGraph, EdgeKind, Task, lane_seq_kind, verify_acyclic
from .trace import GPU_KINDS, LaneClass, LaneId, Phase, TaskKind


# --- selectors ---

@dataclass(frozen=True)
class Selector:
    """Composable predicate over task fields, serializable as a JSON object."""

    op: str
    args: tuple = ()

    def matches(self, task: Task) -> bool:
        if self.op == "all":
            return True
        if self.op == "kind":
            return task.kind is self.args[0]
        if self.op == "name_contains":
            return self.args[0] in task.name
        if self.op == "layer":
            layer, phase = self.args
            return (
                task.layer is not None
                and task.layer[0] == layer
                and (phase is None or task.layer[1] is phase)
            )
        if self.op == "lane_class":
            return task.lane.lane_class is self.args[0]
        if self.op == "and":
            return all(s.matches(task) for s in self.args)
        if self.op == "or":
            return any(s.matches(task) for s in self.args)
        if self.op == "not":
            return not self.args[0].matches(task)
        raise BadSelector(f"unknown selector op {self.op!r}")

    def to_object(self) -> Any:
        if self.op == "all":
            return {"all": True}
        if self.op == "kind":
            return {"kind": self.args[0].value}
        if self.op == "name_contains":
            return {"name_contains": self.args[0]}
        if self.op == "layer":
            layer, phase = self.args
            obj = {"layer": layer}
            if phase is not None:
                obj["phase"] = phase.value
            return obj
        if self.op == "lane_class":
            return {"lane_class": self.args[0].value}
        if self.op in ("and", "or"):
            return {self.op: [s.to_object() for s in self.args]}
        if self.op == "not":
            return {"not": self.args[0].to_object()}
        raise BadSelector(f"unknown selector op {self.op!r}")

    @staticmethod
    def from_object(obj: Any) -> "Selector":
        if not isinstance(obj, dict) or len(obj) not in (1, 2):
            raise BadSelector(f"bad selector object: {obj!r}")
        if "all" in obj:
            return All()
        if "kind" in obj:
            return ByKind(TaskKind(obj["kind"]))
        if "name_contains" in obj:
            return ByNameSubstring(obj["name_contains"])
        if "layer" in obj:
            phase = Phase(obj["phase"]) if "phase" in obj else None
            return ByLayer(obj["layer"], phase)
        if "lane_class" in obj:
            return ByLane(LaneClass(obj["lane_class"]))
        if "and" in obj:
            return And([Selector.from_object(o) for o in obj["and"]])
        if "or" in obj:
            return Or([Selector.from_object(o) for o in obj["or"]])
        if "not" in obj:
            return Not(Selector.from_object(obj["not"]))
        raise BadSelector(f"bad selector object: {obj!r}")


def All() -> Selector:
    return Selector("all")


def ByKind(kind: TaskKind) -> Selector:
    return Selector("kind", (kind,))


def ByNameSubstring(sub: str) -> Selector:
    return Selector("name_contains", (sub,))


def ByLayer(layer: str, phase: Phase | None = None) -> Selector:
    return Selector("layer", (layer, phase))


def ByLane(lane_class: LaneClass) -> Selector:
    return Selector("lane_class", (lane_class,))


def And(selectors: list[Selector]) -> Selector:
    return Selector("and", tuple(selectors))


def Or(selectors: list[Selector]) -> Selector:
    return Selector("or", tuple(selectors))


def Not(selector: Selector) -> Selector:
    return Selector("not", (selector,))


GPU_TASKS = Or([ByKind(TaskKind.GPU_KERNEL), ByKind(TaskKind.GPU_MEMCPY)])


def select(graph: DependencyGraph, selector: Selector) -> set[int]:
    return {t.id for t in graph.tasks.values() if selector.matches(t)}


# --- pipeline ---

@dataclass
class TransformPipeline:
    steps: list[dict] = field(default_factory=list)
    schedule_policy: str = "default"
    policy_params: dict = field(default_factory=dict)

    def to_object(self) -> dict:
        obj: dict[str, Any] = {"steps": self.steps}
        if self.schedule_policy != "default" or self.policy_params:
            obj["schedule_policy"] = {
                "name": self.schedule_policy,
                "params": self.policy_params,
            }
        return obj

    @staticmethod
    def from_object(obj: dict) -> "TransformPipeline":
        if not isinstance(obj, dict) or "steps" not in obj:
            raise BadPipeline("pipeline object must contain 'steps'")
        policy = obj.get("schedule_policy") or {}
        return TransformPipeline(
            steps=list(obj["steps"]),
            schedule_policy=policy.get("name", "default"),
            policy_params=dict(policy.get("params", {})),
        )


def round_half_up(value: Fraction) -> int:
    return int((value * 2 + 1) // 2) if value >= 0 else -int((-value * 2 + 1) // 2)


def scale_durations(graph: DependencyGraph, selector: Selector, factor: Fraction) -> None:
    if factor <= 0:
        raise BadPipeline(f"scale factor must be positive, got {factor}")
    for task in graph.tasks.values():
        if selector.matches(task):
            task.duration = round_half_up(task.duration * factor)


def default_launch_cost(graph: DependencyGraph) -> int:
    """Median duration of existing launch-style CUDA API calls (0 if none)."""
    durations = [
        t.duration
        for t in graph.tasks.values()
        if t.kind is TaskKind.CPU_API and "launch" in t.name.lower()
    ]
    if not durations:
        return 0
    return round_half_up(Fraction(statistics.median(durations)))


def _check_anchors(graph: DependencyGraph, ids: list[int]) -> None:
    for tid in ids:
        if tid not in graph.tasks:
            raise UnknownAnchor(f"anchor task {tid} does not exist")


def _sequence_into_lane(graph: DependencyGraph, task: Task,
                        after: list[int], before: list[int]) -> None:
    order = graph.lane_order.setdefault(task.lane, [])
    lo = 0
    for a in after:
        if a in order:
            lo = max(lo, order.index(a) + 1)
    hi = len(order)
    for b in before:
        if b in order:
            hi = min(hi, order.index(b))
    pos = max(lo, min(hi, len(order)))
    order.insert(pos, task.id)
    kind = lane_seq_kind(task.lane)
    idx = order.index(task.id)
    if idx > 0:
        graph.edges.add((order[idx - 1], task.id, kind))
    if idx + 1 < len(order):
        graph.edges.add((task.id, order[idx + 1], kind))


def insert_task(
    graph: DependencyGraph,
    task: Task,
    after: list[int],
    before: list[int],
    sequenced: bool = True,
) -> int:
    _check_anchors(graph, list(after) + list(before))
    if task.id in graph.tasks:
        raise BadPipeline(f"inserted task id {task.id} already exists")
    graph.tasks[task.id] = task
    for a in after:
        graph.edges.add((a, task.id, EdgeKind.INJECTED))
    for b in before:
        graph.edges.add((task.id, b, EdgeKind.INJECTED))
    if sequenced:
        _sequence_into_lane(graph, task, list(after), list(before))
    try:
        verify_acyclic(graph)
    except CycleDetected as exc:
        raise AcyclicityViolated(f"inserting task {task.id} created a cycle: {exc.cycle}")
    return task.id


def remove_task(graph: DependencyGraph, task_id: int) -> None:
    if task_id not in graph.tasks:
        raise UnknownTask(f"task {task_id} does not exist")
    parents = sorted({u for u, v, _ in graph.edges if v == task_id})
    children = sorted({v for u, v, _ in graph.edges if u == task_id})
    graph.edges = {e for e in graph.edges if task_id not in (e[0], e[1])}
    for p in parents:
        for c in children:
            if p != c:
                graph.edges.add((p, c, EdgeKind.INJECTED))
    task = graph.tasks.pop(task_id)
    order = graph.lane_order.get(task.lane)
    if order and task_id in order:
        idx = order.index(task_id)
        order.remove(task_id)
        if 0 < idx <= len(order) - 1:
            graph.edges.add((order[idx - 1], order[idx], lane_seq_kind(task.lane)))


def _task_from_object(obj: dict, graph: DependencyGraph, lane: LaneId | None = None) -> Task:
    layer = None
    if obj.get("layer") is not None:
        layer = (obj["layer"], Phase(obj.get("phase", "Forward")))
    return Task(
        id=obj["id"] if obj.get("id") is not None else graph.next_id(),
        kind=TaskKind(obj["kind"]),
        name=obj["name"],
        lane=lane if lane is not None else LaneId.parse(obj["lane"]),
        duration=int(obj["duration_ns"]),
        gap=int(obj.get("gap_ns", 0)),
        priority=int(obj.get("priority", 0)),
        size_bytes=obj.get("size_bytes"),
        layer=layer,
    )


def apply_step(graph: DependencyGraph, step: dict) -> None:
    op = step.get("op")
    if op == "scale":
        scale_durations(
            graph,
            Selector.from_object(step["selector"]),
            Fraction(str(step["factor"])),
        )
    elif op == "set_duration":
        tid = step["task_id"]
        if tid not in graph.tasks:
            raise UnknownTask(f"task {tid} does not exist")
        graph.tasks[tid].duration = int(step["duration_ns"])
    elif op == "set_priority":
        if "task_id" in step:
            ids = [step["task_id"]]
        else:
            ids = sorted(select(graph, Selector.from_object(step["selector"])))
        for tid in ids:
            if tid not in graph.tasks:
                raise UnknownTask(f"task {tid} does not exist")
            graph.tasks[tid].priority = int(step["priority"])
    elif op == "remove":
        if "task_id" in step:
            ids = [step["task_id"]]
        else:
            ids = sorted(select(graph, Selector.from_object(step["selector"])))
        for tid in ids:
            remove_task(graph, tid)
    elif op == "insert":
        task = _task_from_object(step["task"], graph)
        insert_task(
            graph,
            task,
            after=list(step.get("after", [])),
            before=list(step.get("before", [])),
            sequenced=bool(step.get("sequenced", True)),
        )
    elif op == "insert_gpu_with_launch":
        insert_gpu_with_launch_step(graph, step)
    else:
        raise BadPipeline(f"unknown pipeline op {op!r}")


def insert_gpu_with_launch_step(graph: DependencyGraph, step: dict) -> tuple[int, int]:
    kernel = _task_from_object(step["kernel"], graph)
    cpu_lane = LaneId.parse(step["cpu_lane"])
    launch_cost = step.get("launch_cost_ns")
    if launch_cost is None:
        launch_cost = default_launch_cost(graph)
    launch = Task(
        id=step.get("launch_id", graph.next_id()),
        kind=TaskKind.CPU_API,
        name=step.get("launch_name", f"cudaLaunchKernel_{kernel.name}"),
        lane=cpu_lane,
        duration=int(launch_cost),
        layer=kernel.layer,
    )
    if launch.id == kernel.id:
        launch.id = kernel.id + 1
    sequenced = bool(step.get("sequenced", True))
    # The launch is free-floating CPU work; only the kernel has to wait for
    # the GPU-side anchors, exactly like a trace-recorded launch correlation.
    # A free launch is elided so it cannot artificially delay its kernel
    # behind unrelated CPU-lane work.
    kernel_after = list(step.get("after", []))
    if launch.duration > 0:
        insert_task(graph, launch, after=[], before=[], sequenced=sequenced)
        kernel_after.append(launch.id)
    insert_task(graph, kernel, after=kernel_after,
                before=list(step.get("before", [])), sequenced=sequenced)
    return launch.id, kernel.id


def insert_gpu_with_launch(
    graph: DependencyGraph,
    kernel: Task,
    cpu_lane: LaneId,
    after: list[int],
    before: list[int],
    launch_cost_ns: int | None = None,
) -> tuple[int, int]:
    """Insert a GPU task together with the CPU call that launches it."""
    step = {
        "op": "insert_gpu_with_launch",
        "kernel": {
            "id": kernel.id,
            "kind": kernel.kind.value,
            "name": kernel.name,
            "lane": str(kernel.lane),
            "duration_ns": kernel.duration,
            "layer": kernel.layer[0] if kernel.layer else None,
            "phase": kernel.layer[1].value if kernel.layer else None,
        },
        "cpu_lane": str(cpu_lane),
        "after": list(after),
        "before": list(before),
    }
    if launch_cost_ns is not None:
        step["launch_cost_ns"] = launch_cost_ns
    return insert_gpu_with_launch_step(graph, step)


def apply_pipeline(graph: DependencyGraph, pipeline: TransformPipeline) -> DependencyGraph:
    """Apply all steps on a copy; the input graph is left untouched."""
    out = graph.copy()
    for step in pipeline.steps:
        apply_step(out, step)
        try:
            verify_acyclic(out)
        except CycleDetected as exc:
            raise AcyclicityViolated(
                f"step {step.get('op')!r} left a cycle: {exc.cycle}"
            )
    return out
