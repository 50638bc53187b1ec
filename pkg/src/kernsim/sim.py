"""Frontier-driven simulation of the dependency graph.

Each step pops one ready task (chosen by the schedule policy), places it on
its lane at ``max(lane progress, ready time)``, then advances the lane and
its children by ``start + duration + gap``.  The gap deliberately delays
successors on other lanes too, modeling the untraced CPU overhead that
follows a call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Deadlock, ZeroBaseline
from .graph import DependencyGraph, Task
from .trace import LaneId


@dataclass
class SimulationState:
    lane_progress: dict[LaneId, int]
    ready_time: dict[int, int]
    remaining_parents: dict[int, int]
    tasks: dict[int, Task]

    def effective_start(self, task_id: int) -> int:
        task = self.tasks[task_id]
        return max(self.lane_progress.get(task.lane, 0), self.ready_time[task_id])


@dataclass(frozen=True)
class SimulationResult:
    start_of: dict[int, int]
    makespan: int
    lane_busy: dict[LaneId, int]
    schedule_trace: tuple[tuple[int, int], ...]

    def to_object(self) -> dict:
        return {
            "makespan_ns": self.makespan,
            "starts_ns": {str(tid): s for tid, s in sorted(self.start_of.items())},
            "lane_busy_ns": {str(lane): b for lane, b in sorted(
                self.lane_busy.items(), key=lambda kv: str(kv[0]))},
        }


class SchedulePolicy:
    """Picks the next task from the frontier; must be deterministic."""

    name = "default"

    def begin(self, graph: DependencyGraph) -> None:
        """Reset per-run state before a simulation starts."""

    def choose(self, state: SimulationState, frontier: set[int]) -> int:
        best = None
        best_key = None
        for tid in frontier:
            key = (state.effective_start(tid), tid)
            if best_key is None or key < best_key:
                best, best_key = tid, key
        assert best is not None
        return best


class DefaultSchedule(SchedulePolicy):
    """Earliest effective start, ties broken by smallest task id."""

    name = "default"


class PrioritySchedule(SchedulePolicy):
    """Earliest effective start; among tied communication tasks the higher
    priority wins, other ties fall back to smallest id."""

    name = "priority"

    def choose(self, state: SimulationState, frontier: set[int]) -> int:
        earliest = min(state.effective_start(tid) for tid in frontier)
        tied = sorted(tid for tid in frontier if state.effective_start(tid) == earliest)
        best = tied[0]
        for tid in tied[1:]:
            task, incumbent = state.tasks[tid], state.tasks[best]
            if task.is_comm and incumbent.is_comm and task.priority > incumbent.priority:
                best = tid
        return best


def simulate(graph: DependencyGraph, policy: SchedulePolicy | None = None) -> SimulationResult:
    """Assign start times to every task; the input graph is not mutated."""
    if policy is None:
        policy = DefaultSchedule()
    policy.begin(graph)

    children = graph.children_of()
    remaining = {tid: 0 for tid in graph.tasks}
    for _, v, _ in graph.edges:
        remaining[v] += 1

    state = SimulationState(
        lane_progress={},
        ready_time={tid: t.ready_time for tid, t in graph.tasks.items()},
        remaining_parents=remaining,
        tasks=graph.tasks,
    )
    frontier = {tid for tid, d in remaining.items() if d == 0}

    start_of: dict[int, int] = {}
    lane_busy: dict[LaneId, int] = {}
    trace: list[tuple[int, int]] = []
    makespan = 0

    while frontier:
        tid = policy.choose(state, frontier)
        if tid not in frontier:
            raise Deadlock(f"policy chose non-frontier task {tid}")
        frontier.discard(tid)
        task = graph.tasks[tid]
        start = state.effective_start(tid)
        start_of[tid] = start
        trace.append((tid, start))
        finish = start + task.duration
        state.lane_progress[task.lane] = finish + task.gap
        lane_busy[task.lane] = lane_busy.get(task.lane, 0) + task.duration
        makespan = max(makespan, finish)
        for c in children[tid]:
            remaining[c] -= 1
            state.ready_time[c] = max(state.ready_time[c], finish + task.gap)
            if remaining[c] == 0:
                frontier.add(c)

    if len(start_of) != len(graph.tasks):
        missing = sorted(set(graph.tasks) - set(start_of))[:10]
        raise Deadlock(f"{len(graph.tasks) - len(start_of)} tasks never became ready "
                       f"(first ids: {missing})")

    return SimulationResult(
        start_of=start_of,
        makespan=makespan,
        lane_busy=lane_busy,
        schedule_trace=tuple(trace),
    )


def speedup(baseline: SimulationResult, variant: SimulationResult) -> float:
    """Fractional improvement of ``variant`` over ``baseline`` (signed)."""
    if baseline.makespan == 0:
        raise ZeroBaseline("baseline makespan is zero")
    return (baseline.makespan - variant.makespan) / baseline.makespan


POLICIES: dict[str, type[SchedulePolicy]] = {
    "default": DefaultSchedule,
    "priority": PrioritySchedule,
}


def make_policy(name: str, **params) -> SchedulePolicy:
    from .scenarios import EXTRA_POLICIES  # avoid an import cycle

    if name in POLICIES:
        return POLICIES[name]()
    if name in EXTRA_POLICIES:
        return EXTRA_POLICIES[name](**params)
    raise ValueError(f"unknown schedule policy {name!r}")
