"""Trace-driven what-if simulator for DNN training workloads."""

from .api import Analysis
from .breakdown import BreakdownReport, compute_breakdown
from .comm import NetworkConfig, allreduce_duration, insert_distributed, push_pull_duration
from .graph import DependencyGraph, EdgeKind, Task, build_graph, verify_acyclic
from .layers import LayerAssignment, map_tasks_to_layers, select_by_layer
from .scenarios import generate_pipeline, registry
from .sim import (
    DefaultSchedule,
    PrioritySchedule,
    SimulationResult,
    simulate,
    speedup,
)
from .synthetic import generate_synthetic_trace, longest_path_makespan
from .trace import LaneId, Phase, TaskKind, TraceDocument, dump_trace, parse_trace
from .transform import Selector, TransformPipeline, apply_pipeline

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "BreakdownReport",
    "DefaultSchedule",
    "DependencyGraph",
    "EdgeKind",
    "LaneId",
    "LayerAssignment",
    "NetworkConfig",
    "Phase",
    "PrioritySchedule",
    "Selector",
    "SimulationResult",
    "Task",
    "TaskKind",
    "TraceDocument",
    "TransformPipeline",
    "allreduce_duration",
    "apply_pipeline",
    "build_graph",
    "compute_breakdown",
    "dump_trace",
    "generate_pipeline",
    "generate_synthetic_trace",
    "insert_distributed",
    "longest_path_makespan",
    "map_tasks_to_layers",
    "parse_trace",
    "push_pull_duration",
    "registry",
    "select_by_layer",
    "simulate",
    "speedup",
    "verify_acyclic",
]
