"""High-level entry points shared by the CLI and the HTTP service."""

from __future__ import annotations

from dataclasses import dataclass

from .breakdown import BreakdownReport, compute_breakdown
from .graph import DependencyGraph, build_graph
from .layers import map_tasks_to_layers
from .scenarios import generate_pipeline
from .sim import SimulationResult, make_policy, simulate, speedup
from .trace import TraceDocument, parse_trace
from .transform import TransformPipeline, apply_pipeline


@dataclass
class Analysis:
    """A parsed trace with its built, layer-mapped graph and baseline run."""

    trace: TraceDocument
    graph: DependencyGraph
    baseline: SimulationResult

    @staticmethod
    def from_text(document_text: str, strict: bool = False) -> "Analysis":
        trace = parse_trace(document_text)
        return Analysis.from_trace(trace, strict=strict)

    @staticmethod
    def from_trace(trace: TraceDocument, strict: bool = False) -> "Analysis":
        graph = build_graph(trace, strict=strict)
        map_tasks_to_layers(graph, list(trace.layer_markers))
        return Analysis(trace=trace, graph=graph, baseline=simulate(graph))

    def pipeline_for(self, scenario: str, params: dict | None = None) -> TransformPipeline:
        return generate_pipeline(self.graph, scenario, params, trace=self.trace)

    def run_pipeline(self, pipeline: TransformPipeline) -> tuple[DependencyGraph, SimulationResult]:
        transformed = apply_pipeline(self.graph, pipeline)
        policy = make_policy(pipeline.schedule_policy, **pipeline.policy_params)
        return transformed, simulate(transformed, policy)

    def whatif(self, scenario: str, params: dict | None = None) -> dict:
        """Full what-if report: makespans, speedup and breakdowns."""
        pipeline = self.pipeline_for(scenario, params)
        transformed, predicted = self.run_pipeline(pipeline)
        return {
            "scenario": scenario,
            "baseline_makespan_ns": self.baseline.makespan,
            "predicted_makespan_ns": predicted.makespan,
            "speedup": speedup(self.baseline, predicted),
            "baseline_breakdown": compute_breakdown(self.baseline, self.graph).to_object(),
            "predicted_breakdown": compute_breakdown(predicted, transformed).to_object(),
            "lane_busy_ns": {
                str(lane): busy for lane, busy in sorted(
                    predicted.lane_busy.items(), key=lambda kv: str(kv[0]))
            },
        }

    def breakdown(self, result: SimulationResult | None = None,
                  graph: DependencyGraph | None = None) -> BreakdownReport:
        return compute_breakdown(result or self.baseline, graph or self.graph)
