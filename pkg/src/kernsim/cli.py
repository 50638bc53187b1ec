"""Command-line interface.

Subcommands cover the full workflow: graph build stats, baseline simulation,
what-if scenarios, parameter sweeps, synthetic trace generation, Chrome-trace
export, and the HTTP service.  Human output prints times in microseconds;
--json emits machine-readable documents with nanosecond integers.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .api import Analysis
from .breakdown import compute_breakdown
from .chrome import export_chrome_trace
from .errors import KernsimError
from .graph import EdgeKind
from .report import (
    render_breakdown_csv,
    render_breakdown_figure,
    render_sweep_csv,
    render_sweep_figure,
)
from .scenarios import registry
from .synthetic import generate_synthetic_trace
from .trace import dump_trace
from .transform import TransformPipeline


def _emit_json(obj: object) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _us(ns: int) -> str:
    return f"{ns / 1000:.3f} us"


def _parse_params(params: tuple[str, ...]) -> dict:
    out: dict = {}
    for item in params:
        if "=" not in item:
            raise click.UsageError(f"--param expects k=v, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _load_analysis(trace_path: str, strict: bool) -> Analysis:
    text = Path(trace_path).read_text()
    return Analysis.from_text(text, strict=strict)


def _scenario_from_options(scenario: str | None, scenario_file: str | None,
                           params: tuple[str, ...]) -> tuple[str, dict]:
    if scenario_file is not None:
        spec = json.loads(Path(scenario_file).read_text())
        name = spec.get("scenario")
        merged = dict(spec.get("params") or {})
        merged.update(_parse_params(params))
        return name, merged
    if scenario is None:
        raise click.UsageError("provide a scenario name or --scenario FILE")
    return scenario, _parse_params(params)


class _Cli(click.Group):
    """Group that maps domain errors to a structured nonzero exit."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except KernsimError as exc:
            click.echo(f"error: {exc.name}: {exc}", err=True)
            sys.exit(2)


@click.group(cls=_Cli)
def main() -> None:
    """Trace-driven what-if simulator for DNN training workloads."""


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--strict", is_flag=True, help="Fail on orphan GPU kernels.")
@click.option("--json", "as_json", is_flag=True, help="Emit the graph document.")
def build(trace_path: str, strict: bool, as_json: bool) -> None:
    """Build the dependency graph and report its statistics."""
    analysis = _load_analysis(trace_path, strict)
    graph = analysis.graph
    edge_counts = {kind.value: 0 for kind in EdgeKind}
    for _, _, kind in graph.edges:
        edge_counts[kind.value] += 1
    stats = {"tasks": len(graph.tasks),
             "edges": {k: v for k, v in sorted(edge_counts.items())}}
    if as_json:
        _emit_json({"graph": graph.to_object(), "stats": stats})
        return
    click.echo(f"tasks: {stats['tasks']}")
    for kind, count in stats["edges"].items():
        click.echo(f"edges[{kind}]: {count}")


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--strict", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def simulate(trace_path: str, strict: bool, as_json: bool) -> None:
    """Simulate the unmodified trace and report makespan plus breakdown."""
    analysis = _load_analysis(trace_path, strict)
    report = analysis.breakdown()
    if as_json:
        _emit_json({"makespan_ns": analysis.baseline.makespan,
                    "breakdown": report.to_object()})
        return
    obj = report.to_object()
    click.echo(f"makespan: {_us(analysis.baseline.makespan)}")
    for component in ("cpu_only", "gpu_only", "parallel", "idle"):
        click.echo(f"{component}: {_us(obj[f'{component}_ns'])}")


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenario", required=False)
@click.option("--scenario", "scenario_file", type=click.Path(exists=True),
              help="Scenario spec file {scenario, params}.")
@click.option("--param", "params", multiple=True, help="k=v, repeatable.")
@click.option("--strict", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(), default=None,
              help="Prefix for breakdown CSV and figure output.")
def whatif(trace_path: str, scenario: str | None, scenario_file: str | None,
           params: tuple[str, ...], strict: bool, as_json: bool,
           out: str | None) -> None:
    """Apply a named scenario and report the predicted change."""
    name, merged = _scenario_from_options(scenario, scenario_file, params)
    analysis = _load_analysis(trace_path, strict)
    result = analysis.whatif(name, merged)
    if out is not None:
        reports = {
            "baseline": result["baseline_breakdown"],
            "predicted": result["predicted_breakdown"],
        }
        Path(f"{out}.csv").write_text(render_breakdown_csv(reports))
        render_breakdown_figure(reports, f"{out}.png")
    if as_json:
        _emit_json(result)
        return
    click.echo(f"scenario: {result['scenario']}")
    click.echo(f"baseline makespan: {_us(result['baseline_makespan_ns'])}")
    click.echo(f"predicted makespan: {_us(result['predicted_makespan_ns'])}")
    click.echo(f"speedup: {result['speedup']:.4f}")
    base = result["baseline_breakdown"]
    pred = result["predicted_breakdown"]
    for component in ("cpu_only", "gpu_only", "parallel", "idle"):
        b, p = base[f"{component}_ns"], pred[f"{component}_ns"]
        click.echo(f"{component}: {_us(b)} -> {_us(p)} "
                   f"(delta {(p - b) / 1000:+.3f} us)")


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenario")
@click.argument("param_name")
@click.argument("values", nargs=-1, required=True)
@click.option("--param", "params", multiple=True,
              help="Fixed scenario parameters, k=v.")
@click.option("--strict", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--out", type=click.Path(), default=None,
              help="Prefix for sweep CSV and figure output.")
def sweep(trace_path: str, scenario: str, param_name: str,
          values: tuple[str, ...], params: tuple[str, ...], strict: bool,
          as_json: bool, out: str | None) -> None:
    """Evaluate a scenario across parameter values; table of makespans."""
    fixed = _parse_params(params)
    analysis = _load_analysis(trace_path, strict)
    points: list[tuple[object, int]] = []
    for raw in values:
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        merged = dict(fixed)
        merged[param_name] = value
        result = analysis.whatif(scenario, merged)
        points.append((value, result["predicted_makespan_ns"]))
    if out is not None:
        Path(f"{out}.csv").write_text(render_sweep_csv(param_name, points))
        render_sweep_figure(param_name, points, f"{out}.png")
    if as_json:
        _emit_json({"param": param_name,
                    "points": [{"value": v, "makespan_ns": m}
                               for v, m in points]})
        return
    click.echo(f"{param_name}\tmakespan")
    for value, makespan in points:
        click.echo(f"{value}\t{_us(makespan)}")


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Trace file to write (defaults to stdout).")
@click.option("--json", "as_json", is_flag=True)
def gen(spec_path: str, seed: int, out: str | None, as_json: bool) -> None:
    """Generate a synthetic trace and print its expected makespan."""
    spec = json.loads(Path(spec_path).read_text())
    doc, expected = generate_synthetic_trace(spec, seed)
    text = dump_trace(doc)
    if out is not None:
        Path(out).write_text(text)
    if as_json:
        payload = {"expected_makespan_ns": expected, "events": len(doc.events)}
        if out is None:
            payload["trace"] = json.loads(text)
        _emit_json(payload)
        return
    if out is None:
        click.echo(text)
    click.echo(f"expected makespan: {_us(expected)}", err=out is None)


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenario", required=False)
@click.option("--param", "params", multiple=True)
@click.option("--strict", is_flag=True)
@click.option("--out", type=click.Path(), required=True,
              help="Chrome-trace JSON file to write.")
def export(trace_path: str, scenario: str | None, params: tuple[str, ...],
           strict: bool, out: str) -> None:
    """Export the simulated schedule as a Chrome-trace timeline."""
    analysis = _load_analysis(trace_path, strict)
    if scenario is None:
        graph, result = analysis.graph, analysis.baseline
    else:
        pipeline = analysis.pipeline_for(scenario, _parse_params(params))
        graph, result = analysis.run_pipeline(pipeline)
    document = export_chrome_trace(result, graph)
    Path(out).write_text(json.dumps(document, indent=2, sort_keys=True))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--capacity", type=int, default=16, show_default=True,
              help="Maximum cached sessions.")
def serve(port: int, host: str, capacity: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(capacity=capacity), host=host, port=port)


@main.command()
@click.option("--json", "as_json", is_flag=True)
def scenarios(as_json: bool) -> None:
    """List available what-if scenarios and their parameters."""
    entries = registry()
    if as_json:
        _emit_json(entries)
        return
    for info in entries:
        click.echo(f"{info['name']}: {info['description']}")
        for pname, pinfo in info.get("params", {}).items():
            click.echo(f"  {pname}: {pinfo}")


if __name__ == "__main__":
    main()
