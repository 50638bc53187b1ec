"""Hand-built trace documents with analytically known behavior.

Each builder returns a plain document dict (the JSON schema), so the tests
exercise the full parse path.  All times in the builders are nanoseconds;
they are divided by 1000 when written into the microsecond-based documents.
"""

from __future__ import annotations

import json


def _us(ns: int) -> float | int:
    value = ns / 1000
    return int(value) if value == int(value) else value


class TraceBuilder:
    def __init__(self):
        self.events: list[dict] = []
        self.markers: list[dict] = []
        self.buckets: dict | None = None
        self._next_id = 0

    def event(self, kind: str, name: str, lane: str, start_ns: int,
              duration_ns: int, correlation: int | None = None,
              size_bytes: int | None = None,
              sync_target: str | None = None) -> int:
        obj = {
            "id": self._next_id,
            "kind": kind,
            "name": name,
            "lane": lane,
            "start": _us(start_ns),
            "duration": _us(duration_ns),
        }
        if correlation is not None:
            obj["correlation"] = correlation
        if size_bytes is not None:
            obj["size_bytes"] = size_bytes
        if sync_target is not None:
            obj["sync_target"] = sync_target
        self.events.append(obj)
        self._next_id += 1
        return obj["id"]

    def marker(self, layer: str, phase: str, cpu_lane: str,
               start_ns: int, end_ns: int) -> None:
        self.markers.append({
            "layer": layer,
            "phase": phase,
            "cpu_lane": cpu_lane,
            "start": _us(start_ns),
            "end": _us(end_ns),
        })

    def document(self) -> dict:
        doc = {
            "schema_version": 1,
            "time_unit": "microseconds",
            "events": self.events,
            "layer_markers": self.markers,
        }
        if self.buckets is not None:
            doc["gradient_buckets"] = self.buckets
        return doc

    def text(self) -> str:
        return json.dumps(self.document())


# Kernel durations (ns) chosen so that /3 and /2 exercise rounding.
GPU_BOUND_COMPUTE = [30_000, 21_013, 9_999]          # sgemm / scudnn names
GPU_BOUND_MEMORY = [10_000, 7_777]                   # everything else


def gpu_bound_trace() -> dict:
    """Serial GPU chain dominated by kernel time; CPU launches are 0 ns."""
    b = TraceBuilder()
    names = (
        [("sgemm_fwd", d) for d in GPU_BOUND_COMPUTE[:2]]
        + [("scudnn_conv", GPU_BOUND_COMPUTE[2])]
        + [("elementwise_relu", GPU_BOUND_MEMORY[0]),
           ("batchnorm_collect", GPU_BOUND_MEMORY[1])]
    )
    t = 0
    for i, (name, dur) in enumerate(names):
        b.event("CpuApi", "cudaLaunchKernel", "cpu:0", i, 0, correlation=i + 1)
        b.event("GpuKernel", name, "gpu:0:7", t, dur, correlation=i + 1)
        t += dur
    return b.document()


def cpu_bound_trace() -> dict:
    """100 us CPU chain fully hiding a 20 us GPU kernel."""
    b = TraceBuilder()
    b.event("CpuApi", "cudaLaunchKernel", "cpu:0", 0, 1_000, correlation=1)
    b.event("GpuKernel", "sgemm_hidden", "gpu:0:7", 1_000, 20_000, correlation=1)
    t = 1_000
    for i in range(9):
        b.event("CpuOther", f"python_dispatch_{i}", "cpu:0", t, 11_000)
        t += 11_000
    return b.document()


def fused_adam_trace(n_updates: int = 100, launch_ns: int = 5_000,
                     kernel_ns: int = 1_000, tail_ns: int = 200_000) -> dict:
    """Weight update dominated by launch overhead, plus a CPU tail task."""
    b = TraceBuilder()
    for i in range(n_updates):
        b.event("CpuApi", "cudaLaunchAdam", "cpu:0", i * launch_ns, launch_ns,
                correlation=i + 1)
        b.event("GpuKernel", f"adam_elementwise_{i}", "gpu:0:7",
                (i + 1) * launch_ns, kernel_ns, correlation=i + 1)
    b.event("CpuOther", "python_tail", "cpu:0", n_updates * launch_ns, tail_ns)
    b.marker("adam", "WeightUpdate", "cpu:0", 0, n_updates * launch_ns)
    return b.document()


def p3_trace() -> dict:
    """Two layers whose backward passes finish simultaneously.

    The output layer's gradient is large; running its push first lets its
    pull (on the receive lane) overlap the input layer's transfers, which a
    smallest-id tie-break does not discover.
    """
    b = TraceBuilder()
    us = 1000
    # CPU launches, 1 us each, back to back.
    b.event("CpuApi", "launch_fwd_conv1", "cpu:0", 0, us, correlation=1)
    b.event("CpuApi", "launch_fwd_fc2", "cpu:0", 1 * us, us, correlation=2)
    b.event("CpuApi", "launch_bwd_fc2", "cpu:0", 2 * us, us, correlation=3)
    b.event("CpuApi", "launch_bwd_conv1", "cpu:0", 3 * us, us, correlation=4)
    b.event("CpuApi", "launch_fwd2_conv1", "cpu:0", 4 * us, us, correlation=5)
    b.event("CpuApi", "launch_fwd2_fc2", "cpu:0", 5 * us, us, correlation=6)
    # GPU work: both backward kernels end at t = 13 us.
    b.event("GpuKernel", "fwd_conv1", "gpu:0:1", 1 * us, us, correlation=1)
    b.event("GpuKernel", "fwd_fc2", "gpu:0:1", 2 * us, us, correlation=2)
    b.event("GpuKernel", "bwd_fc2", "gpu:0:1", 3 * us, 10 * us, correlation=3)
    b.event("GpuKernel", "bwd_conv1", "gpu:0:2", 4 * us, 9 * us, correlation=4)
    # Next-iteration forward, queued behind the backward work.
    b.event("GpuKernel", "fwd2_conv1", "gpu:0:1", 13 * us, 2 * us, correlation=5)
    b.event("GpuKernel", "fwd2_fc2", "gpu:0:1", 15 * us, us, correlation=6)
    b.marker("conv1", "Forward", "cpu:0", 0, us)
    b.marker("fc2", "Forward", "cpu:0", 1 * us, 2 * us)
    b.marker("fc2", "Backward", "cpu:0", 2 * us, 3 * us)
    b.marker("conv1", "Backward", "cpu:0", 3 * us, 4 * us)
    b.marker("conv1", "Forward", "cpu:0", 4 * us, 5 * us)
    b.marker("fc2", "Forward", "cpu:0", 5 * us, 6 * us)
    return b.document()


# At 8 Gbps one byte takes exactly 1 ns, so these sizes are also durations.
P3_PARAMS = {
    "layer_gradient_bytes": {"conv1": 1_000, "fc2": 8_000},
    "bandwidth_gbps": 8,
    "workers": 2,
    "slice_size_bytes": 1 << 30,
    "n_servers": 2,
}


def distributed_trace(n_layers: int = 2) -> dict:
    """Forward/backward/weight-update chain with a gradient bucket per layer."""
    b = TraceBuilder()
    us = 1000
    t = 0
    corr = 1
    layers = [f"conv{i + 1}" for i in range(n_layers)]
    for phase, kernel_ns in (("Forward", 3 * us), ("Backward", 6 * us)):
        ordered = layers if phase == "Forward" else list(reversed(layers))
        for layer in ordered:
            b.event("CpuApi", f"launch_{phase.lower()}_{layer}", "cpu:0",
                    t, us, correlation=corr)
            b.marker(layer, phase, "cpu:0", t, t + us)
            t += us
            corr += 1
    b.event("CpuApi", "launch_optimizer_step", "cpu:0", t, us, correlation=corr)
    b.marker("optimizer", "WeightUpdate", "cpu:0", t, t + us)
    gpu_t = us
    for i in range(2 * n_layers):
        kernel_ns = 3 * us if i < n_layers else 6 * us
        b.event("GpuKernel", f"kernel_{i}", "gpu:0:1", gpu_t, kernel_ns,
                correlation=i + 1)
        gpu_t += kernel_ns
    b.event("GpuKernel", "optimizer_step", "gpu:0:1", gpu_t, 2 * us,
            correlation=corr)
    b.buckets = {
        "bucket_of_layer": {layer: i for i, layer in enumerate(layers)},
        "bucket_size_bytes": {str(i): 1_500_000 * (i + 1)
                              for i in range(n_layers)},
    }
    return b.document()


def allreduce_trace(size_bytes: int = 12_000_000) -> dict:
    """A compute chain followed by one explicit allReduce comm task."""
    b = TraceBuilder()
    us = 1000
    b.event("CpuApi", "cudaLaunchKernel", "cpu:0", 0, us, correlation=1)
    b.event("GpuKernel", "bwd_kernel", "gpu:0:1", us, 5 * us, correlation=1)
    b.event("Comm", "allreduce_0", "comm:collective", 6 * us, 9 * us,
            size_bytes=size_bytes)
    return b.document()


def layered_trace() -> dict:
    """relu / pool / conv / batchnorm layers for removal-style scenarios."""
    b = TraceBuilder()
    us = 1000
    layers = [("conv1", 4), ("batchnorm1", 2), ("relu1", 1), ("pool1", 1),
              ("conv2", 6)]
    t = 0
    corr = 1
    for layer, dur in layers:
        b.event("CpuApi", f"launch_{layer}", "cpu:0", t, us, correlation=corr)
        b.marker(layer, "Forward", "cpu:0", t, t + us)
        t += us
        corr += 1
    for layer, dur in reversed(layers):
        b.event("CpuApi", f"launch_bwd_{layer}", "cpu:0", t, us, correlation=corr)
        b.marker(layer, "Backward", "cpu:0", t, t + us)
        t += us
        corr += 1
    gpu_t = us
    for i, (layer, dur) in enumerate(list(layers) + list(reversed(layers))):
        gpu_t = max(gpu_t, (i + 1) * us)
        b.event("GpuKernel", f"{layer}_kernel_{i}", "gpu:0:1", gpu_t, dur * us,
                correlation=i + 1)
        gpu_t += dur * us
    return b.document()
