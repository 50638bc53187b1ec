"""Communication cost model and distributed-training graph augmentation.

Collective durations follow the standard ring model: an allReduce of S bytes
across n workers moves 2(n-1)/n * 8S bits over the network.  All arithmetic
is exact (fractions), rounded half-up to integer nanoseconds only at the
edge, so bandwidth sweeps scale exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidGroup, MissingLayer, NoWeightUpdate
from .graph import DependencyGraph, EdgeKind, Task, lane_seq_kind
from .trace import GPU_KINDS, GradientBucketMap, LaneId, Phase, TaskKind

NS_PER_SEC = 1_000_000_000

COLLECTIVE_LANE = LaneId.parse("comm:collective")


@dataclass(frozen=True)
class NetworkConfig:
    n_workers: int
    bandwidth_bits_per_sec: int
    latency_ns: int = 0
    channels: int = 1
    contention_factor: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")
        if self.bandwidth_bits_per_sec <= 0:
            raise ValueError("bandwidth must be positive")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")

    @staticmethod
    def from_object(obj: dict) -> "NetworkConfig":
        return NetworkConfig(
            n_workers=int(obj.get("workers", 1)),
            bandwidth_bits_per_sec=int(
                Fraction(str(obj.get("bandwidth_gbps", 10))) * NS_PER_SEC
            ),
            latency_ns=int(Fraction(str(obj.get("latency_us", 0))) * 1000),
            channels=int(obj.get("channels", 1)),
            contention_factor=Fraction(str(obj.get("contention_factor", 1))),
        )


def _round_ns(value: Fraction) -> int:
    # half-up on the nanosecond
    return int((value * 2 + 1) // 2) if value >= 0 else -int((-value * 2 + 1) // 2)


def _wire_time(size_bytes: int, cfg: NetworkConfig) -> Fraction:
    """Seconds-free transfer time (ns) of ``8 * size_bytes`` bits."""
    return (
        Fraction(8 * size_bytes, cfg.bandwidth_bits_per_sec)
        * NS_PER_SEC
        * cfg.contention_factor
    )


def allreduce_duration_exact(size_bytes: int, cfg: NetworkConfig) -> Fraction:
    if cfg.n_workers == 1:
        return Fraction(0)
    n = cfg.n_workers
    return cfg.latency_ns + Fraction(2 * (n - 1), n) * _wire_time(size_bytes, cfg)


def allreduce_duration(size_bytes: int, cfg: NetworkConfig) -> int:
    return _round_ns(allreduce_duration_exact(size_bytes, cfg))


def push_pull_duration_exact(size_bytes: int, cfg: NetworkConfig) -> Fraction:
    return cfg.latency_ns + _wire_time(size_bytes, cfg)


def push_pull_duration(size_bytes: int, cfg: NetworkConfig) -> int:
    return _round_ns(push_pull_duration_exact(size_bytes, cfg))


def reduce_scatter_duration_exact(
    size_bytes: int, group_size: int, cfg: NetworkConfig
) -> Fraction:
    if group_size < 2:
        raise InvalidGroup(f"group size must be >= 2, got {group_size}")
    return cfg.latency_ns + Fraction(group_size - 1, group_size) * _wire_time(size_bytes, cfg)


def reduce_scatter_duration(size_bytes: int, group_size: int, cfg: NetworkConfig) -> int:
    return _round_ns(reduce_scatter_duration_exact(size_bytes, group_size, cfg))


# An all-gather over p peers moves the same (p-1)/p fraction of the payload.
all_gather_duration_exact = reduce_scatter_duration_exact
all_gather_duration = reduce_scatter_duration


def last_backward_gpu_task(graph: DependencyGraph, layer: str) -> Task | None:
    candidates = [
        t for t in graph.tasks.values()
        if t.kind in GPU_KINDS
        and t.layer is not None
        and t.layer == (layer, Phase.BACKWARD)
    ]
    if not candidates:
        return None
    return max(candidates, key=lambda t: (t.trace_start or 0, t.id))


def earliest_weight_update_task(graph: DependencyGraph) -> Task | None:
    candidates = [
        t for t in graph.tasks.values()
        if t.layer is not None and t.layer[1] is Phase.WEIGHT_UPDATE
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda t: (t.trace_start or 0, t.id))


def insert_distributed(
    graph: DependencyGraph, buckets: GradientBucketMap, cfg: NetworkConfig
) -> DependencyGraph:
    """Add one allReduce per gradient bucket to a layer-mapped graph.

    Mutates and returns ``graph`` (callers pass a copy).  Each bucket's
    allReduce depends on the last backward GPU task of every member layer and
    gates the earliest weight-update task; the collective lane is serialized
    in bucket-index order.
    """
    if cfg.n_workers == 1:
        # A single worker has nothing to reduce; the graph is unchanged.
        return graph
    wu = earliest_weight_update_task(graph)
    if wu is None:
        raise NoWeightUpdate("no weight-update tasks in the graph")

    next_id = graph.next_id()
    prev_comm: int | None = None
    order = graph.lane_order.setdefault(COLLECTIVE_LANE, [])
    for bucket in buckets.buckets():
        layers = buckets.layers_of_bucket(bucket)
        if not layers:
            continue
        size = buckets.bucket_size_bytes[bucket]
        task = Task(
            id=next_id,
            kind=TaskKind.COMM,
            name=f"allreduce_bucket_{bucket}",
            lane=COLLECTIVE_LANE,
            duration=allreduce_duration(size, cfg),
            size_bytes=size,
        )
        graph.tasks[task.id] = task
        next_id += 1
        for layer in layers:
            src = last_backward_gpu_task(graph, layer)
            if src is None:
                raise MissingLayer(f"bucket {bucket}: layer {layer!r} has no backward GPU tasks")
            graph.edges.add((src.id, task.id, EdgeKind.INJECTED))
        graph.edges.add((task.id, wu.id, EdgeKind.INJECTED))
        if prev_comm is not None:
            graph.edges.add((prev_comm, task.id, lane_seq_kind(COLLECTIVE_LANE)))
        order.append(task.id)
        prev_comm = task.id
    return graph
