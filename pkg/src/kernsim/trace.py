"""Trace document model: schema, validation, parsing and serialization.

A trace is a single JSON document declaring times in microseconds; internally
every timestamp and duration is stored as integer nanoseconds (half-up
rounding) so that downstream simulation is free of floating-point
nondeterminism.  Unknown fields in the document are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from enum import Enum
from typing import Any, Iterable

from .errors import MalformedDocument, OverlapViolation, SchemaViolation

SCHEMA_VERSION = 1
TIME_UNIT = "microseconds"


class TaskKind(str, Enum):
    CPU_API = "CpuApi"
    CPU_OTHER = "CpuOther"
    GPU_KERNEL = "GpuKernel"
    GPU_MEMCPY = "GpuMemcpy"
    DATA_LOAD = "DataLoad"
    COMM = "Comm"
    SYNC = "Sync"


# Kinds that execute on a CPU thread (data loading is treated as CPU work).
CPU_KINDS = frozenset({TaskKind.CPU_API, TaskKind.CPU_OTHER, TaskKind.DATA_LOAD, TaskKind.SYNC})
GPU_KINDS = frozenset({TaskKind.GPU_KERNEL, TaskKind.GPU_MEMCPY})


class LaneClass(str, Enum):
    CPU_THREAD = "CpuThread"
    GPU_STREAM = "GpuStream"
    COMM_CHANNEL = "CommChannel"


_LANE_PREFIX = {
    "cpu": LaneClass.CPU_THREAD,
    "gpu": LaneClass.GPU_STREAM,
    "comm": LaneClass.COMM_CHANNEL,
}
_PREFIX_OF_CLASS = {v: k for k, v in _LANE_PREFIX.items()}


@dataclass(frozen=True, order=True)
class LaneId:
    """Serializing execution resource: a CPU thread, GPU stream or comm channel.

    The canonical string form is ``<prefix>:<key>`` with prefix in
    {cpu, gpu, comm}; parsing then printing is the identity.
    """

    lane_class: LaneClass
    key: str

    @staticmethod
    def parse(text: str) -> "LaneId":
        prefix, sep, key = text.partition(":")
        if not sep or prefix not in _LANE_PREFIX or not key:
            raise SchemaViolation(f"invalid lane id {text!r}")
        return LaneId(_LANE_PREFIX[prefix], key)

    def __str__(self) -> str:
        return f"{_PREFIX_OF_CLASS[self.lane_class]}:{self.key}"

    @property
    def is_cpu(self) -> bool:
        return self.lane_class is LaneClass.CPU_THREAD

    @property
    def is_gpu(self) -> bool:
        return self.lane_class is LaneClass.GPU_STREAM

    @property
    def is_comm(self) -> bool:
        return self.lane_class is LaneClass.COMM_CHANNEL


class Phase(str, Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"
    WEIGHT_UPDATE = "WeightUpdate"


def us_to_ns(value: Any) -> int:
    """Convert a microsecond JSON number to integer nanoseconds, half-up."""
    try:
        dec = Decimal(str(value))
    except Exception as exc:
        raise SchemaViolation(f"bad time value {value!r}") from exc
    return int((dec * 1000).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def ns_to_us_number(ns: int) -> int | float:
    """Inverse of :func:`us_to_ns` for serialization (int when exact)."""
    if ns % 1000 == 0:
        return ns // 1000
    return float(Decimal(ns) / 1000)


@dataclass(frozen=True)
class TraceEvent:
    id: int
    kind: TaskKind
    name: str
    lane: LaneId
    start: int          # ns
    duration: int       # ns
    correlation: int | None = None
    size_bytes: int | None = None
    sync_target: LaneId | None = None  # for Sync events; None = device-wide

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True)
class LayerMarker:
    layer: str
    phase: Phase
    cpu_lane: LaneId
    start: int  # ns
    end: int    # ns


@dataclass(frozen=True)
class GradientBucketMap:
    bucket_of_layer: dict[str, int]
    bucket_size_bytes: dict[int, int]

    def layers_of_bucket(self, bucket: int) -> list[str]:
        return sorted(l for l, b in self.bucket_of_layer.items() if b == bucket)

    def buckets(self) -> list[int]:
        return sorted(self.bucket_size_bytes)


@dataclass(frozen=True)
class TraceDocument:
    events: tuple[TraceEvent, ...]
    layer_markers: tuple[LayerMarker, ...] = ()
    gradient_buckets: GradientBucketMap | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def event_by_id(self, event_id: int) -> TraceEvent:
        return {e.id: e for e in self.events}[event_id]


def _require(obj: dict, key: str, context: str) -> Any:
    if key not in obj:
        raise SchemaViolation(f"{context}: missing field {key!r}")
    return obj[key]


def _parse_event(obj: Any, index: int) -> TraceEvent:
    ctx = f"events[{index}]"
    if not isinstance(obj, dict):
        raise SchemaViolation(f"{ctx}: not an object")
    try:
        kind = TaskKind(_require(obj, "kind", ctx))
    except ValueError:
        raise SchemaViolation(f"{ctx}: unknown kind {obj.get('kind')!r}")
    event_id = _require(obj, "id", ctx)
    if not isinstance(event_id, int) or event_id < 0:
        raise SchemaViolation(f"{ctx}: id must be a non-negative integer")
    lane = LaneId.parse(_require(obj, "lane", ctx))
    start = us_to_ns(_require(obj, "start", ctx))
    duration = us_to_ns(_require(obj, "duration", ctx))
    if start < 0 or duration < 0:
        raise SchemaViolation(f"{ctx}: negative start or duration")
    correlation = obj.get("correlation")
    if correlation is not None and (not isinstance(correlation, int) or correlation < 0):
        raise SchemaViolation(f"{ctx}: correlation must be a non-negative integer")
    size_bytes = obj.get("size_bytes")
    if size_bytes is not None and (not isinstance(size_bytes, int) or size_bytes < 0):
        raise SchemaViolation(f"{ctx}: size_bytes must be a non-negative integer")
    sync_target = obj.get("sync_target")
    if sync_target is not None:
        sync_target = LaneId.parse(sync_target)

    if kind in GPU_KINDS and correlation is None:
        raise SchemaViolation(f"{ctx}: {kind.value} events require a correlation id")
    if kind in GPU_KINDS and not lane.is_gpu:
        raise SchemaViolation(f"{ctx}: {kind.value} events must be on a gpu lane")
    if kind in CPU_KINDS and not lane.is_cpu:
        raise SchemaViolation(f"{ctx}: {kind.value} events must be on a cpu lane")
    if kind is TaskKind.COMM and not lane.is_comm:
        raise SchemaViolation(f"{ctx}: Comm events must be on a comm lane")
    if sync_target is not None and kind is not TaskKind.SYNC:
        raise SchemaViolation(f"{ctx}: sync_target only allowed on Sync events")

    return TraceEvent(
        id=event_id,
        kind=kind,
        name=str(_require(obj, "name", ctx)),
        lane=lane,
        start=start,
        duration=duration,
        correlation=correlation,
        size_bytes=size_bytes,
        sync_target=sync_target,
    )


def _parse_marker(obj: Any, index: int) -> LayerMarker:
    ctx = f"layer_markers[{index}]"
    if not isinstance(obj, dict):
        raise SchemaViolation(f"{ctx}: not an object")
    try:
        phase = Phase(_require(obj, "phase", ctx))
    except ValueError:
        raise SchemaViolation(f"{ctx}: unknown phase {obj.get('phase')!r}")
    lane = LaneId.parse(_require(obj, "cpu_lane", ctx))
    if not lane.is_cpu:
        raise SchemaViolation(f"{ctx}: cpu_lane must be a cpu lane")
    start = us_to_ns(_require(obj, "start", ctx))
    end = us_to_ns(_require(obj, "end", ctx))
    if start >= end:
        raise SchemaViolation(f"{ctx}: start must be < end")
    return LayerMarker(
        layer=str(_require(obj, "layer", ctx)),
        phase=phase,
        cpu_lane=lane,
        start=start,
        end=end,
    )


def _parse_buckets(obj: Any) -> GradientBucketMap:
    if not isinstance(obj, dict):
        raise SchemaViolation("gradient_buckets: not an object")
    bucket_of_layer = _require(obj, "bucket_of_layer", "gradient_buckets")
    raw_sizes = _require(obj, "bucket_size_bytes", "gradient_buckets")
    sizes: dict[int, int] = {}
    for k, v in raw_sizes.items():
        if not isinstance(v, int) or v <= 0:
            raise SchemaViolation(f"gradient_buckets: bucket {k} size must be > 0")
        sizes[int(k)] = v
    for layer, bucket in bucket_of_layer.items():
        if bucket not in sizes:
            raise SchemaViolation(
                f"gradient_buckets: layer {layer!r} references unknown bucket {bucket}"
            )
    return GradientBucketMap(bucket_of_layer=dict(bucket_of_layer), bucket_size_bytes=sizes)


def check_lane_overlaps(events: Iterable[TraceEvent]) -> None:
    by_lane: dict[LaneId, list[TraceEvent]] = {}
    for e in events:
        by_lane.setdefault(e.lane, []).append(e)
    for lane, lane_events in by_lane.items():
        lane_events.sort(key=lambda e: (e.start, e.end, e.id))
        for a, b in zip(lane_events, lane_events[1:]):
            if a.end > b.start:
                raise OverlapViolation(
                    f"events {a.id} and {b.id} overlap on lane {lane}", a.id, b.id
                )


def check_marker_overlaps(markers: Iterable[LayerMarker]) -> None:
    grouped: dict[tuple[str, Phase, LaneId], list[LayerMarker]] = {}
    for m in markers:
        grouped.setdefault((m.layer, m.phase, m.cpu_lane), []).append(m)
    for (layer, phase, _lane), group in grouped.items():
        group.sort(key=lambda m: m.start)
        for a, b in zip(group, group[1:]):
            if a.end > b.start:
                raise SchemaViolation(
                    f"overlapping markers for ({layer}, {phase.value})"
                )


def parse_trace(document_text: str) -> TraceDocument:
    """Parse and validate a trace document; times are stored as integer ns."""
    try:
        root = json.loads(document_text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    if not isinstance(root, dict):
        raise MalformedDocument("top-level value must be an object")

    version = _require(root, "schema_version", "document")
    if version != SCHEMA_VERSION:
        raise SchemaViolation(f"unsupported schema_version {version!r}")
    unit = _require(root, "time_unit", "document")
    if unit != TIME_UNIT:
        raise SchemaViolation(f"unsupported time_unit {unit!r}")

    raw_events = root.get("events", [])
    if not isinstance(raw_events, list):
        raise SchemaViolation("events must be an array")
    events = tuple(_parse_event(obj, i) for i, obj in enumerate(raw_events))

    seen: set[int] = set()
    for e in events:
        if e.id in seen:
            raise SchemaViolation(f"duplicate event id {e.id}")
        seen.add(e.id)
    check_lane_overlaps(events)

    raw_markers = root.get("layer_markers", [])
    if not isinstance(raw_markers, list):
        raise SchemaViolation("layer_markers must be an array")
    markers = tuple(_parse_marker(obj, i) for i, obj in enumerate(raw_markers))
    check_marker_overlaps(markers)

    buckets = None
    if root.get("gradient_buckets") is not None:
        buckets = _parse_buckets(root["gradient_buckets"])

    metadata = root.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaViolation("metadata must be an object")

    return TraceDocument(
        events=events,
        layer_markers=markers,
        gradient_buckets=buckets,
        metadata={str(k): str(v) for k, v in metadata.items()},
    )


def event_to_object(e: TraceEvent) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": e.id,
        "kind": e.kind.value,
        "name": e.name,
        "lane": str(e.lane),
        "start": ns_to_us_number(e.start),
        "duration": ns_to_us_number(e.duration),
    }
    if e.correlation is not None:
        obj["correlation"] = e.correlation
    if e.size_bytes is not None:
        obj["size_bytes"] = e.size_bytes
    if e.sync_target is not None:
        obj["sync_target"] = str(e.sync_target)
    return obj


def document_to_object(doc: TraceDocument) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "time_unit": TIME_UNIT,
        "events": [event_to_object(e) for e in doc.events],
        "layer_markers": [
            {
                "layer": m.layer,
                "phase": m.phase.value,
                "cpu_lane": str(m.cpu_lane),
                "start": ns_to_us_number(m.start),
                "end": ns_to_us_number(m.end),
            }
            for m in doc.layer_markers
        ],
    }
    if doc.gradient_buckets is not None:
        obj["gradient_buckets"] = {
            "bucket_of_layer": dict(doc.gradient_buckets.bucket_of_layer),
            "bucket_size_bytes": {
                str(k): v for k, v in doc.gradient_buckets.bucket_size_bytes.items()
            },
        }
    if doc.metadata:
        obj["metadata"] = dict(doc.metadata)
    return obj


def dump_trace(doc: TraceDocument) -> str:
    """Serialize a document so that ``parse_trace(dump_trace(doc)) == doc``."""
    return json.dumps(document_to_object(doc), indent=2)
