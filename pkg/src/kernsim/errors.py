"""Exception hierarchy shared by all kernsim modules.

Every error carries a stable ``name`` used by the CLI (exit messages) and the
HTTP service (JSON error bodies), so callers can match on it without parsing
human-readable text.
"""

from __future__ import annotations


class KernsimError(Exception):
    """Base class; ``name`` is the stable machine-readable identifier."""

    name = "KernsimError"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"{self.name}: {self.message}" if self.message else self.name


# --- trace parsing / generation ---

class MalformedDocument(KernsimError):
    name = "MalformedDocument"


class SchemaViolation(KernsimError):
    name = "SchemaViolation"


class OverlapViolation(KernsimError):
    name = "OverlapViolation"

    def __init__(self, message: str, first_id: int, second_id: int):
        super().__init__(message)
        self.first_id = first_id
        self.second_id = second_id


class InvalidSpec(KernsimError):
    name = "InvalidSpec"


class MismatchedInput(KernsimError):
    name = "MismatchedInput"


# --- graph construction ---

class OrphanKernel(KernsimError):
    name = "OrphanKernel"


class CycleDetected(KernsimError):
    name = "CycleDetected"

    def __init__(self, message: str, cycle: list[int] | None = None):
        super().__init__(message)
        self.cycle = cycle or []


# --- layer mapping ---

class AmbiguousMarker(KernsimError):
    name = "AmbiguousMarker"


# --- communication model ---

class InvalidGroup(KernsimError):
    name = "InvalidGroup"


class MissingLayer(KernsimError):
    name = "MissingLayer"


class NoWeightUpdate(KernsimError):
    name = "NoWeightUpdate"


# --- simulation ---

class Deadlock(KernsimError):
    name = "Deadlock"


class ZeroBaseline(KernsimError):
    name = "ZeroBaseline"


# --- transformations ---

class WouldCreateCycle(KernsimError):
    name = "WouldCreateCycle"


class UnknownAnchor(KernsimError):
    name = "UnknownAnchor"


class UnknownTask(KernsimError):
    name = "UnknownTask"


class AcyclicityViolated(KernsimError):
    name = "AcyclicityViolated"


class BadSelector(KernsimError):
    name = "BadSelector"


class BadPipeline(KernsimError):
    name = "BadPipeline"


# --- scenarios ---

class BadFactorization(KernsimError):
    name = "BadFactorization"


class MissingLayerGradients(KernsimError):
    name = "MissingLayerGradients"


class MissingConvPairs(KernsimError):
    name = "MissingConvPairs"


class BadRatio(KernsimError):
    name = "BadRatio"


class UnknownScenario(KernsimError):
    name = "UnknownScenario"
