"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class RankDeficiencyError(ValueError):
    """Raised when a family of operators is linearly dependent."""


class ReconstructionError(ValueError):
    """Raised when coordinates do not determine a trace-one operator."""

    def __init__(self, message: str, *, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class ZeroVolumeError(ValueError):
    """Raised when a parcel has zero volume and infinite information."""


class PhysicalityError(ValueError):
    """Raised when a construction escapes the physical state space margin."""


class VanishingProbabilityError(ValueError):
    """Raised when a measurement outcome has (numerically) zero probability."""


class EmptyIntersectionError(ValueError):
    """Raised when an operation requires a non-empty parcel."""


class DisjointnessError(RuntimeError):
    """Raised when a double-parcel update cannot be certified disjoint.

    Carries a witness point lying in (or within LP tolerance of) both updated
    sets. This is the expected outcome for insufficiently sharp measurements
    and for the necessity counterexamples.
    """

    def __init__(self, message: str, *, witness: np.ndarray | None = None, report=None):
        super().__init__(message)
        self.witness = witness
        self.report = report


class ConditionError(ValueError):
    """Raised when a double-parcel update is attempted with failing conditions."""


class SchemaError(ValueError):
    """Raised on malformed scenario configuration input."""

    def __init__(self, message: str, *, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
