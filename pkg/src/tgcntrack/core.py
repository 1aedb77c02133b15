"""Shared domain types, geometry helpers and the exception hierarchy."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels_py import overlap


class TrackingError(Exception):
    """Base class for every error raised by tgcntrack."""


class DimensionMismatch(TrackingError, ValueError):
    pass


class ParseError(TrackingError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IngestError(TrackingError, ValueError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        keys = ", ".join(f"({f},{i})" for f, i in self.missing[:20])
        more = "" if len(self.missing) <= 20 else f" ... ({len(self.missing)} total)"
        super().__init__(f"detections without embedding rows: {keys}{more}")


class NonInvertibleInnovation(TrackingError, np.linalg.LinAlgError):
    pass


class NonInvertibleCovariance(TrackingError, np.linalg.LinAlgError):
    pass


class InvalidWeights(TrackingError, ValueError):
    pass


class EmptyDataset(TrackingError, ValueError):
    pass


class OutOfOrderFrame(TrackingError, ValueError):
    pass


class EmptyGroundTruth(TrackingError, ValueError):
    pass


class WindowTooLong(TrackingError, ValueError):
    pass


class InvalidSpec(TrackingError, ValueError):
    pass


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in MOT convention: top-left corner plus size, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"bounding box {name} is not finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"bounding box size must be positive, got w={self.w} h={self.h}")

    @classmethod
    def from_center(cls, cx, cy, w, h) -> "BoundingBox":
        return cls(float(cx - w / 2.0), float(cy - h / 2.0), float(w), float(h))

    def to_cxcywh(self) -> np.ndarray:
        # center form used by the Kalman filter: (cx, cy, w, h)
        cx, cy = center(self)
        return np.array([cx, cy, self.w, self.h], dtype=float)

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Velocity:
    vx: float
    vy: float

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise ValueError("velocity components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy], dtype=float)


def as_feature(values, dim: Optional[int] = None) -> np.ndarray:
    """Validate an appearance feature and return it as a read-only float vector."""
    arr = np.array(values, dtype=float).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"feature has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Detection:
    frame: int
    bbox: BoundingBox
    confidence: float = 1.0
    feature: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.frame < 1:
            raise ValueError(f"frame index must be positive, got {self.frame}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")

    def with_feature(self, feature) -> "Detection":
        return Detection(self.frame, self.bbox, self.confidence, as_feature(feature))


def center(b: BoundingBox):
    return (b.x + b.w / 2.0, b.y + b.h / 2.0)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when they do not overlap."""
    iw = overlap(a.x, a.w, b.x, b.w)
    ih = overlap(a.y, a.h, b.y, b.h)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return min(1.0, max(0.0, inter / union))
