"""Per-frame tracking loop: predict motion, predict appearance, associate, update."""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kalman, tgcn
from .association import CHI2_GATE_4DOF, associate, check_weights
from .core import BoundingBox, Detection, DimensionMismatch, OutOfOrderFrame


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DELETED = "deleted"


@dataclass(frozen=True)
class TrackerConfig:
    lambda1: float = 0.3
    lambda2: float = 0.2
    gate_threshold: float = CHI2_GATE_4DOF
    cost_ceiling: float = 1.0
    n_init: int = 3
    max_age: int = 30
    window_c: int = 8
    detection_min_confidence: float = 0.5
    noise: kalman.NoiseConfig = field(default_factory=kalman.NoiseConfig)

    def __post_init__(self):
        check_weights(self.lambda1, self.lambda2)
        if self.n_init < 1 or self.max_age < 1 or self.window_c < 1:
            raise ValueError("n_init, max_age and window_c must be at least 1")


@dataclass
class Track:
    id: int
    kalman: kalman.KalmanState
    window: deque
    status: TrackStatus = TrackStatus.TENTATIVE
    hits: int = 1
    time_since_update: int = 0

    def feature_window(self, c: int) -> np.ndarray:
        """Stored features as a (c, d) window, left-padded with the oldest one."""
        rows = list(self.window)
        rows = [rows[0]] * (c - len(rows)) + rows
        return np.stack(rows)

    def predicted_feature(self, model: Optional[tgcn.TgcnModel]) -> np.ndarray:
        if model is None or len(self.window) == 1:
            return self.window[-1]
        return tgcn.predict_feature(model, self.feature_window(model.window_c))


@dataclass(frozen=True)
class TrackSnapshot:
    id: int
    bbox: BoundingBox
    status: TrackStatus


class Tracker:
    """Tracker state for a single sequence."""

    def __init__(self, model: Optional[tgcn.TgcnModel] = None, cfg: TrackerConfig = TrackerConfig()):
        if model is not None and model.window_c != cfg.window_c:
            raise DimensionMismatch(
                f"model window C={model.window_c} differs from configured window_c={cfg.window_c}")
        self.model = model
        self.cfg = cfg
        self.tracks: List[Track] = []
        self.last_frame = 0
        self._next_id = 1

    def _spawn(self, det: Detection) -> None:
        t = Track(self._next_id, kalman.initiate(det, self.cfg.noise),
                  deque([det.feature], maxlen=self.cfg.window_c))
        if t.hits >= self.cfg.n_init:
            t.status = TrackStatus.CONFIRMED
        self._next_id += 1
        self.tracks.append(t)

    def step(self, frame: int, detections: Sequence[Detection]) -> List[TrackSnapshot]:
        if frame <= self.last_frame:
            raise OutOfOrderFrame(f"frame {frame} does not follow frame {self.last_frame}")
        self.last_frame = frame
        cfg = self.cfg
        dets = [d for d in detections if d.confidence >= cfg.detection_min_confidence]
        for d in dets:
            if d.feature is None:
                raise ValueError(f"detection in frame {frame} has no appearance feature")
            if self.model is not None and d.feature.shape[0] != self.model.feature_dim:
                raise DimensionMismatch(
                    f"feature dimension {d.feature.shape[0]} differs from model d={self.model.feature_dim}")

        for t in self.tracks:
            t.kalman = kalman.predict(t.kalman, cfg.noise)
            t.time_since_update += 1

        candidates = [(t.kalman, t.predicted_feature(self.model)) for t in self.tracks]
        res = associate(candidates, dets, cfg.lambda1, cfg.lambda2,
                        cfg.gate_threshold, cfg.cost_ceiling, cfg.noise)

        for ti, di in res.matches:
            t, d = self.tracks[ti], dets[di]
            t.kalman = kalman.update(t.kalman, d.bbox, cfg.noise)
            t.window.append(d.feature)
            t.hits += 1
            t.time_since_update = 0
            if t.status is TrackStatus.TENTATIVE and t.hits >= cfg.n_init:
                t.status = TrackStatus.CONFIRMED
        for ti in res.unmatched_tracks:
            t = self.tracks[ti]
            t.hits = 0
            if t.status is TrackStatus.TENTATIVE or t.time_since_update > cfg.max_age:
                t.status = TrackStatus.DELETED
        self.tracks = [t for t in self.tracks if t.status is not TrackStatus.DELETED]
        for di in res.unmatched_detections:
            self._spawn(dets[di])

        return [TrackSnapshot(t.id, t.kalman.to_bbox(), t.status)
                for t in self.tracks if t.status is TrackStatus.CONFIRMED]


def run_sequence(
    detections_by_frame: Dict[int, Sequence[Detection]],
    model: Optional[tgcn.TgcnModel] = None,
    cfg: TrackerConfig = TrackerConfig(),
) -> List[Tuple[int, int, BoundingBox]]:
    """Track a whole sequence; one output row per confirmed track per frame.

    Frames missing from the mapping are stepped with no detections so that
    motion prediction keeps its one-frame time step.
    """
    keys = list(detections_by_frame)
    for a, b in zip(keys, keys[1:]):
        if b <= a:
            raise OutOfOrderFrame(f"frame {b} does not follow frame {a}")
    tracker = Tracker(model, cfg)
    rows = []
    if not keys:
        return rows
    for frame in range(keys[0], keys[-1] + 1):
        for snap in tracker.step(frame, detections_by_frame.get(frame, ())):
            rows.append((frame, snap.id, snap.bbox))
    return rows
