"""Seeded synthetic scenarios with known ground truth.

``crossing``
    Two look-alike pedestrians enter from opposite sides ``CROSS_LEAD``
    frames before the middle of the sequence and walk an X-shaped path,
    overlapping completely at frame ``frames // 2``. The short lead keeps
    their motion estimates immature when they meet, which is where position
    alone stops separating them.
``parallel``
    Two pedestrians with distinct appearance walking side by side.
``periodic_features``
    One pedestrian whose appearance alternates between two orthogonal unit
    vectors every frame, sliced into (window, next feature) training pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .core import BoundingBox, Detection, InvalidSpec, WindowTooLong, as_feature

KINDS = ("crossing", "parallel", "periodic_features")

BOX_W = 40.0
BOX_H = 100.0
CROSS_CENTER = (480.0, 300.0)
CROSS_SPEED = (3.0, 0.5)
CROSS_LEAD = 8


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str = "crossing"
    frames: int = 40
    seed: int = 0
    feature_dim: int = 16
    noise_std: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.frames < 2:
            raise InvalidSpec("a scenario needs at least 2 frames")
        if self.feature_dim < 2:
            raise InvalidSpec("feature_dim must be at least 2")
        if not self.noise_std >= 0:
            raise InvalidSpec("noise_std must be non-negative")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")


@dataclass
class Scenario:
    detections: Dict[int, List[Detection]]
    ground_truth: Dict[int, List[Tuple[int, BoundingBox, bool]]]
    centers: Dict[int, np.ndarray] = field(default_factory=dict)  # object id -> (frames, 2) exact centers

    @property
    def embeddings(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {(f, i): d.feature for f, ds in self.detections.items() for i, d in enumerate(ds)}


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _render(spec: ScenarioSpec, rng, centers: Dict[int, np.ndarray], features: Dict[int, np.ndarray],
            first_frame: int = 1) -> Scenario:
    dets: Dict[int, List[Detection]] = {}
    gt: Dict[int, list] = {}
    for k in range(first_frame - 1, spec.frames):
        frame = k + 1
        for oid in sorted(centers):
            cx, cy = centers[oid][k]
            true_box = BoundingBox.from_center(cx, cy, BOX_W, BOX_H)
            gt.setdefault(frame, []).append((oid, true_box, True))
            jitter = rng.normal(0.0, spec.noise_std, size=4) if spec.noise_std > 0 else np.zeros(4)
            box = BoundingBox(true_box.x + jitter[0], true_box.y + jitter[1],
                              BOX_W + jitter[2], BOX_H + jitter[3])
            dets.setdefault(frame, []).append(Detection(frame, box, 1.0, features[oid]))
    return Scenario(dets, gt, centers)


def crossing_frame(spec: ScenarioSpec) -> int:
    return spec.frames // 2


def crossing(spec: ScenarioSpec) -> Scenario:
    rng = np.random.default_rng(spec.seed)
    feat = as_feature(_unit(rng, spec.feature_dim))
    t = np.arange(1, spec.frames + 1, dtype=float) - crossing_frame(spec)
    x0, y0 = CROSS_CENTER
    vx, vy = CROSS_SPEED
    centers = {
        1: np.stack([x0 + vx * t, y0 + vy * t], axis=1),
        2: np.stack([x0 - vx * t, y0 + vy * t], axis=1),
    }
    first = max(1, crossing_frame(spec) - CROSS_LEAD)
    return _render(spec, rng, centers, {1: feat, 2: feat}, first)


def parallel(spec: ScenarioSpec) -> Scenario:
    rng = np.random.default_rng(spec.seed)
    feats = {1: as_feature(_unit(rng, spec.feature_dim)), 2: as_feature(_unit(rng, spec.feature_dim))}
    t = np.arange(spec.frames, dtype=float)
    centers = {
        1: np.stack([100.0 + 2.0 * t, 200.0 + 0.0 * t], axis=1),
        2: np.stack([100.0 + 2.0 * t, 400.0 + 0.0 * t], axis=1),
    }
    return _render(spec, rng, centers, feats)


def periodic_sequence(spec: ScenarioSpec) -> np.ndarray:
    """(frames, d) feature sequence alternating between two seeded coordinate axes."""
    rng = np.random.default_rng(spec.seed)
    i, j = rng.choice(spec.feature_dim, size=2, replace=False)
    a, b = np.eye(spec.feature_dim)[i], np.eye(spec.feature_dim)[j]
    return np.stack([a if k % 2 == 0 else b for k in range(spec.frames)])


def periodic_features(spec: ScenarioSpec, window_c: int = 4):
    """Sliding (window, next feature) pairs; ``frames - window_c`` of them."""
    if spec.frames < window_c + 1:
        raise WindowTooLong(f"{spec.frames} frames cannot fill a window of {window_c} plus a target")
    seq = periodic_sequence(spec)
    return [(seq[k:k + window_c], seq[k + window_c]) for k in range(spec.frames - window_c)]


def periodic_scenario(spec: ScenarioSpec) -> Scenario:
    """A static pedestrian carrying the periodic feature sequence, in file form."""
    seq = periodic_sequence(spec)
    rng = np.random.default_rng(spec.seed + 1)
    centers = {1: np.tile([320.0, 240.0], (spec.frames, 1))}
    sc = _render(spec, rng, centers, {1: seq[0]})
    for k, frame in enumerate(sorted(sc.detections)):
        sc.detections[frame] = [d.with_feature(seq[k]) for d in sc.detections[frame]]
    return sc


def generate(spec: ScenarioSpec) -> Scenario:
    return {"crossing": crossing, "parallel": parallel, "periodic_features": periodic_scenario}[spec.kind](spec)


def sequences_from_embeddings(emb: Dict[Tuple[int, int], np.ndarray]) -> List[np.ndarray]:
    """Group an embedding file by ``det_index`` into per-object sequences ordered by frame."""
    by_idx: Dict[int, list] = {}
    for (frame, idx) in sorted(emb):
        by_idx.setdefault(idx, []).append(emb[(frame, idx)])
    return [np.stack(v) for _, v in sorted(by_idx.items())]


def window_pairs(sequences, window_c: int):
    pairs = []
    for seq in sequences:
        for k in range(len(seq) - window_c):
            pairs.append((np.asarray(seq[k:k + window_c]), np.asarray(seq[k + window_c])))
    return pairs
