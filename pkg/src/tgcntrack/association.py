"""Track-to-detection association.

Three distances feed the assignment cost:

* ``motion_distance``: squared Mahalanobis distance of the detection box from
  the track's projected Kalman distribution;
* ``velocity_distance``: one minus the cosine between the track's velocity
  and the displacement the detection would imply;
* ``appearance_distance``: cosine distance between the predicted appearance
  and the detection's feature.

They are blended with weights ``lambda1``, ``lambda2`` and
``1 - lambda1 - lambda2``. Pairs whose motion distance fails the chi-square
gate are excluded, and the rest is solved as one global assignment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import kalman
from .core import BoundingBox, DimensionMismatch, InvalidWeights, NonInvertibleCovariance, Velocity
from .kernels import solve_assignment

# 0.95 quantile of chi-square with 4 degrees of freedom
CHI2_GATE_4DOF = 9.4877
NORM_EPS = 1e-12


@dataclass
class CostMatrix:
    values: np.ndarray
    gated: np.ndarray = None

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float, ndmin=2)
        if self.values.size == 0 and self.values.ndim != 2:
            self.values = self.values.reshape(0, 0)
        if self.gated is None:
            self.gated = np.zeros(self.values.shape, dtype=bool)
        else:
            self.gated = np.array(self.gated, dtype=bool).reshape(self.values.shape)
        bad = ~np.isfinite(self.values) & ~self.gated
        if bad.any():
            raise ValueError("non-gated cost entries must be finite")

    @classmethod
    def empty(cls, rows: int, cols: int) -> "CostMatrix":
        return cls(np.zeros((rows, cols)))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass
class AssociationResult:
    matches: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_tracks: List[int] = field(default_factory=list)
    unmatched_detections: List[int] = field(default_factory=list)


def motion_distance(projected, z: BoundingBox) -> float:
    mean4, cov4 = projected
    r = z.to_cxcywh() - np.asarray(mean4, dtype=float)
    try:
        chol = scipy.linalg.cholesky(np.asarray(cov4, dtype=float), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NonInvertibleCovariance("projected covariance is not positive definite") from exc
    y = scipy.linalg.solve_triangular(chol, r, lower=True, check_finite=False)
    return float(y @ y)


def _cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < NORM_EPS or nb < NORM_EPS:
        return 1.0
    cos = float(a @ b) / (na * nb)
    return 1.0 - min(1.0, max(-1.0, cos))


def velocity_distance(v1: Velocity, v2: Velocity) -> float:
    return _cosine_distance(v1.as_array(), v2.as_array())


def appearance_distance(predicted, detected) -> float:
    a = np.asarray(predicted, dtype=float).reshape(-1)
    b = np.asarray(detected, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatch(f"feature dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    return _cosine_distance(a, b)


def check_weights(lambda1: float, lambda2: float) -> None:
    if not (lambda1 >= 0 and lambda2 >= 0 and lambda1 + lambda2 <= 1.0 + 1e-12):
        raise InvalidWeights(f"need lambda1, lambda2 >= 0 and lambda1 + lambda2 <= 1, got {lambda1}, {lambda2}")


def combined_cost(d1: float, d2: float, d3: float, lambda1: float, lambda2: float) -> float:
    check_weights(lambda1, lambda2)
    return lambda1 * d1 + lambda2 * d2 + (1.0 - lambda1 - lambda2) * d3


def gate(c: CostMatrix, d1_values, threshold: float) -> CostMatrix:
    d1 = np.asarray(d1_values, dtype=float).reshape(c.values.shape)
    return CostMatrix(c.values.copy(), c.gated | (d1 > threshold))


def hungarian(c: CostMatrix) -> AssociationResult:
    """Minimum-cost matching over non-gated pairs, of maximum cardinality."""
    if c.rows == 0 or c.cols == 0:
        return AssociationResult([], list(range(c.rows)), list(range(c.cols)))
    cost = np.where(c.gated, np.inf, c.values)
    row_to_col = solve_assignment(cost)
    matches = [(i, j) for i, j in enumerate(row_to_col) if j >= 0]
    taken = {j for _, j in matches}
    return AssociationResult(
        matches,
        [i for i, j in enumerate(row_to_col) if j < 0],
        [j for j in range(c.cols) if j not in taken],
    )


def implied_velocity(state: kalman.KalmanState, z: BoundingBox) -> Velocity:
    """Displacement from the track's previous-frame position to the detection.

    The previous position is the predicted center stepped back by one frame of
    the track's own velocity, so only the predicted state is needed.
    """
    cx, cy = state.mean[0] - state.mean[4], state.mean[1] - state.mean[5]
    zx, zy = z.to_cxcywh()[:2]
    return Velocity(float(zx - cx), float(zy - cy))


def distance_matrices(tracks: Sequence, detections: Sequence, noise: kalman.NoiseConfig = kalman.NoiseConfig()):
    """The three (tracks x detections) distance matrices d1, d2, d3."""
    n, m = len(tracks), len(detections)
    d1 = np.zeros((n, m))
    d2 = np.zeros((n, m))
    d3 = np.zeros((n, m))
    for i, (state, feat) in enumerate(tracks):
        proj = kalman.project(state, noise)
        v = kalman.velocity(state)
        for j, det in enumerate(detections):
            d1[i, j] = motion_distance(proj, det.bbox)
            d2[i, j] = velocity_distance(v, implied_velocity(state, det.bbox))
            d3[i, j] = appearance_distance(feat, det.feature)
    return d1, d2, d3


def associate(
    tracks: Sequence,
    detections: Sequence,
    lambda1: float = 0.3,
    lambda2: float = 0.2,
    gate_threshold: float = CHI2_GATE_4DOF,
    cost_ceiling: float = 1.0,
    noise: kalman.NoiseConfig = kalman.NoiseConfig(),
) -> AssociationResult:
    """Match ``tracks`` (pairs of KalmanState and predicted feature) to ``detections``."""
    check_weights(lambda1, lambda2)
    n, m = len(tracks), len(detections)
    if n == 0 or m == 0:
        return AssociationResult([], list(range(n)), list(range(m)))
    d1, d2, d3 = distance_matrices(tracks, detections, noise)
    values = lambda1 * d1 + lambda2 * d2 + (1.0 - lambda1 - lambda2) * d3
    cm = gate(CostMatrix(values), d1, gate_threshold)
    res = hungarian(cm)
    kept = []
    for i, j in res.matches:
        if values[i, j] > cost_ceiling:
            res.unmatched_tracks.append(i)
            res.unmatched_detections.append(j)
        else:
            kept.append((i, j))
    res.matches = kept
    res.unmatched_tracks.sort()
    res.unmatched_detections.sort()
    return res
