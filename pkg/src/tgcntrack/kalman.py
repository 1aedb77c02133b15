"""Six-state constant-velocity Kalman filter over (cx, cy, w, h, vx, vy).

Box size follows a random walk; only the center carries a velocity. All noise
standard deviations scale with the current box height, so the filter behaves
the same for near and far pedestrians.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import BoundingBox, Detection, NonInvertibleInnovation, Velocity

STATE_DIM = 6
MEAS_DIM = 4

# x += vx, y += vy with dt fixed at one frame
_F = np.eye(STATE_DIM)
_F[0, 4] = 1.0
_F[1, 5] = 1.0
_H = np.eye(MEAS_DIM, STATE_DIM)


@dataclass(frozen=True)
class NoiseConfig:
    position_std_factor: float = 1.0 / 20
    velocity_std_factor: float = 1.0 / 160
    measurement_std_factor: float = 1.0 / 20

    def __post_init__(self):
        for name in ("position_std_factor", "velocity_std_factor", "measurement_std_factor"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")


@dataclass(frozen=True, eq=False)
class KalmanState:
    mean: np.ndarray
    covariance: np.ndarray

    @property
    def height(self) -> float:
        return float(self.mean[3])

    def to_bbox(self) -> BoundingBox:
        cx, cy, w, h = self.mean[:4]
        # keep the box valid even if the random walk drives the size negative
        return BoundingBox.from_center(cx, cy, max(w, 1e-6), max(h, 1e-6))


def _diag_std(h: float, pos: float, vel: float) -> np.ndarray:
    return np.diag(np.square([pos * h] * 4 + [vel * h] * 2))


def initiate(d: Detection, cfg: NoiseConfig = NoiseConfig()) -> KalmanState:
    z = d.bbox.to_cxcywh()
    mean = np.r_[z, 0.0, 0.0]
    cov = _diag_std(d.bbox.h, cfg.position_std_factor, cfg.velocity_std_factor)
    return KalmanState(mean, cov)


def process_noise(cfg: NoiseConfig, h: float) -> np.ndarray:
    return _diag_std(abs(h), cfg.position_std_factor, cfg.velocity_std_factor)


def measurement_noise(cfg: NoiseConfig, h: float) -> np.ndarray:
    return np.diag(np.square([cfg.measurement_std_factor * abs(h)] * MEAS_DIM))


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def predict(s: KalmanState, cfg: NoiseConfig = NoiseConfig()) -> KalmanState:
    mean = _F @ s.mean
    cov = _F @ s.covariance @ _F.T + process_noise(cfg, s.height)
    return KalmanState(mean, _symmetrize(cov))


def project(s: KalmanState, cfg: NoiseConfig = NoiseConfig()):
    """Measurement-space mean and innovation covariance of the state."""
    mean4 = _H @ s.mean
    cov4 = _H @ s.covariance @ _H.T + measurement_noise(cfg, s.height)
    return mean4, _symmetrize(cov4)


def update(s: KalmanState, z: BoundingBox, cfg: NoiseConfig = NoiseConfig()) -> KalmanState:
    mean4, cov4 = project(s, cfg)
    try:
        factor = scipy.linalg.cho_factor(cov4, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NonInvertibleInnovation("innovation covariance is not positive definite") from exc
    ph = s.covariance @ _H.T
    gain = scipy.linalg.cho_solve(factor, ph.T, check_finite=False).T
    innovation = z.to_cxcywh() - mean4
    mean = s.mean + gain @ innovation
    # Joseph form keeps the posterior positive semi-definite under round-off
    ikh = np.eye(STATE_DIM) - gain @ _H
    cov = ikh @ s.covariance @ ikh.T + gain @ measurement_noise(cfg, s.height) @ gain.T
    return KalmanState(mean, _symmetrize(cov))


def velocity(s: KalmanState) -> Velocity:
    return Velocity(float(s.mean[4]), float(s.mean[5]))
