"""Tracking-by-detection with a time-domain graph convolutional appearance predictor."""
from .core import BoundingBox, Detection, Velocity, center, iou
from .kalman import KalmanState, NoiseConfig
from .kernels import BACKEND
from .metrics import EvalReport, evaluate
from .tgcn import TgcnModel, TrainConfig
from .tracker import Tracker, TrackerConfig, run_sequence

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundingBox",
    "Detection",
    "EvalReport",
    "KalmanState",
    "NoiseConfig",
    "TgcnModel",
    "TrainConfig",
    "Tracker",
    "TrackerConfig",
    "Velocity",
    "center",
    "evaluate",
    "iou",
    "run_sequence",
]
