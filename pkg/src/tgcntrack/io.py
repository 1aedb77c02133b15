"""MOTChallenge text formats, the embedding sidecar and the key = value config file.

Detection, ground-truth and result files are plain MOT16 CSV. Appearance
embeddings live in a separate CSV keyed by ``(frame, det_index)``, where
``det_index`` is the 0-based position of the detection within its frame in
the detection file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Dict, Iterable, List, Tuple

import numpy as np

from .core import BoundingBox, Detection, DimensionMismatch, IngestError, ParseError, as_feature
from .kalman import NoiseConfig
from .tgcn import TrainConfig
from .tracker import TrackerConfig


@dataclass(frozen=True)
class MotRow:
    frame: int
    id: int
    bb_left: float
    bb_top: float
    bb_width: float
    bb_height: float
    conf: float = 1.0
    x3d: float = -1.0
    y3d: float = -1.0
    z3d: float = -1.0


def fmt_real(v: float) -> str:
    """Shortest decimal that round-trips; integral values print without a fraction."""
    v = float(v)
    if v == 0:
        return "0"
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _rows(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield lineno, [t.strip() for t in line.split(",")]


def _int(tok: str, lineno: int) -> int:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno) from None
    if not v.is_integer():
        raise ParseError(f"expected an integer, got {tok!r}", lineno)
    return int(v)


def _real(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {tok!r}", lineno)
    return v


def _box(toks, lineno: int) -> BoundingBox:
    x, y, w, h = (_real(t, lineno) for t in toks)
    if w <= 0 or h <= 0:
        raise ParseError(f"box size must be positive, got width={w} height={h}", lineno)
    return BoundingBox(x, y, w, h)


def _frame(tok: str, lineno: int) -> int:
    f = _int(tok, lineno)
    if f < 1:
        raise ParseError(f"frame index must be >= 1, got {f}", lineno)
    return f


def parse_mot_rows(text: str, min_fields: int = 6) -> List[Tuple[int, MotRow]]:
    """Raw MOT rows with their 1-based line numbers; missing trailing fields take defaults."""
    out = []
    for lineno, toks in _rows(text):
        if len(toks) < min_fields:
            raise ParseError(f"expected at least {min_fields} fields, got {len(toks)}", lineno)
        frame = _frame(toks[0], lineno)
        tid = _int(toks[1], lineno)
        box = _box(toks[2:6], lineno)
        rest = [_real(t, lineno) for t in toks[6:10]]
        rest += [1.0, -1.0, -1.0, -1.0][len(rest):]
        out.append((lineno, MotRow(frame, tid, box.x, box.y, box.w, box.h, *rest)))
    return out


def parse_detections(text: str) -> Dict[int, List[Detection]]:
    """``frame -> detections`` in file order; the id column is ignored."""
    out: Dict[int, List[Detection]] = {}
    for lineno, r in parse_mot_rows(text, min_fields=7):
        if not 0.0 <= r.conf <= 1.0:
            raise ParseError(f"confidence {r.conf} outside [0, 1]", lineno)
        box = BoundingBox(r.bb_left, r.bb_top, r.bb_width, r.bb_height)
        out.setdefault(r.frame, []).append(Detection(r.frame, box, r.conf))
    return dict(sorted(out.items()))


def write_detections(dets: Dict[int, Iterable[Detection]]) -> str:
    lines = []
    for frame in sorted(dets):
        for d in dets[frame]:
            b = d.bbox
            vals = [frame, -1, b.x, b.y, b.w, b.h, d.confidence, -1, -1, -1]
            lines.append(",".join(fmt_real(v) for v in vals))
    return "".join(ln + "\n" for ln in lines)


def parse_embeddings(text: str, d: int) -> Dict[Tuple[int, int], np.ndarray]:
    out: Dict[Tuple[int, int], np.ndarray] = {}
    seen: Dict[Tuple[int, int], int] = {}
    for lineno, toks in _rows(text):
        if len(toks) != d + 2:
            raise ParseError(f"expected {d} feature values, got {len(toks) - 2}", lineno)
        key = (_frame(toks[0], lineno), _int(toks[1], lineno))
        if key[1] < 0:
            raise ParseError(f"det_index must be >= 0, got {key[1]}", lineno)
        if key in seen:
            raise ParseError(f"duplicate embedding key {key} (first defined on line {seen[key]})", lineno)
        seen[key] = lineno
        out[key] = as_feature([_real(t, lineno) for t in toks[2:]])
    return out


def embedding_dim(text: str) -> int:
    """Feature dimension declared by the first data row of an embedding file."""
    for lineno, toks in _rows(text):
        if len(toks) < 3:
            raise ParseError("embedding row needs frame, det_index and at least one value", lineno)
        return len(toks) - 2
    raise ParseError("embedding file is empty")


def write_embeddings(emb: Dict[Tuple[int, int], np.ndarray]) -> str:
    lines = []
    for (frame, idx) in sorted(emb):
        vals = ",".join(fmt_real(v) for v in emb[(frame, idx)])
        lines.append(f"{frame},{idx},{vals}")
    return "".join(ln + "\n" for ln in lines)


def attach_embeddings(dets: Dict[int, List[Detection]], emb, min_confidence: float = 0.0):
    """Join features onto detections by raw file position, then drop low-confidence rows."""
    missing = [(f, i) for f, ds in dets.items() for i in range(len(ds)) if (f, i) not in emb]
    if missing:
        raise IngestError(missing)
    dims = {v.shape[0] for v in emb.values()}
    if len(dims) > 1:
        raise DimensionMismatch(f"embeddings have mixed dimensions {sorted(dims)}")
    out = {}
    for f, ds in dets.items():
        out[f] = [d.with_feature(emb[(f, i)]) for i, d in enumerate(ds) if d.confidence >= min_confidence]
    return out


def parse_ground_truth(text: str) -> Dict[int, List[Tuple[int, BoundingBox, bool]]]:
    """``frame -> [(id, box, considered)]``.

    A row is considered when its flag is non-zero and its class is pedestrian
    (1). Short rows without flag/class columns, and class -1, count as
    considered pedestrians.
    """
    out: Dict[int, list] = {}
    for lineno, toks in _rows(text):
        if len(toks) < 6:
            raise ParseError(f"expected at least 6 fields, got {len(toks)}", lineno)
        frame = _frame(toks[0], lineno)
        tid = _int(toks[1], lineno)
        box = _box(toks[2:6], lineno)
        flag = _real(toks[6], lineno) if len(toks) > 6 else 1.0
        cls = _int(toks[7], lineno) if len(toks) > 7 else -1
        considered = flag != 0 and cls in (1, -1)
        out.setdefault(frame, []).append((tid, box, considered))
    return dict(sorted(out.items()))


def write_ground_truth(gt: Dict[int, Iterable[Tuple[int, BoundingBox, bool]]], visibility: float = 1.0) -> str:
    lines = []
    for frame in sorted(gt):
        for tid, b, considered in sorted(gt[frame], key=lambda r: r[0]):
            flag, cls = (1, 1) if considered else (0, 1)
            vals = [frame, tid, b.x, b.y, b.w, b.h, flag, cls, visibility]
            lines.append(",".join(fmt_real(v) for v in vals))
    return "".join(ln + "\n" for ln in lines)


def write_results(rows: Iterable[Tuple[int, int, BoundingBox]]) -> str:
    lines = []
    for frame, tid, b in sorted(rows, key=lambda r: (r[0], r[1])):
        vals = [frame, tid, b.x, b.y, b.w, b.h, 1, -1, -1, -1]
        lines.append(",".join(fmt_real(v) for v in vals))
    return "".join(ln + "\n" for ln in lines)


def parse_results(text: str) -> Dict[int, List[Tuple[int, BoundingBox]]]:
    out: Dict[int, list] = {}
    for _, r in parse_mot_rows(text):
        box = BoundingBox(r.bb_left, r.bb_top, r.bb_width, r.bb_height)
        out.setdefault(r.frame, []).append((r.id, box))
    return dict(sorted(out.items()))


# -- configuration ----------------------------------------------------------

_NOISE_KEYS = {f.name for f in fields(NoiseConfig)}
_TRACKER_KEYS = {f.name for f in fields(TrackerConfig)} - {"noise"}
_TRAIN_KEYS = {f.name for f in fields(TrainConfig)}
MODEL_KEYS = {"layers"}
CONFIG_KEYS = _NOISE_KEYS | _TRACKER_KEYS | _TRAIN_KEYS | MODEL_KEYS
_INT_KEYS = {"n_init", "max_age", "window_c", "epochs", "seed", "layers"}


def parse_config(text: str) -> Dict[str, float]:
    """Flat ``key = value`` pairs; ``#`` starts a comment. Unknown keys are errors."""
    out: Dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ParseError(f"unknown config key {key!r}", lineno)
        if key in out:
            raise ParseError(f"duplicate config key {key!r}", lineno)
        out[key] = _int(val, lineno) if key in _INT_KEYS else _real(val, lineno)
    return out


def build_configs(values: Dict[str, float]):
    """Split flat config values into (TrackerConfig, TrainConfig, layers)."""
    noise = NoiseConfig(**{k: v for k, v in values.items() if k in _NOISE_KEYS})
    tracker = TrackerConfig(noise=noise, **{k: v for k, v in values.items() if k in _TRACKER_KEYS})
    train = TrainConfig(**{k: v for k, v in values.items() if k in _TRAIN_KEYS})
    return tracker, train, int(values.get("layers", 2))


def dump_config(tracker: TrackerConfig, train: TrainConfig, layers: int = 2) -> str:
    items = {f.name: getattr(tracker, f.name) for f in fields(TrackerConfig) if f.name != "noise"}
    items.update({f.name: getattr(tracker.noise, f.name) for f in fields(NoiseConfig)})
    items.update({f.name: getattr(train, f.name) for f in fields(TrainConfig)})
    items["layers"] = layers
    return "".join(f"{k} = {fmt_real(v)}\n" for k, v in items.items())


def read_text(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)

