"""CLEAR MOT evaluation (MOTA, MOTP, MT, ML, IDSW, FM, FP, FN) with IoU matching."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .core import BoundingBox, EmptyGroundTruth
from .kernels import iou_matrix, solve_assignment

MOSTLY_TRACKED = 0.8
MOSTLY_LOST = 0.2


@dataclass(frozen=True)
class EvalReport:
    mota: float
    motp: float
    mt: float
    ml: float
    id_switches: int
    fragmentations: int
    false_positives: int
    false_negatives: int
    num_gt: int
    # raw counters kept so several sequences can be pooled
    num_matches: int = 0
    iou_sum: float = 0.0
    num_trajectories: int = 0
    mt_count: int = 0
    ml_count: int = 0


def _boxes(items) -> np.ndarray:
    return np.array([b.as_tuple() for b in items], dtype=float).reshape(-1, 4)


def _match(iou: np.ndarray, threshold: float) -> List[Tuple[int, int]]:
    if iou.size == 0:
        return []
    cost = np.where(iou >= threshold, 1.0 - iou, np.inf)
    return [(i, j) for i, j in enumerate(solve_assignment(cost)) if j >= 0]


def _finish(num_gt, fp, fn, idsw, fm, n_match, iou_sum, n_traj, mt_count, ml_count) -> EvalReport:
    if num_gt == 0:
        raise EmptyGroundTruth("ground truth has no considered boxes; MOTA is undefined")
    return EvalReport(
        mota=1.0 - (fn + fp + idsw) / num_gt,
        motp=100.0 * iou_sum / n_match if n_match else 0.0,
        mt=mt_count / n_traj if n_traj else 0.0,
        ml=ml_count / n_traj if n_traj else 0.0,
        id_switches=idsw,
        fragmentations=fm,
        false_positives=fp,
        false_negatives=fn,
        num_gt=num_gt,
        num_matches=n_match,
        iou_sum=iou_sum,
        num_trajectories=n_traj,
        mt_count=mt_count,
        ml_count=ml_count,
    )


def evaluate(gt: Dict[int, Sequence], hypotheses: Dict[int, Sequence], iou_threshold: float = 0.5) -> EvalReport:
    """Score ``hypotheses`` (frame -> [(id, box)]) against ``gt`` (frame -> [(id, box, considered)]).

    Per frame, last frame's GT/hypothesis pairs are kept if their IoU still
    clears the threshold; the remaining boxes are matched by maximum total
    IoU. Hypotheses that only cover non-considered GT are ignored rather than
    counted as false positives.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError("iou_threshold must lie strictly between 0 and 1")
    fp = fn = idsw = fm = n_match = 0
    iou_sum = 0.0
    last_hyp: Dict[int, int] = {}  # gt id -> most recent matched hypothesis id
    prev_pairs: Dict[int, int] = {}  # gt id -> hypothesis id matched in the previous frame
    matched_frames: Dict[int, int] = {}
    present_frames: Dict[int, int] = {}
    was_matched: Dict[int, bool] = {}

    for frame in sorted(set(gt) | set(hypotheses)):
        rows = gt.get(frame, ())
        g_ids = [r[0] for r in rows if r[2]]
        g_box = [r[1] for r in rows if r[2]]
        ign_box = [r[1] for r in rows if not r[2]]
        hyps = list(hypotheses.get(frame, ()))
        h_ids = [h[0] for h in hyps]
        ious = iou_matrix(_boxes(g_box), _boxes([h[1] for h in hyps]))

        pairs: Dict[int, int] = {}
        h_index = {hid: j for j, hid in enumerate(h_ids)}
        for i, gid in enumerate(g_ids):
            hid = prev_pairs.get(gid)
            j = h_index.get(hid)
            if j is not None and j not in pairs.values() and ious[i, j] >= iou_threshold:
                pairs[i] = j
        free_g = [i for i in range(len(g_ids)) if i not in pairs]
        used_h = set(pairs.values())
        free_h = [j for j in range(len(hyps)) if j not in used_h]
        for a, b in _match(ious[np.ix_(free_g, free_h)], iou_threshold):
            pairs[free_g[a]] = free_h[b]

        cur_pairs = {}
        for i, j in sorted(pairs.items()):
            gid, hid = g_ids[i], h_ids[j]
            if gid in last_hyp and last_hyp[gid] != hid:
                idsw += 1
            last_hyp[gid] = hid
            cur_pairs[gid] = hid
            iou_sum += float(ious[i, j])
            n_match += 1
        for i, gid in enumerate(g_ids):
            present_frames[gid] = present_frames.get(gid, 0) + 1
            hit = i in pairs
            if hit:
                matched_frames[gid] = matched_frames.get(gid, 0) + 1
            elif was_matched.get(gid):
                fm += 1
            was_matched[gid] = hit
        prev_pairs = cur_pairs

        fn += len(g_ids) - len(pairs)
        spare = [j for j in range(len(hyps)) if j not in set(pairs.values())]
        if ign_box and spare:
            ign_iou = iou_matrix(_boxes(ign_box), _boxes([hyps[j][1] for j in spare]))
            ignored = {spare[b] for _, b in _match(ign_iou, iou_threshold)}
            spare = [j for j in spare if j not in ignored]
        fp += len(spare)

    num_gt = sum(present_frames.values())
    ratios = [matched_frames.get(g, 0) / n for g, n in present_frames.items()]
    mt_count = sum(r >= MOSTLY_TRACKED for r in ratios)
    ml_count = sum(r <= MOSTLY_LOST for r in ratios)
    return _finish(num_gt, fp, fn, idsw, fm, n_match, iou_sum, len(ratios), mt_count, ml_count)


def combine(reports: Sequence[EvalReport]) -> EvalReport:
    """Pool per-sequence reports by summing raw counters."""
    s = lambda name: sum(getattr(r, name) for r in reports)  # noqa: E731
    return _finish(s("num_gt"), s("false_positives"), s("false_negatives"), s("id_switches"),
                   s("fragmentations"), s("num_matches"), s("iou_sum"), s("num_trajectories"),
                   s("mt_count"), s("ml_count"))


COLUMNS = ("MOTA", "MOTP", "MT", "ML", "IDSW", "FM", "FP", "FN")


def report_header() -> str:
    return "  ".join(COLUMNS)


def report_text(r: EvalReport) -> str:
    return "  ".join([
        f"{100.0 * r.mota:.1f}",
        f"{r.motp:.1f}",
        f"{r.mt:.3f}",
        f"{r.ml:.3f}",
        str(r.id_switches),
        str(r.fragmentations),
        str(r.false_positives),
        str(r.false_negatives),
    ])
