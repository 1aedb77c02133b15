"""Command-line interface: ``tgcntrack {track,train,eval,synth}``.

Exit codes: 0 success, 1 input error, 2 dimension mismatch, 3 undefined metric.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import io, metrics, synth, tgcn, tracker
from .core import DimensionMismatch, EmptyDataset, EmptyGroundTruth, InvalidSpec, TrackingError

log = logging.getLogger("tgcntrack")

EXIT_OK, EXIT_INPUT, EXIT_DIM, EXIT_METRIC = 0, 1, 2, 3

# flag dest -> config key, for the flags that may override the config file
_OVERRIDES = {
    "lambda1": "lambda1",
    "lambda2": "lambda2",
    "gate_threshold": "gate_threshold",
    "cost_ceiling": "cost_ceiling",
    "n_init": "n_init",
    "max_age": "max_age",
    "window_c": "window_c",
    "min_confidence": "detection_min_confidence",
    "lr": "learning_rate",
    "epochs": "epochs",
    "seed": "seed",
    "layers": "layers",
}


def _config_values(args) -> dict:
    values = io.parse_config(io.read_text(args.config)) if args.config else {}
    for dest, key in _OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[key] = v
    return values


def _echo_config(tcfg, trcfg, layers) -> None:
    sys.stderr.write("effective config:\n")
    for line in io.dump_config(tcfg, trcfg, layers).splitlines():
        sys.stderr.write(f"  {line}\n")


def _track_one(det_path, emb_path, out_path, model, cfg):
    det_text = io.read_text(det_path)
    emb_text = io.read_text(emb_path)
    dets = io.parse_detections(det_text)
    if emb_text.strip():
        d = io.embedding_dim(emb_text)
        if model is not None and d != model.feature_dim:
            raise DimensionMismatch(f"{emb_path}: embeddings have d={d}, model expects d={model.feature_dim}")
        emb = io.parse_embeddings(emb_text, d)
    else:
        emb = {}
    dets = io.attach_embeddings(dets, emb, cfg.detection_min_confidence)
    t0 = time.perf_counter()
    rows = tracker.run_sequence(dets, model, cfg)
    elapsed = time.perf_counter() - t0
    n_frames = (max(dets) - min(dets) + 1) if dets else 0
    fps = n_frames / elapsed if elapsed > 0 else float("inf")
    io.write_text(out_path, io.write_results(rows))
    return det_path, n_frames, fps


def cmd_track(args) -> int:
    if not (len(args.det) == len(args.emb) == len(args.out)):
        sys.stderr.write("error: --det, --emb and --out must be given the same number of times\n")
        return EXIT_INPUT
    model = tgcn.load(args.model) if args.model else None
    values = _config_values(args)
    if model is not None:
        values.setdefault("window_c", model.window_c)
    tcfg, trcfg, layers = io.build_configs(values)
    _echo_config(tcfg, trcfg, layers)
    jobs = max(1, args.jobs)
    work = list(zip(args.det, args.emb, args.out))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(lambda w: _track_one(*w, model, tcfg), work))
    for path, n_frames, fps in results:
        sys.stderr.write(f"{path}: {n_frames} frames, {fps:.1f} frames/s\n")
    return EXIT_OK


def _training_pairs(args, window_c: int):
    if args.emb:
        text = io.read_text(args.emb)
        if not text.strip():
            return []
        emb = io.parse_embeddings(text, io.embedding_dim(text))
        return synth.window_pairs(synth.sequences_from_embeddings(emb), window_c)
    spec = synth.ScenarioSpec(args.scenario, args.frames, args.seed or 0, args.dim, 0.0)
    if spec.kind != "periodic_features":
        sc = synth.generate(spec)
        return synth.window_pairs(synth.sequences_from_embeddings(sc.embeddings), window_c)
    return synth.periodic_features(spec, window_c)


def cmd_train(args) -> int:
    values = _config_values(args)
    tcfg, trcfg, layers = io.build_configs(values)
    _echo_config(tcfg, trcfg, layers)
    pairs = _training_pairs(args, tcfg.window_c)
    if not pairs:
        raise EmptyDataset("no training pairs: sequences are not longer than the window")
    d = pairs[0][1].shape[0]
    model = tgcn.init_model(tcfg.window_c, d, layers, trcfg.seed)
    res = tgcn.fit(model, pairs, trcfg)
    tgcn.save(res.model, args.out)
    print(f"pairs: {len(pairs)}")
    print(f"copy-last loss: {tgcn.copy_last_loss(pairs):.17g}")
    print(f"initial loss: {res.initial_loss:.17g}")
    print(f"final loss: {res.best_loss:.17g}")
    return EXIT_OK


def cmd_eval(args) -> int:
    gt = io.parse_ground_truth(io.read_text(args.gt))
    hyp = io.parse_results(io.read_text(args.result))
    report = metrics.evaluate(gt, hyp, args.iou_threshold)
    text = metrics.report_header() + "\n" + metrics.report_text(report) + "\n"
    if args.out:
        io.write_text(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = synth.ScenarioSpec(args.scenario, args.frames, args.seed, args.dim, args.noise_std)
    sc = synth.generate(spec)
    os.makedirs(args.out, exist_ok=True)
    io.write_text(os.path.join(args.out, "det.txt"), io.write_detections(sc.detections))
    io.write_text(os.path.join(args.out, "emb.txt"), io.write_embeddings(sc.embeddings))
    io.write_text(os.path.join(args.out, "gt.txt"), io.write_ground_truth(sc.ground_truth))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tgcntrack", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def tracker_flags(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--lambda1", type=float)
        sp.add_argument("--lambda2", type=float)
        sp.add_argument("--gate-threshold", type=float)
        sp.add_argument("--cost-ceiling", type=float)
        sp.add_argument("--n-init", type=int)
        sp.add_argument("--max-age", type=int)
        sp.add_argument("--window-c", type=int)
        sp.add_argument("--min-confidence", type=float)

    t = sub.add_parser("track", help="track detections into MOT result files")
    t.add_argument("--det", action="append", required=True, help="MOT det.txt (repeat for several sequences)")
    t.add_argument("--emb", action="append", required=True, help="embedding CSV matching each --det")
    t.add_argument("--out", action="append", required=True, help="result file for each --det")
    t.add_argument("--model", help="serialized TGCN model; without it the last feature is reused")
    t.add_argument("--jobs", type=int, default=1, help="sequences tracked in parallel")
    tracker_flags(t)
    t.set_defaults(func=cmd_track)

    tr = sub.add_parser("train", help="fit a TGCN appearance predictor")
    src = tr.add_mutually_exclusive_group(required=True)
    src.add_argument("--emb", help="embedding CSV; each det_index is one object's sequence")
    src.add_argument("--scenario", choices=synth.KINDS, help="generate training sequences")
    tr.add_argument("--frames", type=int, default=204)
    tr.add_argument("--dim", type=int, default=16)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--layers", type=int)
    tr.add_argument("--out", required=True, help="model file to write")
    tracker_flags(tr)
    tr.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="CLEAR MOT report of a result file against ground truth")
    e.add_argument("--gt", required=True)
    e.add_argument("--result", required=True)
    e.add_argument("--iou-threshold", type=float, default=0.5)
    e.add_argument("--out", help="also write the report to this file")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="write det/emb/gt files for a synthetic scenario")
    s.add_argument("--scenario", choices=synth.KINDS, default="crossing")
    s.add_argument("--frames", type=int, default=40)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dim", type=int, default=16)
    s.add_argument("--noise-std", type=float, default=0.5)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DimensionMismatch as exc:
        sys.stderr.write(f"error: dimension mismatch: {exc}\n")
        return EXIT_DIM
    except EmptyGroundTruth as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_METRIC
    except (TrackingError, InvalidSpec, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
