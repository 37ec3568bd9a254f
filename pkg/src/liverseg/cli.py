"""Command-line interface binding the library to files.

Subcommands: ``preprocess`` (volume to slab directory), ``evaluate``
(mask pair or directories to metric rows), ``schedule-sim`` (loss trace to
LR trajectory CSV), ``splits`` (id list to fold JSON files), ``mesh`` (mask
to .obj/.mtl) and ``aggregate`` (fold summaries to a results table row).

Machine-readable output goes to stdout, diagnostics to stderr.  Exit codes:
0 success, 1 domain error, 2 usage error.  ``LIVERSEG_JOBS`` sets the
default worker count for per-record parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import experiment, mesh_export, preprocess, volume_io
from .errors import LiversegError
from .kvconfig import read_keyvalues
from .metrics import MetricReport, evaluate_case, reports_to_csv
from .schedulers import (
    EarlyStopConfig,
    OneCycleConfig,
    PlateauConfig,
    simulate_schedule,
)


def _record_id_from_path(path: str) -> str:
    name = os.path.basename(path)
    for suffix in (".nii.gz", ".nii"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return os.path.splitext(name)[0]


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("LIVERSEG_JOBS", "1")))
    except ValueError:
        return 1


# --- preprocess --------------------------------------------------------------

def _add_preprocess(sub):
    p = sub.add_parser("preprocess", help="run the slab preprocessing pipeline")
    p.add_argument("--in", dest="volume", required=True, metavar="VOL.nii[.gz]")
    p.add_argument("--mask", metavar="MASK.nii[.gz]")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--config", metavar="FILE", help="key=value pipeline settings")
    p.add_argument("--clip-lo", type=float)
    p.add_argument("--clip-hi", type=float)
    p.add_argument("--rescale-factor", type=float)
    p.add_argument("--clahe-clip-limit", type=float)
    p.add_argument("--clahe-tiles", metavar="RxC")
    p.add_argument("--slab-size", type=int)
    p.add_argument("--target-orientation", metavar="CODE")
    p.add_argument("--record-id")
    p.set_defaults(func=_run_preprocess)


def _run_preprocess(args) -> int:
    settings: dict = {}
    if args.config:
        settings = read_keyvalues(args.config)
    overrides = {
        "clip_lo": args.clip_lo,
        "clip_hi": args.clip_hi,
        "rescale_factor": args.rescale_factor,
        "clahe_clip_limit": args.clahe_clip_limit,
        "clahe_tiles": args.clahe_tiles,
        "slab_size": args.slab_size,
        "target_orientation": args.target_orientation,
    }
    for key, value in overrides.items():
        if value is not None:
            settings[key] = str(value)
    cfg = preprocess.config_from_mapping(settings)
    record_id = args.record_id or _record_id_from_path(args.volume)
    vol = volume_io.read_volume(args.volume)
    mask = volume_io.read_labels(args.mask) if args.mask else None
    slabs, mask_out = preprocess.run_pipeline(vol, mask, cfg, record_id=record_id)
    manifest = preprocess.write_slabs(slabs, args.out)
    if mask_out is not None:
        volume_io.write_volume(mask_out, os.path.join(args.out, "mask.nii.gz"))
    print(manifest)
    print(f"{len(slabs)} slabs written to {args.out}", file=sys.stderr)
    return 0


# --- evaluate -----------------------------------------------------------------

def _add_evaluate(sub):
    p = sub.add_parser("evaluate", help="metric report for predicted vs true masks")
    p.add_argument("--pred", metavar="PRED.nii[.gz]")
    p.add_argument("--gt", metavar="GT.nii[.gz]")
    p.add_argument("--pred-dir", metavar="DIR")
    p.add_argument("--gt-dir", metavar="DIR")
    p.add_argument("--record-id")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=_run_evaluate)


def _evaluate_pair(pred_path, gt_path, record_id):
    pred = volume_io.read_labels(pred_path)
    gt = volume_io.read_labels(gt_path)
    return evaluate_case(pred, gt, record_id=record_id)


def _run_evaluate(args) -> int:
    if bool(args.pred) != bool(args.gt) or bool(args.pred_dir) != bool(args.gt_dir):
        raise UsageError("evaluate needs --pred with --gt, or --pred-dir with --gt-dir")
    if bool(args.pred) == bool(args.pred_dir):
        raise UsageError("evaluate needs exactly one of --pred or --pred-dir")

    if args.pred:
        record_id = args.record_id or _record_id_from_path(args.pred)
        reports = [_evaluate_pair(args.pred, args.gt, record_id)]
    else:
        pairs = _matched_records(args.pred_dir, args.gt_dir)
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            reports = list(pool.map(
                lambda item: _evaluate_pair(item[1], item[2], item[0]), pairs))
        reports.sort(key=lambda r: r.record_id)

    if args.format == "json":
        for report in reports:
            print(report.to_json())
    else:
        sys.stdout.write(reports_to_csv(reports))
    return 0


def _matched_records(pred_dir, gt_dir):
    def scan(d):
        out = {}
        for name in os.listdir(d):
            if name.endswith((".nii", ".nii.gz")):
                out[_record_id_from_path(name)] = os.path.join(d, name)
        return out

    preds, gts = scan(pred_dir), scan(gt_dir)
    common = sorted(set(preds) & set(gts))
    if not common:
        raise LiversegError("no record ids shared by --pred-dir and --gt-dir")
    missing = sorted(set(preds) ^ set(gts))
    if missing:
        print(f"skipping unmatched records: {', '.join(missing)}", file=sys.stderr)
    return [(rid, preds[rid], gts[rid]) for rid in common]


# --- schedule-sim -------------------------------------------------------------

def _add_schedule_sim(sub):
    p = sub.add_parser("schedule-sim", help="simulate an LR schedule over a loss trace")
    p.add_argument("--scheduler", choices=("onecycle", "plateau"), required=True)
    p.add_argument("--config", metavar="FILE", help="key=value scheduler settings")
    p.add_argument("--losses", metavar="CSV",
                   help="loss trace; one value per line or CSV with val_loss column")
    p.add_argument("--out", metavar="CSV", help="trajectory file (default stdout)")
    p.add_argument("--epochs", type=int, help="epochs to simulate (default 75)")
    p.add_argument("--epochs-stop", type=int,
                   help="enable early stopping with this patience")
    # one-cycle settings
    p.add_argument("--max-lr", type=float)
    p.add_argument("--steps-per-epoch", type=int)
    p.add_argument("--pct-start", type=float)
    p.add_argument("--anneal", choices=("cosine", "linear"))
    p.add_argument("--div-factor", type=float)
    p.add_argument("--final-div-factor", type=float)
    # plateau settings
    p.add_argument("--initial-lr", type=float)
    p.add_argument("--lr-factor", type=float)
    p.add_argument("--epochs-patience", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-lr", type=float)
    p.set_defaults(func=_run_schedule_sim)


_ONECYCLE_KEYS = {
    "max_lr": float, "total_epochs": int, "steps_per_epoch": int,
    "pct_start": float, "anneal": str, "div_factor": float,
    "final_div_factor": float,
}
_PLATEAU_KEYS = {
    "initial_lr": float, "factor": float, "epochs_patience": int,
    "threshold": float, "min_lr": float,
}


def _scheduler_config(args):
    keys = _ONECYCLE_KEYS if args.scheduler == "onecycle" else _PLATEAU_KEYS
    settings: dict = {}
    if args.config:
        for key, text in read_keyvalues(args.config).items():
            if key == "epochs_stop":
                if args.epochs_stop is None:
                    args.epochs_stop = int(text)
                continue
            if key not in keys:
                raise LiversegError(f"unknown {args.scheduler} setting {key!r}")
            settings[key] = keys[key](text)
    flag_map = {
        "max_lr": args.max_lr, "total_epochs": args.epochs,
        "steps_per_epoch": args.steps_per_epoch, "pct_start": args.pct_start,
        "anneal": args.anneal, "div_factor": args.div_factor,
        "final_div_factor": args.final_div_factor,
        "initial_lr": args.initial_lr, "factor": args.lr_factor,
        "epochs_patience": args.epochs_patience, "threshold": args.threshold,
        "min_lr": args.min_lr,
    }
    for key in keys:
        if flag_map.get(key) is not None:
            settings[key] = flag_map[key]
    try:
        if args.scheduler == "onecycle":
            if "max_lr" not in settings:
                raise LiversegError("onecycle needs --max-lr")
            return OneCycleConfig(**settings)
        if "initial_lr" not in settings:
            raise LiversegError("plateau needs --initial-lr")
        return PlateauConfig(**settings)
    except ValueError as exc:
        raise LiversegError(str(exc)) from exc


def read_losses(path):
    """Loss trace file: bare floats one per line, or CSV with val_loss column."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        return [], None
    header = [cell.strip().lower() for cell in rows[0]]
    if "val_loss" in header:
        vi = header.index("val_loss")
        ti = header.index("train_loss") if "train_loss" in header else None
        val = [float(row[vi]) for row in rows[1:]]
        train = None
        if ti is not None and all(row[ti].strip() for row in rows[1:]):
            train = [float(row[ti]) for row in rows[1:]]
        return val, train
    return [float(row[0]) for row in rows], None


def _run_schedule_sim(args) -> int:
    config = _scheduler_config(args)
    if args.losses:
        val_losses, train_losses = read_losses(args.losses)
    else:
        epochs = args.epochs or (config.total_epochs
                                 if isinstance(config, OneCycleConfig) else 75)
        val_losses, train_losses = [1.0] * epochs, None
    early = EarlyStopConfig(args.epochs_stop) if args.epochs_stop else None
    trajectory = simulate_schedule(config, val_losses, early=early,
                                   train_losses=train_losses)
    if args.out:
        experiment.write_convergence_log(trajectory, args.out)
        print(args.out)
    else:
        _write_trajectory_stdout(trajectory)
    return 0


def _write_trajectory_stdout(trajectory):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(experiment.CONVERGENCE_HEADER)
    for row in trajectory:
        writer.writerow([
            row.epoch,
            repr(float(row.lr)),
            "" if row.train_loss is None else repr(float(row.train_loss)),
            repr(float(row.val_loss)),
            int(row.stopped),
        ])


# --- splits -------------------------------------------------------------------

def _add_splits(sub):
    p = sub.add_parser("splits", help="write k-fold cross-validation splits")
    p.add_argument("--ids", required=True, metavar="FILE", help="one record id per line")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=_run_splits)


def _run_splits(args) -> int:
    with open(args.ids, encoding="utf-8") as fh:
        ids = [line.strip() for line in fh if line.strip()]
    folds = experiment.kfold_split(ids, k=args.k, seed=args.seed)
    for path in experiment.write_fold_specs(folds, args.out):
        print(path)
    return 0


# --- mesh ---------------------------------------------------------------------

def _add_mesh(sub):
    p = sub.add_parser("mesh", help="marching-cubes OBJ export of a label mask")
    p.add_argument("--mask", required=True, metavar="MASK.nii[.gz]")
    p.add_argument("--out", required=True, metavar="MESH.obj")
    p.add_argument("--mtl", metavar="MESH.mtl")
    p.add_argument("--label", type=int, action="append",
                   help="label to mesh (repeatable; default: all nonzero)")
    p.add_argument("--level", type=float, default=0.5)
    p.set_defaults(func=_run_mesh)


def _run_mesh(args) -> int:
    mask = volume_io.read_labels(args.mask)
    if args.label:
        meshes = [mesh_export.marching_cubes(mask, label=lab, level=args.level)
                  for lab in args.label]
    else:
        meshes = mesh_export.mesh_all_labels(mask, level=args.level)
        if not meshes:
            raise LiversegError("mask has no nonzero labels to mesh")
    mesh_export.export_obj(meshes, args.out, args.mtl)
    print(args.out)
    total = sum(len(m.triangles) for m in meshes)
    print(f"{len(meshes)} mesh(es), {total} triangles", file=sys.stderr)
    return 0


# --- aggregate ----------------------------------------------------------------

def _add_aggregate(sub):
    p = sub.add_parser("aggregate", help="mean (std) table row from fold summaries")
    p.add_argument("--reports", required=True, metavar="DIR",
                   help="directory of per-fold JSON summaries")
    p.add_argument("--row-label", default="run")
    p.set_defaults(func=_run_aggregate)


def _run_aggregate(args) -> int:
    files = sorted(
        os.path.join(args.reports, name)
        for name in os.listdir(args.reports)
        if name.endswith(".json"))
    if not files:
        raise LiversegError(f"no .json fold summaries in {args.reports}")
    reports, epochs = [], []
    for path in files:
        with open(path, encoding="utf-8") as fh:
            blob = json.load(fh)
        reports.append(MetricReport(
            record_id=str(blob.get("record_id", "")),
            dice_pct=blob["dice_pct"], iou_pct=blob["iou_pct"], rvd=blob["rvd"],
            asd_mm=blob.get("asd_mm"), rmsd_mm=blob.get("rmsd_mm"),
            msd_mm=blob.get("msd_mm"), hd95_mm=blob.get("hd95_mm")))
        epochs.append(int(blob["epochs"]))
    row = experiment.aggregate(reports, epochs)
    sys.stdout.write(experiment.render_table([(args.row_label, row)]))
    return 0


# --- driver -------------------------------------------------------------------

class UsageError(Exception):
    """Flag combination error that should exit with status 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liverseg",
        description="liver segmentation study toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_preprocess(sub)
    _add_evaluate(sub)
    _add_schedule_sim(sub)
    _add_splits(sub)
    _add_mesh(sub)
    _add_aggregate(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except LiversegError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IoFailure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
