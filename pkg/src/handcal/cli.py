"""Command-line surface: synth, fit, calibrate, eval, model-info.

Exit codes: 0 ok, 1 usage/IO error, 2 partial failure (some records failed).
All outputs carry format_version and the exact invocation.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import records as rio
from .errors import HandcalError
from .fit import FitConfig, fit_two_stage
from .hand_model import HandParams, forward, load_model_file, save_model_file
from .metrics import mpjpe, mpvpe, shape_errors
from .personalization import SubjectBundle, calibrate_shape
from .synth import DEFAULT_CAMERA, generate_dataset, record_file


class CliError(Exception):
    pass


def _load_model(path):
    if not os.path.exists(path):
        raise CliError(f"model file not found: {path}")
    return load_model_file(path)


def _load_records(path):
    if not os.path.exists(path):
        raise CliError(f"records file not found: {path}")
    return rio.load_records(path)


def cmd_synth(args):
    os.makedirs(args.out_dir, exist_ok=True)
    ds = generate_dataset(args.seed, n_subjects=args.n_subjects,
                          records_per_subject=args.records_per_subject,
                          noise_px=args.noise_px, shape_noise=args.shape_noise,
                          v_per_segment=args.v_per_segment)
    save_model_file(ds.model, os.path.join(args.out_dir, "model.json"))
    rio.save_records(record_file(ds), os.path.join(args.out_dir, "records.json"))
    rio.save_ground_truth(os.path.join(args.out_dir, "ground_truth.json"),
                          ds.camera, list(ds.ground_truth.values()))
    print(f"wrote model.json, records.json, ground_truth.json to {args.out_dir}")
    return 0


def _fit_one(record, model, cam, cfg, shape_source, gt, calibration):
    if shape_source == "record":
        shape = record.shape_hat
    elif shape_source == "gt":
        entry = gt.get(record.record_id)
        if entry is None:
            raise CliError(f"record {record.record_id} has no ground truth entry")
        shape = entry["shape"]
    else:  # calibrated-file
        entry = calibration.get(record.subject_id)
        if entry is None:
            raise CliError(f"subject {record.subject_id} missing from calibration file")
        shape = entry["shape_tilde"]
    init = HandParams(shape=np.asarray(shape, dtype=float),
                      pose=record.pose_hat, root=record.root_hat)
    return fit_two_stage(init, record.keypoints_2d, model, cam, cfg)


def cmd_fit(args):
    model = _load_model(args.model)
    rf = _load_records(args.records)
    gt = calibration = None
    if args.shape_source == "gt":
        if not args.gt:
            raise CliError("--shape-source gt requires --gt")
        gt = rio.load_ground_truth(args.gt)
    if args.shape_source == "calibrated-file":
        if not args.calibration:
            raise CliError("--shape-source calibrated-file requires --calibration")
        calibration = rio.load_calibration(args.calibration)
    cfg = FitConfig(stage1_iters=args.stage1_iters, stage1_lr=args.stage1_lr,
                    stage2_iters=args.stage2_iters, stage2_lr=args.stage2_lr,
                    energy_mode=args.energy)

    def work(record):
        try:
            res = _fit_one(record, model, rf.camera, cfg, args.shape_source, gt, calibration)
            return {"record_id": record.record_id, "subject_id": record.subject_id,
                    "status": "ok",
                    "shape": res.params.shape.tolist(),
                    "pose": np.asarray(res.params.pose).tolist(),
                    "root": np.asarray(res.params.root).tolist(),
                    "energy_initial": res.energy_initial,
                    "energy_final": res.energy_final}
        except (HandcalError, CliError) as e:
            return {"record_id": record.record_id, "subject_id": record.subject_id,
                    "status": "failed", "error": str(e), "shape": None, "pose": None,
                    "root": None, "energy_initial": None, "energy_final": None}

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(work, rf.records))
    else:
        results = [work(r) for r in rf.records]
    rio.save_fit_output(args.out, results)
    failed = [r for r in results if r["status"] != "ok"]
    print(f"fit {len(results)} records, {len(failed)} failed -> {args.out}")
    for r in failed:
        print(f"  {r['record_id']}: {r['error']}", file=sys.stderr)
    return 2 if failed else 0


def cmd_calibrate(args):
    model = _load_model(args.model)
    rf = _load_records(args.records)
    mode = "uniform" if args.uniform else "attention"
    by_subject = {}
    for r in rf.records:
        by_subject.setdefault(r.subject_id, []).append(r)
    subjects = {}
    for sid, recs in sorted(by_subject.items()):
        confidences = [r.confidence for r in recs]
        if mode == "attention" and any(c is None for c in confidences):
            raise CliError(f"subject {sid}: confidence required for attention mode")
        bundle = SubjectBundle(
            shape_hats=np.stack([r.shape_hat for r in recs]),
            pose_hats=np.stack([r.pose_hat for r in recs]),
            confidences=None if mode == "uniform" else np.asarray(confidences, dtype=float),
        )
        res = calibrate_shape(bundle, model, mode=mode, temperature=args.temperature)
        subjects[sid] = {"shape_tilde": res.shape_tilde, "weights": res.weights,
                         "objective_final": res.objective_final,
                         "iterations": res.iterations}
    rio.save_calibration(args.out, subjects)
    print(f"calibrated {len(subjects)} subjects -> {args.out}")
    return 0


def cmd_eval(args):
    model = _load_model(args.model)
    if not os.path.exists(args.pred):
        raise CliError(f"prediction file not found: {args.pred}")
    if not os.path.exists(args.gt):
        raise CliError(f"ground-truth file not found: {args.gt}")
    preds = rio.load_fit_output(args.pred)
    gt = rio.load_ground_truth(args.gt)

    per_record = []
    for p in preds:
        if p["status"] != "ok":
            continue
        entry = gt.get(p["record_id"])
        if entry is None:
            continue
        params = HandParams(shape=np.asarray(p["shape"], dtype=float),
                            pose=np.asarray(p["pose"], dtype=float),
                            root=np.asarray(p["root"], dtype=float))
        mesh_pred, kp_pred = forward(model, params)
        gt_params = HandParams(shape=entry["shape"], pose=entry["pose"], root=entry["root"])
        mesh_gt, _ = forward(model, gt_params)
        row = {"record_id": p["record_id"],
               "mpjpe_mm": mpjpe(kp_pred, entry["keypoints_3d"]),
               "mpvpe_mm": mpvpe(mesh_pred.vertices, mesh_gt.vertices,
                                 kp_pred[0], entry["keypoints_3d"][0])}
        row.update(shape_errors(params.shape, entry["shape"], model))
        per_record.append(row)

    def agg(key):
        vals = [r[key] for r in per_record if r.get(key) is not None]
        return float(np.mean(vals)) if vals else None

    report = {"format_version": rio.FORMAT_VERSION,
              "invocation": rio.invocation(),
              "n_records": len(per_record),
              "mpjpe_mm": agg("mpjpe_mm"), "mpvpe_mm": agg("mpvpe_mm"),
              "mse_mano": agg("mse_mano"), "w_error_mm": agg("w_error_mm"),
              "l_error_mm": agg("l_error_mm"),
              "per_record": sorted(per_record, key=lambda r: r["record_id"])}
    with open(args.out, "w") as f:
        json.dump(report, f)
    print(f"evaluated {len(per_record)} records -> {args.out}")
    return 0


def cmd_model_info(args):
    model = _load_model(args.model)
    print(f"name: {model.name}")
    print(f"vertices: {model.num_vertices}")
    print(f"faces: {len(model.faces)}")
    print(f"joints: {len(model.parents)}")
    print(f"shape components: {model.shape_dirs.shape[0]}")
    print(f"pose blendshapes: {'yes' if model.pose_dirs is not None else 'no'}")
    print(f"fingertip vertices: {model.fingertip_vertices.tolist()}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="handcal",
                                description="Hand model fitting, calibration and evaluation over JSON files.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic model + records + ground truth")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-subjects", type=int, default=1)
    s.add_argument("--records-per-subject", type=int, default=5)
    s.add_argument("--noise-px", type=float, default=0.0)
    s.add_argument("--shape-noise", type=float, default=0.0)
    s.add_argument("--v-per-segment", type=int, default=4)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("fit", help="two-stage reprojection fit per record")
    f.add_argument("--model", required=True)
    f.add_argument("--records", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--gt")
    f.add_argument("--calibration")
    f.add_argument("--shape-source", choices=["gt", "calibrated-file", "record"], default="record")
    f.add_argument("--stage1-iters", type=int, default=200)
    f.add_argument("--stage1-lr", type=float, default=1e-2)
    f.add_argument("--stage2-iters", type=int, default=60)
    f.add_argument("--stage2-lr", type=float, default=1e-3)
    f.add_argument("--energy", choices=["mean", "sumsq"], default="mean")
    f.add_argument("--jobs", type=int, default=1)
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("calibrate", help="per-subject shape calibration")
    c.add_argument("--model", required=True)
    c.add_argument("--records", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--temperature", type=float, default=0.33)
    c.add_argument("--uniform", action="store_true")
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("eval", help="compute metrics against ground truth")
    e.add_argument("--model", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("model-info", help="print model summary")
    m.add_argument("--model", required=True)
    m.set_defaults(func=cmd_model_info)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, HandcalError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
