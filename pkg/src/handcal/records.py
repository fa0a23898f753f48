"""JSON file schemas for prediction records, ground truth, fit and
calibration outputs. Everything is plain JSON for desk-scale inspectability;
meshes are referenced by path rather than inlined."""

import json
import sys
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, Keypoints2d
from .errors import SchemaError

FORMAT_VERSION = 1


@dataclass
class PredictionRecord:
    record_id: str
    subject_id: str
    shape_hat: np.ndarray       # 10
    pose_hat: np.ndarray        # 16 x 6
    keypoints_2d: Keypoints2d
    root_hat: np.ndarray | None = None
    confidence: float | None = None
    keypoints_3d_gt: np.ndarray | None = None
    shape_gt: np.ndarray | None = None
    mesh_gt: str | None = None  # path to a mesh JSON file


@dataclass
class RecordFile:
    camera: CameraIntrinsics
    records: list


def _arr(doc, key, shape, path, optional=False):
    if key not in doc or doc[key] is None:
        if optional:
            return None
        raise SchemaError(f"{path}: missing field '{key}'")
    try:
        a = np.asarray(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{path}.{key}: ill-typed")
    if shape is not None and a.shape != shape:
        raise SchemaError(f"{path}.{key}: expected shape {shape}, got {a.shape}")
    return a


def invocation():
    return " ".join(sys.argv)


def load_records(path) -> RecordFile:
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    cam_doc = doc.get("camera")
    if not isinstance(cam_doc, dict):
        raise SchemaError(f"{path}: missing camera intrinsics")
    cam = CameraIntrinsics(fx=float(cam_doc["fx"]), fy=float(cam_doc["fy"]),
                           cx=float(cam_doc["cx"]), cy=float(cam_doc["cy"]))
    records = []
    for i, r in enumerate(doc.get("records", [])):
        where = f"records[{i}]"
        kp = _arr(r, "keypoints_2d", (21, 2), where)
        vis = r.get("visibility")
        vis = None if vis is None else np.asarray(vis, dtype=bool)
        records.append(PredictionRecord(
            record_id=str(r.get("record_id", i)),
            subject_id=str(r.get("subject_id", "0")),
            shape_hat=_arr(r, "shape_hat", (10,), where),
            pose_hat=_arr(r, "pose_hat", (16, 6), where),
            keypoints_2d=Keypoints2d(points=kp, visible=vis),
            root_hat=_arr(r, "root_hat", (3,), where, optional=True),
            confidence=None if r.get("confidence") is None else float(r["confidence"]),
            keypoints_3d_gt=_arr(r, "keypoints_3d_gt", (21, 3), where, optional=True),
            shape_gt=_arr(r, "shape_gt", (10,), where, optional=True),
            mesh_gt=r.get("mesh_gt"),
        ))
    return RecordFile(camera=cam, records=records)


def save_records(rf: RecordFile, path):
    doc = {
        "format_version": FORMAT_VERSION,
        "invocation": invocation(),
        "camera": {"fx": rf.camera.fx, "fy": rf.camera.fy, "cx": rf.camera.cx, "cy": rf.camera.cy},
        "records": [],
    }
    for r in sorted(rf.records, key=lambda r: r.record_id):
        doc["records"].append({
            "record_id": r.record_id,
            "subject_id": r.subject_id,
            "shape_hat": r.shape_hat.tolist(),
            "pose_hat": np.asarray(r.pose_hat).tolist(),
            "keypoints_2d": r.keypoints_2d.points.tolist(),
            "visibility": r.keypoints_2d.visible.tolist(),
            "root_hat": None if r.root_hat is None else np.asarray(r.root_hat).tolist(),
            "confidence": r.confidence,
            "keypoints_3d_gt": None if r.keypoints_3d_gt is None else np.asarray(r.keypoints_3d_gt).tolist(),
            "shape_gt": None if r.shape_gt is None else np.asarray(r.shape_gt).tolist(),
            "mesh_gt": r.mesh_gt,
        })
    with open(path, "w") as f:
        json.dump(doc, f)


def save_ground_truth(path, camera: CameraIntrinsics, entries):
    """entries: list of dicts with record_id, subject_id, shape, pose, root,
    keypoints_3d (all array-like)."""
    doc = {
        "format_version": FORMAT_VERSION,
        "invocation": invocation(),
        "camera": {"fx": camera.fx, "fy": camera.fy, "cx": camera.cx, "cy": camera.cy},
        "records": [
            {
                "record_id": e["record_id"],
                "subject_id": e["subject_id"],
                "shape": np.asarray(e["shape"]).tolist(),
                "pose": np.asarray(e["pose"]).tolist(),
                "root": np.asarray(e["root"]).tolist(),
                "keypoints_3d": np.asarray(e["keypoints_3d"]).tolist(),
            }
            for e in sorted(entries, key=lambda e: e["record_id"])
        ],
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_ground_truth(path):
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    out = {}
    for i, e in enumerate(doc.get("records", [])):
        where = f"records[{i}]"
        out[str(e["record_id"])] = {
            "subject_id": str(e.get("subject_id", "0")),
            "shape": _arr(e, "shape", (10,), where),
            "pose": _arr(e, "pose", (16, 6), where),
            "root": _arr(e, "root", (3,), where),
            "keypoints_3d": _arr(e, "keypoints_3d", (21, 3), where),
        }
    return out


def save_fit_output(path, results):
    """results: list of dicts with record_id, subject_id, status, shape, pose,
    root, energy_initial, energy_final (params may be None on failure)."""
    doc = {
        "format_version": FORMAT_VERSION,
        "invocation": invocation(),
        "results": sorted(results, key=lambda r: r["record_id"]),
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_fit_output(path):
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    return doc["results"]


def save_calibration(path, subjects):
    """subjects: dict subject_id -> {shape_tilde, weights, objective_final, iterations}."""
    doc = {
        "format_version": FORMAT_VERSION,
        "invocation": invocation(),
        "subjects": {
            sid: {
                "shape_tilde": np.asarray(v["shape_tilde"]).tolist(),
                "weights": np.asarray(v["weights"]).tolist(),
                "objective_final": float(v["objective_final"]),
                "iterations": int(v["iterations"]),
            }
            for sid, v in sorted(subjects.items())
        },
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_calibration(path):
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    return {sid: {"shape_tilde": np.asarray(v["shape_tilde"], dtype=float),
                  "weights": np.asarray(v["weights"], dtype=float),
                  "objective_final": v["objective_final"],
                  "iterations": v["iterations"]}
            for sid, v in doc["subjects"].items()}


def save_mesh(path, vertices, faces):
    with open(path, "w") as f:
        json.dump({"format_version": FORMAT_VERSION,
                   "vertices": np.asarray(vertices).tolist(),
                   "faces": np.asarray(faces).tolist()}, f)


def load_mesh(path):
    with open(path) as f:
        doc = json.load(f)
    return np.asarray(doc["vertices"], dtype=float), np.asarray(doc["faces"], dtype=int)
