"""Convert an official-layout MANO pickle into the handcal JSON model schema.

The official release stores, per hand:
    v_template   V x 3          rest vertices
    shapedirs    V x 3 x S      shape blendshapes (S >= 10; extra components
                                are truncated with a warning)
    posedirs     V x 3 x 135    pose-corrective blendshapes
    J_regressor  16 x V         joint regressor (often scipy sparse)
    weights      V x 16         skinning weights
    kintree_table 2 x 16        row 0 holds each joint's parent
    f            F x 3          triangle faces

The emitted JSON follows the handcal hand-model schema (format_version 1):
blendshapes are reindexed to leading-component layout (S x V x 3 and
135 x V x 3), sparse matrices are densified, and nothing is reordered.
Fingertip vertex indices are not part of the official asset and must be
supplied by the caller. The output records the sha256 of the source asset.
"""

import hashlib
import json
import pickle
import warnings

import numpy as np

NUM_JOINTS = 16
NUM_SHAPE = 10
FORMAT_VERSION = 1
ROW_SUM_TOL = 1e-6


class ConvertError(Exception):
    pass


class UnreadableAsset(ConvertError):
    pass


class SchemaEmitError(ConvertError):
    pass


def _dense(x, name):
    """Densify sparse matrices and strip array-like wrappers (e.g. chumpy)."""
    if hasattr(x, "toarray"):  # scipy sparse
        x = x.toarray()
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as e:
        raise UnreadableAsset(f"field '{name}' is not numeric: {e}") from e
    if not np.all(np.isfinite(a)):
        raise UnreadableAsset(f"field '{name}' contains non-finite values")
    return a


def load_asset(path):
    """Read an official-layout pickle; returns the raw dict."""
    try:
        with open(path, "rb") as f:
            data = pickle.load(f, encoding="latin1")
    except (OSError, pickle.UnpicklingError, EOFError, UnicodeDecodeError) as e:
        raise UnreadableAsset(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise UnreadableAsset(f"{path}: expected a dict, got {type(data).__name__}")
    missing = [k for k in ("v_template", "shapedirs", "posedirs", "J_regressor",
                           "weights", "kintree_table", "f") if k not in data]
    if missing:
        raise UnreadableAsset(f"{path}: missing fields {missing}")
    return data


def _parents(kintree_table):
    kt = np.asarray(kintree_table)
    if kt.shape != (2, NUM_JOINTS):
        raise UnreadableAsset(f"kintree_table: expected 2x{NUM_JOINTS}, got {kt.shape}")
    parents = kt[0].astype(np.int64)
    parents[0] = -1  # stored as a sentinel (2^32 - 1) in the official asset
    return parents


def convert_dict(data, fingertip_vertices, name="mano-right"):
    """Rearrange a loaded official-layout dict into the JSON schema layout."""
    template = _dense(data["v_template"], "v_template")
    if template.ndim != 2 or template.shape[1] != 3:
        raise UnreadableAsset(f"v_template: expected Vx3, got {template.shape}")
    V = template.shape[0]

    shapedirs = _dense(data["shapedirs"], "shapedirs")
    if shapedirs.shape[:2] != (V, 3) or shapedirs.ndim != 3:
        raise UnreadableAsset(f"shapedirs: expected {V}x3xS, got {shapedirs.shape}")
    S = shapedirs.shape[2]
    if S < NUM_SHAPE:
        raise UnreadableAsset(f"shapedirs: need >= {NUM_SHAPE} components, got {S}")
    if S > NUM_SHAPE:
        warnings.warn(f"shapedirs has {S} components; keeping the first {NUM_SHAPE}")
    shape_dirs = np.transpose(shapedirs[:, :, :NUM_SHAPE], (2, 0, 1))

    posedirs = _dense(data["posedirs"], "posedirs")
    if posedirs.shape != (V, 3, 9 * (NUM_JOINTS - 1)):
        raise UnreadableAsset(f"posedirs: expected {V}x3x135, got {posedirs.shape}")
    pose_dirs = np.transpose(posedirs, (2, 0, 1))

    joint_regressor = _dense(data["J_regressor"], "J_regressor")
    if joint_regressor.shape != (NUM_JOINTS, V):
        raise UnreadableAsset(f"J_regressor: expected {NUM_JOINTS}x{V}, got {joint_regressor.shape}")

    weights = _dense(data["weights"], "weights")
    if weights.shape != (V, NUM_JOINTS):
        raise UnreadableAsset(f"weights: expected {V}x{NUM_JOINTS}, got {weights.shape}")
    sums = weights.sum(axis=1)
    bad = np.where(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
    if bad.size:
        # no silent renormalization: a bad asset must fail loudly
        raise SchemaEmitError(
            f"weights: row {bad[0]} sums to {sums[bad[0]]:.8f}, expected 1")

    faces = np.asarray(data["f"], dtype=np.int64)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise UnreadableAsset(f"f: expected Fx3, got {faces.shape}")

    tips = np.asarray(fingertip_vertices, dtype=np.int64)
    if tips.shape != (5,):
        raise SchemaEmitError("fingertip_vertices: expected exactly 5 indices")
    if tips.min() < 0 or tips.max() >= V:
        raise SchemaEmitError(f"fingertip_vertices: index out of range [0, {V})")

    return {
        "format_version": FORMAT_VERSION,
        "name": name,
        "template": template.tolist(),
        "shape_dirs": shape_dirs.tolist(),
        "pose_dirs": pose_dirs.tolist(),
        "joint_regressor": joint_regressor.tolist(),
        "skin_weights": weights.tolist(),
        "parents": _parents(data["kintree_table"]).tolist(),
        "faces": faces.tolist(),
        "fingertip_vertices": tips.tolist(),
    }


def convert(asset_path, fingertip_vertices, out_path, name="mano-right"):
    """Convert the asset at asset_path and write the JSON model to out_path.

    Returns the emitted document (with the source checksum recorded).
    """
    data = load_asset(asset_path)
    doc = convert_dict(data, fingertip_vertices, name=name)
    with open(asset_path, "rb") as f:
        doc["source_sha256"] = hashlib.sha256(f.read()).hexdigest()
    try:
        with open(out_path, "w") as f:
            json.dump(doc, f)
    except (OSError, TypeError, ValueError) as e:
        raise SchemaEmitError(f"{out_path}: {e}") from e
    return doc
