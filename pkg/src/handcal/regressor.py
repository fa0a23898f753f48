"""Forward passes of the parameter heads with loaded weights.

Covers the iterative 6D pose regressor, the baseline shape head and the
one-layer confidence head. Weights are data loaded from JSON; no training
happens here. MLP input for the pose regressor is cat(feature, pose).
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SchemaError
from .hand_model import NUM_JOINTS
from .rotation import IDENTITY_6D, compose_rot6d

POSE_DIM = NUM_JOINTS * 6  # 96
DEFAULT_POSE_ITERS = 3


@dataclass(frozen=True)
class MlpWeights:
    layers: tuple  # of (weight out x in, bias out, activation in {"relu", "none"})
    feature_length: int

    def __post_init__(self):
        if not self.layers:
            raise SchemaError("MLP needs at least one layer")
        prev_out = None
        for i, (W, b, act) in enumerate(self.layers):
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise SchemaError(f"layer {i}: weight/bias shapes inconsistent")
            if act not in ("relu", "none"):
                raise SchemaError(f"layer {i}: unknown activation {act!r}")
            if prev_out is not None and W.shape[1] != prev_out:
                raise SchemaError(f"layer {i}: input dim {W.shape[1]} != previous output {prev_out}")
            prev_out = W.shape[0]
        if self.layers[-1][2] != "none":
            raise SchemaError("final layer activation must be 'none'")

    @property
    def in_dim(self):
        return self.layers[0][0].shape[1]

    @property
    def out_dim(self):
        return self.layers[-1][0].shape[0]


def weights_from_dict(doc):
    if not isinstance(doc, dict) or "layers" not in doc:
        raise SchemaError("weight file must be an object with a 'layers' array")
    layers = []
    for i, layer in enumerate(doc["layers"]):
        try:
            rows, cols = int(layer["rows"]), int(layer["cols"])
            W = np.asarray(layer["weight"], dtype=float).reshape(rows, cols)
            b = np.asarray(layer["bias"], dtype=float)
            act = layer.get("activation", "none")
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"layer {i}: {e}") from e
        layers.append((W, b, act))
    return MlpWeights(layers=tuple(layers), feature_length=int(doc.get("feature_length", layers[0][0].shape[1])))


def weights_to_dict(w: MlpWeights):
    return {
        "format_version": 1,
        "feature_length": w.feature_length,
        "layers": [
            {"rows": W.shape[0], "cols": W.shape[1], "weight": W.reshape(-1).tolist(),
             "bias": b.tolist(), "activation": act}
            for W, b, act in w.layers
        ],
    }


def load_weights_file(path):
    with open(path) as f:
        return weights_from_dict(json.load(f))


def mlp_forward(w: MlpWeights, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (w.in_dim,):
        raise DimensionMismatch(f"input has {x.shape}, MLP expects ({w.in_dim},)")
    for W, b, act in w.layers:
        x = W @ x + b
        if act == "relu":
            x = np.maximum(x, 0.0)
    return x


def iterative_pose_regress(feat, w: MlpWeights, n_iter=DEFAULT_POSE_ITERS):
    """Predict pose increments and compose them joint-wise onto the estimate,
    starting from the all-identity 6D pose."""
    feat = np.asarray(feat, dtype=float)
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if w.in_dim != len(feat) + POSE_DIM or w.out_dim != POSE_DIM:
        raise DimensionMismatch(
            f"pose MLP must map {len(feat)}+{POSE_DIM} -> {POSE_DIM}, got {w.in_dim} -> {w.out_dim}")
    pose = np.tile(IDENTITY_6D, (NUM_JOINTS, 1))
    for _ in range(n_iter):
        delta = mlp_forward(w, np.concatenate([feat, pose.reshape(-1)])).reshape(NUM_JOINTS, 6)
        pose = np.stack([compose_rot6d(d, p) for d, p in zip(delta, pose)])
    return pose


def shape_regress(feat, w: MlpWeights):
    out = mlp_forward(w, feat)
    if out.shape != (10,):
        raise DimensionMismatch(f"shape MLP output has {out.shape}, expected (10,)")
    return out


def confidence_regress(feat, w: MlpWeights):
    out = mlp_forward(w, feat)
    if out.shape != (1,):
        raise DimensionMismatch(f"confidence head output has {out.shape}, expected (1,)")
    return float(out[0])
