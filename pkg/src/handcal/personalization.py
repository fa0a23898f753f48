"""Subject shape calibration from multiple per-image predictions.

Confidences are turned into attention weights by a temperature softmax; a
single shared shape vector is then fit so that, for every record's predicted
pose, the mesh it produces matches the mesh of that record's predicted shape.
The objective is the weighted sum of squared Frobenius vertex differences.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveTemperature
from .fit import adam_minimize
from .hand_model import NUM_SHAPE, HandParams, forward

DEFAULT_TEMPERATURE = 0.33
SOLVE_STAGES = ((300, 1e-2), (100, 1e-3), (200, 1e-4))
STEP_TOL = 1e-8


@dataclass(frozen=True)
class SubjectBundle:
    shape_hats: np.ndarray   # K x 10
    pose_hats: np.ndarray    # K x 16 x 6
    confidences: np.ndarray | None = None  # K or None

    def __post_init__(self):
        object.__setattr__(self, "shape_hats", np.asarray(self.shape_hats, dtype=float))
        object.__setattr__(self, "pose_hats", np.asarray(self.pose_hats, dtype=float))
        if self.confidences is not None:
            object.__setattr__(self, "confidences", np.asarray(self.confidences, dtype=float))
        if len(self.shape_hats) < 1:
            raise ValueError("bundle needs at least one record")

    def __len__(self):
        return len(self.shape_hats)


@dataclass(frozen=True)
class CalibrationResult:
    shape_tilde: np.ndarray
    weights: np.ndarray
    objective_final: float
    iterations: int


def attention_weights(confidences, temperature=DEFAULT_TEMPERATURE):
    """Temperature softmax over confidences, max-subtracted for overflow safety."""
    if temperature <= 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature}")
    c = np.asarray(confidences, dtype=float) / temperature
    e = np.exp(c - c.max())
    return e / e.sum()


def _mesh_of(model, shape, pose):
    return forward(model, HandParams(shape=shape, pose=pose, root=np.zeros(3)))[0].vertices


def _affine_maps(model, pose):
    """Vertices are affine in shape for a fixed pose (rotations depend only on
    the pose; joint locations and blendshape offsets are affine in shape), so
    probing the forward pass at the basis shapes gives the exact Jacobian."""
    b = _mesh_of(model, np.zeros(NUM_SHAPE), pose)
    cols = [_mesh_of(model, e, pose) - b for e in np.eye(NUM_SHAPE)]
    A = np.stack([c.reshape(-1) for c in cols], axis=1)  # (V*3) x 10
    return A, b.reshape(-1)


def calibrate_shape(bundle: SubjectBundle, model, mode="attention",
                    temperature=DEFAULT_TEMPERATURE) -> CalibrationResult:
    """Solve the weighted shared-shape problem with Adam.

    mode "attention" weights records by the softmax of their confidences at
    the given temperature; mode "uniform" gives every record weight 1/K.
    """
    K = len(bundle)
    if mode == "uniform":
        weights = np.full(K, 1.0 / K)
    elif mode == "attention":
        if bundle.confidences is None:
            raise ValueError("attention mode requires confidences")
        weights = attention_weights(bundle.confidences, temperature)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    targets = [_mesh_of(model, bundle.shape_hats[k], bundle.pose_hats[k]).reshape(-1)
               for k in range(K)]
    maps = [_affine_maps(model, bundle.pose_hats[k]) for k in range(K)]

    def fun_grad(beta):
        f = 0.0
        g = np.zeros(NUM_SHAPE)
        for w, (A, b), t in zip(weights, maps, targets):
            r = A @ beta + b - t
            f += w * float(r @ r)
            g += 2.0 * w * (A.T @ r)
        return f, g

    x = weights @ bundle.shape_hats
    iterations = 0
    for iters, lr in SOLVE_STAGES:
        res = adam_minimize(fun_grad, x, iters, lr, step_tol=STEP_TOL)
        x = res.x_best
        iterations += max(len(res.trace) - 1, 0)
    return CalibrationResult(shape_tilde=x, weights=weights,
                             objective_final=fun_grad(x)[0], iterations=iterations)


def ranking_pairs(confidences, shape_errors, margin=0.0):
    """Total margin ranking loss over all unordered pairs.

    Lower shape error should receive higher confidence; tied errors are skipped.
    """
    c = np.asarray(confidences, dtype=float)
    l = np.asarray(shape_errors, dtype=float)
    if len(c) < 2:
        raise ValueError("need at least two records")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    total = 0.0
    n = len(c)
    for i in range(n):
        for j in range(i + 1, n):
            if l[i] == l[j]:
                continue
            y = 1.0 if l[i] < l[j] else -1.0
            total += max(0.0, -y * (c[i] - c[j]) + margin)
    return float(total)
