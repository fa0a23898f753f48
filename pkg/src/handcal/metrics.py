"""Evaluation metrics and loss functions.

Positions are meters internally; the position metrics report millimeters.
Root-relative means the wrist keypoint (index 0) is subtracted; MPJPE averages
over the 20 non-root joints.
"""

import numpy as np

from .camera import Keypoints2d
from .errors import DegenerateFace
from .hand_model import (INDEX_MCP_KP, MIDDLE_TIP_KP, RING_MCP_KP, WRIST_KP,
                         HandParams, keypoints3d)

M_TO_MM = 1000.0
NORM_LOSS_WEIGHT = 0.1


def mpjpe(pred, gt):
    """Root-relative mean per-joint position error in mm (20 non-root joints)."""
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    rel_pred = pred - pred[WRIST_KP]
    rel_gt = gt - gt[WRIST_KP]
    d = np.linalg.norm(rel_pred[1:] - rel_gt[1:], axis=1)
    return float(d.mean() * M_TO_MM)


def mpvpe(pred_vertices, gt_vertices, pred_root, gt_root):
    """Root-relative mean per-vertex position error in mm."""
    rel_pred = np.asarray(pred_vertices, dtype=float) - np.asarray(pred_root, dtype=float)
    rel_gt = np.asarray(gt_vertices, dtype=float) - np.asarray(gt_root, dtype=float)
    return float(np.linalg.norm(rel_pred - rel_gt, axis=1).mean() * M_TO_MM)


def shape_errors(beta_est, beta_gt, model):
    """MSE over shape coefficients plus flat-pose hand width/length errors (mm).

    Width: index-MCP to ring-MCP distance. Length: wrist to middle fingertip.
    Both measured at the flat pose (all rotations identity, zero root).
    """
    beta_est = np.asarray(beta_est, dtype=float)
    beta_gt = np.asarray(beta_gt, dtype=float)
    mse = float(np.mean((beta_est - beta_gt) ** 2))

    def width_length(beta):
        kp = keypoints3d(model, HandParams.rest(shape=beta))
        width = np.linalg.norm(kp[INDEX_MCP_KP] - kp[RING_MCP_KP])
        length = np.linalg.norm(kp[MIDDLE_TIP_KP] - kp[WRIST_KP])
        return width, length

    w_est, l_est = width_length(beta_est)
    w_gt, l_gt = width_length(beta_gt)
    return {
        "mse_mano": mse,
        "w_error_mm": float(abs(w_est - w_gt) * M_TO_MM),
        "l_error_mm": float(abs(l_est - l_gt) * M_TO_MM),
    }


def _face_normals(vertices, faces):
    v = vertices[faces]
    n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    lens = np.linalg.norm(n, axis=1)
    zero = np.where(lens < 1e-15)[0]
    if zero.size:
        raise DegenerateFace(int(zero[0]))
    return n / lens[:, None]


def mesh_losses(pred_vertices, gt_vertices, faces):
    """L1 vertex loss plus per-face-edge normal and edge-length losses.

    Face normals come from the ground-truth mesh (counterclockwise winding);
    each face contributes its 3 unordered vertex pairs.
    """
    pred = np.asarray(pred_vertices, dtype=float)
    gt = np.asarray(gt_vertices, dtype=float)
    faces = np.asarray(faces, dtype=int)
    l_mesh = float(np.abs(pred - gt).sum())

    normals = _face_normals(gt, faces)
    l_norm = 0.0
    l_edge = 0.0
    for (i, j) in ((0, 1), (1, 2), (0, 2)):
        e_pred = pred[faces[:, i]] - pred[faces[:, j]]
        e_gt = gt[faces[:, i]] - gt[faces[:, j]]
        pred_len = np.linalg.norm(e_pred, axis=1)
        gt_len = np.linalg.norm(e_gt, axis=1)
        unit = e_pred / np.maximum(pred_len, 1e-15)[:, None]
        l_norm += float(np.abs(np.einsum("fa,fa->f", unit, normals)).sum())
        l_edge += float(np.abs(pred_len - gt_len).sum())
    return {"l_mesh": l_mesh, "l_norm": l_norm, "l_edge": l_edge}


def param_losses(pose_hat, pose_gt, shape_hat, shape_gt):
    """L1 losses on the raw 96-dim 6D pose and the 10-dim shape vectors."""
    l_pose = float(np.abs(np.asarray(pose_hat, dtype=float) - np.asarray(pose_gt, dtype=float)).sum())
    l_shape = float(np.abs(np.asarray(shape_hat, dtype=float) - np.asarray(shape_gt, dtype=float)).sum())
    return {"l_pose": l_pose, "l_shape": l_shape}


def total_loss(parts, variant="baseline"):
    """Weighted sum of loss parts; the identity-aware variant drops the shape term."""
    total = parts["l_mesh"] + NORM_LOSS_WEIGHT * parts["l_norm"] + parts["l_edge"] + parts["l_pose"]
    if variant == "baseline":
        total += parts["l_shape"]
    elif variant != "identity_aware":
        raise ValueError(f"unknown variant {variant!r}")
    return float(total)


def heatmap_target(kp: Keypoints2d, height, width, sigma=2.0):
    """Per-keypoint Gaussian heatmaps with peak amplitude 1.

    Invisible or off-image keypoints produce an all-zero channel.
    """
    uu, vv = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    hm = np.zeros((len(kp.points), height, width))
    for k, (u, v) in enumerate(kp.points):
        if not kp.visible[k]:
            continue
        if not (0 <= round(u) < width and 0 <= round(v) < height):
            continue
        hm[k] = np.exp(-((uu - u) ** 2 + (vv - v) ** 2) / (2.0 * sigma ** 2))
    return hm


def heatmap_bce(pred, gt, clamp=1e-7):
    """Mean binary cross entropy over all channels and pixels."""
    pred = np.clip(np.asarray(pred, dtype=float), clamp, 1.0 - clamp)
    gt = np.asarray(gt, dtype=float)
    return float(-(gt * np.log(pred) + (1.0 - gt) * np.log(1.0 - pred)).mean())


def heatmap_decode(hm, threshold=0.1):
    """Argmax decode; ties break to the lowest (row, col); low peaks are invisible."""
    hm = np.asarray(hm, dtype=float)
    n, h, w = hm.shape
    points = np.zeros((n, 2))
    visible = np.zeros(n, dtype=bool)
    for k in range(n):
        flat = int(np.argmax(hm[k]))
        row, col = divmod(flat, w)
        peak = hm[k, row, col]
        points[k] = (col, row)
        visible[k] = peak >= threshold
    return Keypoints2d(points=points, visible=visible)
