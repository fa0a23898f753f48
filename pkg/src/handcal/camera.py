"""Pinhole projection and root-translation initialization.

Pixel coordinates: origin at top-left, x right, y down. No lens distortion;
intrinsics are per-record data.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BehindCamera, TooFewKeypoints
from .hand_model import MIDDLE_TIP_KP, WRIST_KP, HandParams, keypoints3d

Z_MIN = 1e-4


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class Keypoints2d:
    points: np.ndarray          # 21 x 2, pixels
    visible: np.ndarray = None  # 21 bools

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        vis = self.visible
        vis = np.ones(len(pts), dtype=bool) if vis is None else np.asarray(vis, dtype=bool)
        object.__setattr__(self, "visible", vis)


def project(points, cam: CameraIntrinsics, z_min=Z_MIN):
    """Perspective-project camera-space points (meters) to pixels."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    z = points[:, 2]
    bad = np.where(z <= z_min)[0]
    if bad.size:
        raise BehindCamera(int(bad[0]))
    u = cam.fx * points[:, 0] / z + cam.cx
    v = cam.fy * points[:, 1] / z + cam.cy
    return np.stack([u, v], axis=1)


def init_root(x_d: Keypoints2d, model, shape, cam: CameraIntrinsics):
    """Similar-triangles depth guess plus centroid back-projection.

    Depth from the rest-pose wrist-to-middle-tip length against its pixel
    extent (falling back to the max pairwise pixel distance when either
    endpoint is invisible); x/y place the rest keypoint centroid on the
    back-projected 2D centroid.
    """
    vis = x_d.visible
    if vis.sum() < 2:
        raise TooFewKeypoints(f"need >= 2 visible keypoints, got {int(vis.sum())}")
    rest_kp = keypoints3d(model, HandParams.rest(shape=shape))
    L_model = np.linalg.norm(rest_kp[MIDDLE_TIP_KP] - rest_kp[WRIST_KP])

    pts = x_d.points
    if vis[WRIST_KP] and vis[MIDDLE_TIP_KP]:
        L_px = np.linalg.norm(pts[MIDDLE_TIP_KP] - pts[WRIST_KP])
    else:
        visible_pts = pts[vis]
        diffs = visible_pts[:, None, :] - visible_pts[None, :, :]
        L_px = np.linalg.norm(diffs, axis=-1).max()
    if L_px < 1e-9:
        raise TooFewKeypoints("zero pixel extent")

    z_hat = cam.fx * L_model / L_px
    centroid_px = pts[vis].mean(axis=0)
    x_hat = (centroid_px[0] - cam.cx) * z_hat / cam.fx
    y_hat = (centroid_px[1] - cam.cy) * z_hat / cam.fy
    rest_centroid = rest_kp[vis].mean(axis=0)
    return np.array([x_hat, y_hat, z_hat]) - rest_centroid
