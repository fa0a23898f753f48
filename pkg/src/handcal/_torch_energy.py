"""Differentiable reprojection energy (torch double precision).

Mirrors the numpy forward pass for the 21 keypoints only: kinematic chain,
pose blendshapes restricted to the fingertip vertices, fingertip skinning,
pinhole projection. Used for autograd gradients of the energy with respect
to the raw 6D pose coordinates and the root translation.
"""

import numpy as np
import torch

from .hand_model import _JOINT_TO_KP, _TIP_KP, NUM_JOINTS, joint_locations, shaped_template

# Smoothing inside the sqrt of each residual norm: the unsquared distance is
# not differentiable at 0, so residuals below ~1e-5 px get a vanishing
# gradient instead of an arbitrary unit vector.
_EPS2 = 1e-10


def _rot6d_to_matrix_t(pose):
    # pose: J x 6 -> J x 3 x 3 (same Gram-Schmidt as rotation.rot6d_to_matrix)
    b1 = pose[:, :3] / torch.linalg.norm(pose[:, :3], dim=1, keepdim=True)
    c2 = pose[:, 3:]
    resid = c2 - (b1 * c2).sum(dim=1, keepdim=True) * b1
    b2 = resid / torch.linalg.norm(resid, dim=1, keepdim=True)
    b3 = torch.cross(b1, b2, dim=1)
    return torch.stack([b1, b2, b3], dim=2)


class TorchEnergy:
    """Reprojection energy for one record with fixed shape, 2D detections
    and intrinsics; callable on a flat (99,) vector of 96 pose + 3 root."""

    def __init__(self, model, shape, x_d, cam, mode="mean"):
        self.mode = mode
        self.cam = cam
        joints = joint_locations(model, shape)
        tips = model.fingertip_vertices
        self.joints = torch.tensor(joints)
        self.parents = model.parents
        self.tip_rest = torch.tensor(shaped_template(model, shape)[tips])
        self.tip_weights = torch.tensor(model.skin_weights[tips])  # 5 x 16
        self.tip_pose_dirs = (None if model.pose_dirs is None
                              else torch.tensor(model.pose_dirs[:, tips, :]))  # 135 x 5 x 3
        vis = x_d.visible
        self.vis_idx = torch.tensor(np.where(vis)[0])
        self.target = torch.tensor(x_d.points[vis])
        kp_order = np.zeros(21, dtype=int)
        kp_is_joint = np.zeros(21, dtype=bool)
        for j, kp in enumerate(_JOINT_TO_KP):
            kp_order[kp] = j
            kp_is_joint[kp] = True
        for f, kp in enumerate(_TIP_KP):
            kp_order[kp] = f
        self.joint_mask = torch.tensor(kp_is_joint)
        self.joint_order = torch.tensor(kp_order[kp_is_joint])
        self.tip_order = torch.tensor(kp_order[~kp_is_joint])

    def keypoints(self, x):
        pose = x[:96].reshape(NUM_JOINTS, 6)
        root = x[96:]
        R = _rot6d_to_matrix_t(pose)
        trans = [None] * NUM_JOINTS
        rots = [None] * NUM_JOINTS
        rots[0] = R[0]
        trans[0] = self.joints[0]
        for k in range(1, NUM_JOINTS):
            p = self.parents[k]
            rots[k] = rots[p] @ R[k]
            trans[k] = rots[p] @ (self.joints[k] - self.joints[p]) + trans[p]
        G_rot = torch.stack(rots)            # 16 x 3 x 3
        G_trans = torch.stack(trans)         # 16 x 3
        skin_trans = G_trans - torch.einsum("jab,jb->ja", G_rot, self.joints)

        tip_pts = self.tip_rest
        if self.tip_pose_dirs is not None:
            feat = (R[1:] - torch.eye(3, dtype=R.dtype)).reshape(-1)
            tip_pts = tip_pts + torch.einsum("p,pva->va", feat, self.tip_pose_dirs)
        rotated = torch.einsum("jab,vb->jva", G_rot, tip_pts) + skin_trans[:, None, :]
        tip_posed = torch.einsum("vj,jva->va", self.tip_weights, rotated)

        kp = torch.zeros((21, 3), dtype=x.dtype)
        kp[self.joint_mask] = G_trans[self.joint_order]
        kp[~self.joint_mask] = tip_posed[self.tip_order]
        return kp + root

    def __call__(self, x):
        kp = self.keypoints(x)[self.vis_idx]
        u = self.cam.fx * kp[:, 0] / kp[:, 2] + self.cam.cx
        v = self.cam.fy * kp[:, 1] / kp[:, 2] + self.cam.cy
        resid = torch.stack([u, v], dim=1) - self.target
        sq = (resid ** 2).sum(dim=1)
        if self.mode == "sumsq":
            return sq.sum()
        return torch.sqrt(sq + _EPS2).mean()

    def value_and_grad(self, x_np):
        x = torch.tensor(np.asarray(x_np, dtype=float), requires_grad=True)
        e = self(x)
        e.backward()
        return float(e.detach()), x.grad.numpy()
