"""Synthetic data generator: a desk-scale stand-in for datasets plus trained
networks. Produces a toy model, per-record ground truth, and noisy prediction
records whose confidences are anti-correlated with the injected shape error."""

from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, Keypoints2d, project
from .hand_model import HandParams, keypoints3d, synth_toy_model
from .records import PredictionRecord, RecordFile
from .rotation import axis_angle_to_matrix, matrix_to_rot6d, rot6d_to_matrix

# a 224x224 crop camera; the hand spans a realistic fraction of the image
DEFAULT_CAMERA = CameraIntrinsics(fx=240.0, fy=240.0, cx=112.0, cy=112.0)


@dataclass
class SynthDataset:
    model: object
    camera: CameraIntrinsics
    records: list        # PredictionRecord
    ground_truth: dict   # record_id -> {subject_id, shape, pose, root, keypoints_3d}


def random_pose(rng, max_joint_deg=25.0, max_global_deg=30.0):
    """Random valid 16-joint 6D pose with bounded joint angles."""
    pose = np.zeros((16, 6))
    for j in range(16):
        limit = np.deg2rad(max_global_deg if j == 0 else max_joint_deg)
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0.0, limit)
        pose[j] = matrix_to_rot6d(axis_angle_to_matrix(axis * angle))
    return pose


def random_root(rng):
    return np.array([rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                     rng.uniform(0.45, 0.70)])


def perturb_pose(pose, rng, degrees):
    """Compose a random-axis rotation of the given angle onto every joint."""
    out = np.zeros_like(pose)
    for j in range(len(pose)):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        delta = axis_angle_to_matrix(axis * np.deg2rad(degrees))
        out[j] = matrix_to_rot6d(delta @ rot6d_to_matrix(pose[j]))
    return out


def generate_dataset(seed, n_subjects=1, records_per_subject=5, noise_px=0.0,
                     shape_noise=0.0, camera=DEFAULT_CAMERA, v_per_segment=4,
                     rest_poses=False, quality_spread=0.75) -> SynthDataset:
    """quality_spread controls per-record noise-scale variation (a lognormal
    image-quality proxy, normalized so the mean squared scale is 1 and the
    mean per-record shape MSE stays ~= shape_noise^2); confidences are
    anti-correlated with the realized shape error."""
    rng = np.random.default_rng(seed)
    model = synth_toy_model(seed=seed, v_per_segment=v_per_segment)
    records = []
    ground_truth = {}
    for s in range(n_subjects):
        subject_id = f"s{s:03d}"
        shape_star = rng.normal(0.0, 0.5, size=10)
        for k in range(records_per_subject):
            record_id = f"{subject_id}-r{k:04d}"
            pose = (HandParams.rest().pose.copy() if rest_poses
                    else random_pose(rng))
            root = random_root(rng)
            params = HandParams(shape=shape_star, pose=pose, root=root)
            kp3d = keypoints3d(model, params)
            kp2d = project(kp3d, camera) + rng.normal(0.0, noise_px, size=(21, 2))
            scale = np.exp(rng.normal(-quality_spread ** 2, quality_spread))
            shape_hat = shape_star + rng.normal(0.0, shape_noise * scale, size=10)
            confidence = -float(np.abs(shape_hat - shape_star).sum()) + rng.normal(0.0, 0.05)
            records.append(PredictionRecord(
                record_id=record_id,
                subject_id=subject_id,
                shape_hat=shape_hat,
                pose_hat=pose.copy(),
                keypoints_2d=Keypoints2d(points=kp2d),
                root_hat=root.copy(),
                confidence=confidence,
                keypoints_3d_gt=kp3d,
                shape_gt=shape_star.copy(),
            ))
            ground_truth[record_id] = {
                "record_id": record_id,
                "subject_id": subject_id,
                "shape": shape_star.copy(),
                "pose": pose.copy(),
                "root": root.copy(),
                "keypoints_3d": kp3d,
            }
    return SynthDataset(model=model, camera=camera, records=records,
                        ground_truth=ground_truth)


def record_file(ds: SynthDataset) -> RecordFile:
    return RecordFile(camera=ds.camera, records=ds.records)
