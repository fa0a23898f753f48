"""Reusable experiment drivers: fit recovery on perturbed synthetic records,
attention-vs-uniform calibration comparison, and the K-images sweep. Shared by
the scripts in scripts/ and the acceptance suite."""

import numpy as np

from .fit import FitConfig, fit_two_stage
from .hand_model import HandParams, synth_toy_model
from .personalization import SubjectBundle, calibrate_shape
from .synth import (DEFAULT_CAMERA, generate_dataset, perturb_pose,
                    random_pose, random_root)
from .camera import Keypoints2d, project
from .hand_model import keypoints3d


def fit_recovery_trial(seed, perturb_deg=5.0, perturb_root_m=0.02,
                       cfg: FitConfig = None, model=None, camera=DEFAULT_CAMERA):
    """Fit a noiseless synthetic record from a perturbed initialization.

    Returns (energy_initial, energy_final) in pixels.
    """
    rng = np.random.default_rng(seed)
    model = model or synth_toy_model(seed=0)
    shape = rng.normal(0.0, 0.5, size=10)
    pose = random_pose(rng)
    root = random_root(rng)
    gt = HandParams(shape=shape, pose=pose, root=root)
    x_d = Keypoints2d(points=project(keypoints3d(model, gt), camera))

    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    init = HandParams(shape=shape,
                      pose=perturb_pose(pose, rng, perturb_deg),
                      root=root + perturb_root_m * direction)
    result = fit_two_stage(init, x_d, model, camera, cfg or FitConfig())
    return result.energy_initial, result.energy_final


def calibration_mse_pair(seed, K=20, shape_noise=0.3, model=None):
    """One paired trial: calibrate the same bundle with attention and uniform
    weights; returns (mse_attention, mse_uniform) against the true shape."""
    model = model or synth_toy_model(seed=0)
    ds = generate_dataset(seed, n_subjects=1, records_per_subject=K,
                          shape_noise=shape_noise)
    shape_star = ds.records[0].shape_gt
    bundle = SubjectBundle(
        shape_hats=np.stack([r.shape_hat for r in ds.records]),
        pose_hats=np.stack([r.pose_hat for r in ds.records]),
        confidences=np.array([r.confidence for r in ds.records]),
    )
    att = calibrate_shape(bundle, model, mode="attention")
    uni = calibrate_shape(bundle, model, mode="uniform")
    mse = lambda b: float(np.mean((b - shape_star) ** 2))
    return mse(att.shape_tilde), mse(uni.shape_tilde)


def k_sweep(seeds, Ks=(1, 5, 10, 20), shape_noise=0.3, model=None):
    """Mean and standard error of calibrated shape MSE for each bundle size.

    Per seed, one pool of max(Ks) records is generated and each K uses its
    first K records, so the sweeps are paired across K.
    """
    model = model or synth_toy_model(seed=0)
    table = {K: [] for K in Ks}
    for seed in seeds:
        ds = generate_dataset(seed, n_subjects=1, records_per_subject=max(Ks),
                              shape_noise=shape_noise)
        shape_star = ds.records[0].shape_gt
        for K in Ks:
            recs = ds.records[:K]
            bundle = SubjectBundle(
                shape_hats=np.stack([r.shape_hat for r in recs]),
                pose_hats=np.stack([r.pose_hat for r in recs]),
                confidences=np.array([r.confidence for r in recs]),
            )
            res = calibrate_shape(bundle, model, mode="attention")
            table[K].append(float(np.mean((res.shape_tilde - shape_star) ** 2)))
    out = {}
    for K in Ks:
        vals = np.asarray(table[K])
        out[K] = {"mean": float(vals.mean()),
                  "se": float(vals.std(ddof=1) / np.sqrt(len(vals))),
                  "values": vals}
    return out
