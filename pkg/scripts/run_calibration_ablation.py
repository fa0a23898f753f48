#!/usr/bin/env python3
"""Calibration ablations on synthetic bundles.

Part 1: attention vs uniform weighting, paired over seeds (win rate and mean
shape-MSE improvement). Part 2: calibrated shape MSE as a function of the
number of images per subject.

Usage: python3 scripts/run_calibration_ablation.py --seeds 50
"""

import argparse

import numpy as np

from handcal.experiments import calibration_mse_pair, k_sweep
from handcal.hand_model import synth_toy_model


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--shape-noise", type=float, default=0.3)
    args = p.parse_args()

    model = synth_toy_model(seed=0)

    print(f"attention vs uniform, K={args.k}, {args.seeds} paired trials")
    att, uni = [], []
    for seed in range(args.seeds):
        a, u = calibration_mse_pair(seed, K=args.k,
                                    shape_noise=args.shape_noise, model=model)
        att.append(a)
        uni.append(u)
    att, uni = np.asarray(att), np.asarray(uni)
    wins = int((att < uni).sum())
    improvement = 100.0 * (1.0 - att.mean() / uni.mean())
    print(f"  attention mean MSE {att.mean():.5f}, uniform {uni.mean():.5f}")
    print(f"  attention wins {wins}/{args.seeds}; "
          f"mean MSE improvement {improvement:.1f}%")

    ks = (1, 5, 10, 20)
    print(f"\ncalibrated MSE vs images per subject, {args.seeds} seeds")
    table = k_sweep(range(args.seeds), Ks=ks, shape_noise=args.shape_noise,
                    model=model)
    for k in ks:
        print(f"  K={k:2d}: mean {table[k]['mean']:.5f} "
              f"+/- {table[k]['se']:.5f} (SE)")


if __name__ == "__main__":
    main()
