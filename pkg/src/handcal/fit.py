"""Optimization-augmented inference: two-stage reprojection fitting.

Stage 1 optimizes the root translation only; stage 2 optimizes pose and root
jointly. Shape is identity information and is never refit here. The energy is
the mean per-visible-keypoint pixel distance by default ("sumsq" switches to
the sum of squared residuals).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .camera import init_root, project
from .errors import InfeasibleStart
from .hand_model import HandParams, keypoints3d

MIN_VISIBLE = 4
_EPS2 = 1e-10  # same residual-norm smoothing as the autograd energy


@dataclass(frozen=True)
class FitConfig:
    stage1_iters: int = 200
    stage1_lr: float = 1e-2
    stage2_iters: int = 60
    stage2_lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    energy_mode: str = "mean"  # or "sumsq"

    def __post_init__(self):
        if self.stage1_iters < 0 or self.stage2_iters < 0:
            raise ValueError("iteration counts must be >= 0")
        if self.stage1_lr <= 0 or self.stage2_lr <= 0:
            raise ValueError("learning rates must be positive")


@dataclass(frozen=True)
class FitResult:
    params: HandParams
    energy_initial: float
    energy_final: float
    stage1_trace: list = field(default_factory=list)
    stage2_trace: list = field(default_factory=list)


def _pixel_residuals(params, x_d, model, cam):
    kp = keypoints3d(model, params)[x_d.visible]
    return project(kp, cam) - x_d.points[x_d.visible]


def energy(params, x_d, model, cam, mode="mean"):
    resid = _pixel_residuals(params, x_d, model, cam)
    sq = (resid ** 2).sum(axis=1)
    if mode == "sumsq":
        return float(sq.sum())
    return float(np.sqrt(sq).mean())


def _root_value_and_grad(root, kp_no_root, target, cam, mode):
    """Energy and gradient w.r.t. the root, with keypoints-minus-root fixed."""
    kp = kp_no_root + root
    z = kp[:, 2]
    u = cam.fx * kp[:, 0] / z + cam.cx
    v = cam.fy * kp[:, 1] / z + cam.cy
    resid = np.stack([u, v], axis=1) - target
    # d(u,v)/d(root): du = fx/z dx - fx x/z^2 dz, dv likewise in y
    du = np.stack([cam.fx / z, np.zeros_like(z), -cam.fx * kp[:, 0] / z ** 2], axis=1)
    dv = np.stack([np.zeros_like(z), cam.fy / z, -cam.fy * kp[:, 1] / z ** 2], axis=1)
    sq = (resid ** 2).sum(axis=1)
    if mode == "sumsq":
        grad = 2.0 * (resid[:, 0:1] * du + resid[:, 1:2] * dv).sum(axis=0)
        return float(sq.sum()), grad
    dist = np.sqrt(sq + _EPS2)
    grad = ((resid[:, 0:1] * du + resid[:, 1:2] * dv) / dist[:, None]).mean(axis=0)
    return float(dist.mean()), grad


def energy_grad(params, x_d, model, cam, wrt="root+pose", mode="mean"):
    """Gradient of the energy w.r.t. the selected parameter block.

    wrt="root": analytic, returns (3,). wrt="root+pose": autograd through the
    differentiable keypoint forward, returns (99,) = 96 pose 6D coords + root.
    Behind-camera points raise before any value is computed.
    """
    vis = x_d.visible
    kp = keypoints3d(model, params)[vis]
    project(kp, cam)  # raises BehindCamera consistently with energy()
    if wrt == "root":
        _, g = _root_value_and_grad(params.root, kp - params.root, x_d.points[vis], cam, mode)
        return g
    if wrt != "root+pose":
        raise ValueError(f"unknown wrt {wrt!r}")
    from ._torch_energy import TorchEnergy
    te = TorchEnergy(model, params.shape, x_d, cam, mode=mode)
    x = np.concatenate([params.pose.reshape(-1), params.root])
    _, g = te.value_and_grad(x)
    return g


@dataclass(frozen=True)
class AdamResult:
    x: np.ndarray
    x_best: np.ndarray
    f_best: float
    trace: np.ndarray  # objective value per iteration (before each step)


def adam_minimize(fun_grad, x0, iters, lr, betas=(0.9, 0.999), eps=1e-8,
                  step_tol=0.0):
    """Bias-corrected Adam on a deterministic objective.

    fun_grad maps x -> (value, gradient). iters == 0 returns x0 untouched.
    If step_tol > 0, stops early once the update norm drops below it.
    """
    x = np.asarray(x0, dtype=float).copy()
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    b1, b2 = betas
    trace = []
    x_best = x.copy()
    f_best = np.inf
    for t in range(1, iters + 1):
        f, g = fun_grad(x)
        trace.append(f)
        if f < f_best:
            f_best = f
            x_best = x.copy()
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g ** 2
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        step = lr * m_hat / (np.sqrt(v_hat) + eps)
        x = x - step
        if step_tol > 0 and np.linalg.norm(step) < step_tol:
            break
    if iters > 0:
        f_final = fun_grad(x)[0]
        trace.append(f_final)
        if f_final < f_best:
            f_best = f_final
            x_best = x.copy()
    return AdamResult(x=x, x_best=x_best, f_best=f_best, trace=np.asarray(trace))


def fit_two_stage(init: HandParams, x_d, model, cam, cfg: FitConfig = None) -> FitResult:
    cfg = cfg or FitConfig()
    if int(x_d.visible.sum()) < MIN_VISIBLE:
        raise InfeasibleStart(f"only {int(x_d.visible.sum())} visible keypoints, need {MIN_VISIBLE}")
    if init.root is None:
        init = replace(init, root=init_root(x_d, model, init.shape, cam))
    e0 = energy(init, x_d, model, cam, mode=cfg.energy_mode)
    if not np.isfinite(e0):
        raise InfeasibleStart(f"non-finite energy {e0} at the initial parameters")

    betas = (cfg.adam_beta1, cfg.adam_beta2)
    target = x_d.points[x_d.visible]

    # stage 1: root only; pose is untouched so keypoints-minus-root are constant
    kp_no_root = keypoints3d(model, init)[x_d.visible] - init.root
    res1 = adam_minimize(
        lambda r: _root_value_and_grad(r, kp_no_root, target, cam, cfg.energy_mode),
        init.root, cfg.stage1_iters, cfg.stage1_lr, betas=betas, eps=cfg.adam_eps)
    best_params = replace(init, root=res1.x_best) if res1.f_best <= e0 else init
    best_energy = min(e0, res1.f_best)
    stage2_start = replace(init, root=res1.x if cfg.stage1_iters > 0 else init.root)

    # stage 2: pose and root jointly, via autograd
    stage2_trace = []
    if cfg.stage2_iters > 0:
        from ._torch_energy import TorchEnergy
        te = TorchEnergy(model, init.shape, x_d, cam, mode=cfg.energy_mode)
        x0 = np.concatenate([stage2_start.pose.reshape(-1), stage2_start.root])
        res2 = adam_minimize(te.value_and_grad, x0, cfg.stage2_iters, cfg.stage2_lr,
                             betas=betas, eps=cfg.adam_eps)
        stage2_trace = list(res2.trace)
        if res2.f_best < best_energy:
            best_energy = res2.f_best
            best_params = replace(init, pose=res2.x_best[:96].reshape(16, 6),
                                  root=res2.x_best[96:])
    return FitResult(params=best_params, energy_initial=e0, energy_final=best_energy,
                     stage1_trace=list(res1.trace), stage2_trace=stage2_trace)
