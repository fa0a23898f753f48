"""Identity-aware hand mesh toolkit: parametric hand model, reprojection
fitting, subject shape calibration and evaluation metrics."""

from .camera import CameraIntrinsics, Keypoints2d, init_root, project
from .fit import FitConfig, FitResult, adam_minimize, energy, energy_grad, fit_two_stage
from .hand_model import (HandModel, HandParams, Mesh, forward, joint_locations,
                         keypoints3d, load_model, load_model_file,
                         save_model_file, shaped_template, synth_toy_model)
from .personalization import (CalibrationResult, SubjectBundle,
                              attention_weights, calibrate_shape, ranking_pairs)
from .rotation import (axis_angle_to_matrix, compose_rot6d, matrix_to_axis_angle,
                       matrix_to_rot6d, rot6d_to_matrix)

__version__ = "0.1.0"
