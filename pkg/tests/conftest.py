import numpy as np
import pytest

from handcal.hand_model import synth_toy_model


@pytest.fixture(scope="session")
def toy_model():
    return synth_toy_model(seed=0)


@pytest.fixture(scope="session")
def toy_model_posedirs():
    return synth_toy_model(seed=0, with_pose_dirs=True)


def random_rotation(rng):
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, np.pi)
    from handcal.rotation import axis_angle_to_matrix
    return axis_angle_to_matrix(axis * angle)
