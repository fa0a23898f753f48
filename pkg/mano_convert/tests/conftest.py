import pickle

import numpy as np
import pytest
import scipy.sparse
from handcal.hand_model import synth_toy_model


def official_layout(model, sparse_regressor=True, n_shape=10):
    """Rearrange a handcal model into the official pickle layout."""
    shapedirs = np.transpose(model.shape_dirs, (1, 2, 0))  # V x 3 x 10
    if n_shape > 10:
        extra = 0.001 * np.random.default_rng(0).standard_normal(
            (shapedirs.shape[0], 3, n_shape - 10))
        shapedirs = np.concatenate([shapedirs, extra], axis=2)
    J = scipy.sparse.csc_matrix(model.joint_regressor)
    kintree = np.zeros((2, 16), dtype=np.uint32)
    kintree[0] = np.where(model.parents < 0, np.uint32(2 ** 32 - 1), model.parents)
    kintree[1] = np.arange(16)
    return {
        "v_template": model.template,
        "shapedirs": shapedirs,
        "posedirs": np.transpose(model.pose_dirs, (1, 2, 0)),  # V x 3 x 135
        "J_regressor": J if sparse_regressor else model.joint_regressor,
        "weights": model.skin_weights,
        "kintree_table": kintree,
        "f": model.faces.astype(np.uint32),
    }


@pytest.fixture(scope="session")
def source_model():
    return synth_toy_model(seed=0, with_pose_dirs=True)


@pytest.fixture()
def asset_path(source_model, tmp_path):
    path = tmp_path / "asset.pkl"
    with open(path, "wb") as f:
        pickle.dump(official_layout(source_model), f)
    return path
