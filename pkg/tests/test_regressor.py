import numpy as np
import pytest

from handcal.errors import DimensionMismatch, SchemaError
from handcal.regressor import (MlpWeights, confidence_regress,
                               iterative_pose_regress, mlp_forward,
                               shape_regress, weights_from_dict,
                               weights_to_dict)
from handcal.rotation import IDENTITY_6D, matrix_to_rot6d, rot6d_to_matrix, compose_rot6d


def mlp(*layers, feature_length=None):
    ls = tuple((np.asarray(W, dtype=float), np.asarray(b, dtype=float), act)
               for W, b, act in layers)
    return MlpWeights(layers=ls, feature_length=feature_length or ls[0][0].shape[1])


def random_mlp(rng, dims, scale=0.3):
    layers = []
    for i in range(len(dims) - 1):
        act = "relu" if i < len(dims) - 2 else "none"
        layers.append((scale * rng.standard_normal((dims[i + 1], dims[i])),
                       scale * rng.standard_normal(dims[i + 1]), act))
    return mlp(*layers)


def rz6d(deg):
    a = np.deg2rad(deg)
    R = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1.0]])
    return matrix_to_rot6d(R)


class TestMlpForward:
    def test_zero_weights_return_bias(self):
        w = mlp((np.zeros((4, 3)), [1, 2, 3, 4], "none"))
        np.testing.assert_allclose(mlp_forward(w, [9, 9, 9]), [1, 2, 3, 4])

    def test_identity_layer(self):
        w = mlp((np.eye(5), np.zeros(5), "none"))
        x = np.arange(5.0)
        np.testing.assert_allclose(mlp_forward(w, x), x)

    def test_two_layer_matches_matmul_oracle(self):
        rng = np.random.default_rng(0)
        w = random_mlp(rng, [7, 11, 4])
        x = rng.standard_normal(7)
        (W1, b1, _), (W2, b2, _) = w.layers
        expect = W2 @ np.maximum(W1 @ x + b1, 0.0) + b2
        np.testing.assert_allclose(mlp_forward(w, x), expect, atol=1e-9)

    def test_dimension_mismatch(self):
        w = mlp((np.eye(5), np.zeros(5), "none"))
        with pytest.raises(DimensionMismatch):
            mlp_forward(w, np.zeros(4))

    def test_schema_rejects_relu_final(self):
        with pytest.raises(SchemaError):
            mlp((np.eye(3), np.zeros(3), "relu"))

    def test_schema_rejects_dim_chain_break(self):
        with pytest.raises(SchemaError):
            mlp((np.eye(3), np.zeros(3), "relu"), (np.eye(4), np.zeros(4), "none"))

    def test_weight_file_round_trip(self):
        rng = np.random.default_rng(1)
        w = random_mlp(rng, [6, 8, 2])
        w2 = weights_from_dict(weights_to_dict(w))
        for (Wa, ba, aa), (Wb, bb, ab) in zip(w.layers, w2.layers):
            np.testing.assert_allclose(Wa, Wb)
            np.testing.assert_allclose(ba, bb)
            assert aa == ab


class TestIterativePoseRegress:
    N = 12

    def bias_mlp(self, bias96):
        return mlp((np.zeros((96, self.N + 96)), bias96, "none"))

    def test_identity_increment_fixed_point(self):
        bias = np.tile(IDENTITY_6D, 16)
        pose = iterative_pose_regress(np.zeros(self.N), self.bias_mlp(bias), n_iter=3)
        np.testing.assert_allclose(pose, np.tile(IDENTITY_6D, (16, 1)), atol=1e-12)

    def test_repeated_planar_composition(self):
        bias = np.tile(IDENTITY_6D, 16)
        bias[:6] = rz6d(30)
        pose = iterative_pose_regress(np.zeros(self.N), self.bias_mlp(bias), n_iter=3)
        np.testing.assert_allclose(pose[0], rz6d(90), atol=1e-9)
        np.testing.assert_allclose(pose[1:], np.tile(IDENTITY_6D, (15, 1)), atol=1e-12)

    def test_matches_unrolled_oracle(self):
        rng = np.random.default_rng(2)
        w = random_mlp(rng, [self.N + 96, 32, 96], scale=0.05)
        feat = rng.standard_normal(self.N)
        got = iterative_pose_regress(feat, w, n_iter=3)
        pose = np.tile(IDENTITY_6D, (16, 1))
        for _ in range(3):
            delta = mlp_forward(w, np.concatenate([feat, pose.reshape(-1)])).reshape(16, 6)
            pose = np.stack([compose_rot6d(d, p) for d, p in zip(delta, pose)])
        np.testing.assert_allclose(got, pose, atol=1e-12)

    def test_single_iteration(self):
        rng = np.random.default_rng(3)
        w = random_mlp(rng, [self.N + 96, 96], scale=0.05)
        feat = rng.standard_normal(self.N)
        got = iterative_pose_regress(feat, w, n_iter=1)
        theta0 = np.tile(IDENTITY_6D, (16, 1))
        delta = mlp_forward(w, np.concatenate([feat, theta0.reshape(-1)])).reshape(16, 6)
        expect = np.stack([compose_rot6d(d, p) for d, p in zip(delta, theta0)])
        np.testing.assert_array_equal(got, expect)

    def test_outputs_always_valid(self):
        rng = np.random.default_rng(4)
        w = random_mlp(rng, [self.N + 96, 24, 96], scale=0.1)
        pose = iterative_pose_regress(rng.standard_normal(self.N), w)
        for p in pose:
            R = rot6d_to_matrix(p)
            assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-9

    def test_wrong_input_size(self):
        w = self.bias_mlp(np.tile(IDENTITY_6D, 16))
        with pytest.raises(DimensionMismatch):
            iterative_pose_regress(np.zeros(self.N + 1), w)


class TestShapeRegress:
    def test_zero_weights_return_bias(self):
        b = np.linspace(-1, 1, 10)
        w = mlp((np.zeros((10, 6)), b, "none"))
        np.testing.assert_allclose(shape_regress(np.ones(6), w), b)

    def test_dimension_mismatch(self):
        w = mlp((np.zeros((9, 6)), np.zeros(9), "none"))
        with pytest.raises(DimensionMismatch):
            shape_regress(np.ones(6), w)

    def test_matches_matmul_oracle(self):
        rng = np.random.default_rng(5)
        w = random_mlp(rng, [8, 10])
        x = rng.standard_normal(8)
        W, b, _ = w.layers[0]
        np.testing.assert_allclose(shape_regress(x, w), W @ x + b, atol=1e-9)


def test_confidence_head_one_layer():
    rng = np.random.default_rng(6)
    W = rng.standard_normal((1, 5))
    b = rng.standard_normal(1)
    w = mlp((W, b, "none"))
    x = rng.standard_normal(5)
    assert confidence_regress(x, w) == pytest.approx(float((W @ x + b)[0]))
