import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation as ScipyRotation

from conftest import random_rotation
from handcal.errors import DegenerateRot6d, NotARotation
from handcal.rotation import (IDENTITY_6D, axis_angle_to_matrix, compose_rot6d,
                              matrix_to_axis_angle, matrix_to_rot6d,
                              rot6d_to_matrix)

RZ90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def rz(deg):
    a = np.deg2rad(deg)
    return np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1.0]])


class TestRot6dToMatrix:
    def test_identity(self):
        np.testing.assert_allclose(rot6d_to_matrix([1, 0, 0, 0, 1, 0]), np.eye(3), atol=1e-15)

    def test_scale_invariance(self):
        np.testing.assert_allclose(rot6d_to_matrix([2, 0, 0, 0, 3, 0]), np.eye(3), atol=1e-15)

    def test_rz90(self):
        np.testing.assert_allclose(rot6d_to_matrix([0, 1, 0, -1, 0, 0]), RZ90, atol=1e-15)

    def test_degenerate_first_column(self):
        with pytest.raises(DegenerateRot6d):
            rot6d_to_matrix([0, 0, 0, 0, 1, 0])

    def test_degenerate_parallel_columns(self):
        with pytest.raises(DegenerateRot6d):
            rot6d_to_matrix([1, 0, 0, 2, 0, 0])

    def test_output_orthonormal_for_skewed_input(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = rng.standard_normal(6) * rng.uniform(0.1, 10)
            try:
                R = rot6d_to_matrix(a)
            except DegenerateRot6d:
                continue
            assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-6
            assert abs(np.linalg.det(R) - 1.0) < 1e-6


class TestMatrixToRot6d:
    def test_identity(self):
        np.testing.assert_allclose(matrix_to_rot6d(np.eye(3)), IDENTITY_6D)

    def test_rz90(self):
        np.testing.assert_allclose(matrix_to_rot6d(RZ90), [0, 1, 0, -1, 0, 0], atol=1e-15)

    def test_round_trip_1000_random(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            R = random_rotation(rng)
            np.testing.assert_allclose(rot6d_to_matrix(matrix_to_rot6d(R)), R, atol=1e-9)

    def test_rejects_non_rotation(self):
        with pytest.raises(NotARotation):
            matrix_to_rot6d(2 * np.eye(3))
        with pytest.raises(NotARotation):
            matrix_to_rot6d(np.diag([1.0, 1.0, -1.0]))  # det -1


class TestComposeRot6d:
    def test_identity_neutral(self):
        rng = np.random.default_rng(1)
        a = matrix_to_rot6d(random_rotation(rng))
        np.testing.assert_allclose(compose_rot6d(a, IDENTITY_6D), a, atol=1e-12)
        np.testing.assert_allclose(compose_rot6d(IDENTITY_6D, a), a, atol=1e-12)

    def test_planar_composition(self):
        a = matrix_to_rot6d(rz(30))
        b = matrix_to_rot6d(rz(60))
        np.testing.assert_allclose(compose_rot6d(a, b), [0, 1, 0, -1, 0, 0], atol=1e-12)

    def test_matches_matrix_product(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            Ra, Rb = random_rotation(rng), random_rotation(rng)
            got = rot6d_to_matrix(compose_rot6d(matrix_to_rot6d(Ra), matrix_to_rot6d(Rb)))
            np.testing.assert_allclose(got, Ra @ Rb, atol=1e-9)

    def test_associative(self):
        rng = np.random.default_rng(4)
        a, b, c = (matrix_to_rot6d(random_rotation(rng)) for _ in range(3))
        left = compose_rot6d(compose_rot6d(a, b), c)
        right = compose_rot6d(a, compose_rot6d(b, c))
        np.testing.assert_allclose(left, right, atol=1e-9)


class TestAxisAngle:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(axis_angle_to_matrix([0, 0, 0]), np.eye(3))

    def test_rz90(self):
        np.testing.assert_allclose(axis_angle_to_matrix([0, 0, np.pi / 2]), RZ90, atol=1e-15)

    def test_half_turn_x(self):
        np.testing.assert_allclose(axis_angle_to_matrix([np.pi, 0, 0]),
                                   np.diag([1.0, -1.0, -1.0]), atol=1e-15)

    def test_matches_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = rng.standard_normal(3)
            np.testing.assert_allclose(axis_angle_to_matrix(v),
                                       ScipyRotation.from_rotvec(v).as_matrix(), atol=1e-12)

    def test_extract_identity(self):
        np.testing.assert_allclose(matrix_to_axis_angle(np.eye(3)), [0, 0, 0])

    def test_extract_rz90(self):
        np.testing.assert_allclose(matrix_to_axis_angle(RZ90), [0, 0, np.pi / 2], atol=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            R = random_rotation(rng)
            v = matrix_to_axis_angle(R)
            assert np.linalg.norm(v) <= np.pi + 1e-12
            np.testing.assert_allclose(axis_angle_to_matrix(v), R, atol=1e-7)

    def test_near_pi_sign_convention(self):
        v = matrix_to_axis_angle(np.diag([-1.0, 1.0, -1.0]))  # pi about y
        np.testing.assert_allclose(v, [0, np.pi, 0], atol=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_rot6d_output_valid_or_degenerate_error(vals):
    a = np.asarray(vals)
    try:
        R = rot6d_to_matrix(a)
    except DegenerateRot6d:
        return
    assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-6
    assert abs(np.linalg.det(R) - 1.0) < 1e-6


def test_continuity_of_rot6d():
    rng = np.random.default_rng(7)
    for _ in range(100):
        R = random_rotation(rng)
        a = matrix_to_rot6d(R)  # Gram-Schmidt condition ~1 here
        delta = rng.standard_normal(6)
        delta *= 1e-6 / np.linalg.norm(delta)
        diff = np.linalg.norm(rot6d_to_matrix(a + delta) - rot6d_to_matrix(a))
        assert diff < 1e-4
