"""6D rotation representation and axis-angle / matrix conversions.

A 6D rotation is the concatenation of the *first two columns* of a rotation
matrix (column convention). Gram-Schmidt re-orthonormalization makes the map
from raw 6 numbers to SO(3) well defined for any non-degenerate input.
"""

import numpy as np

from .errors import DegenerateRot6d, NotARotation

GS_EPS = 1e-8

IDENTITY_6D = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])


def rot6d_to_matrix(a, eps=GS_EPS):
    """Gram-Schmidt the two implied 3-vectors into a proper rotation matrix."""
    a = np.asarray(a, dtype=float)
    if a.shape != (6,) or not np.all(np.isfinite(a)):
        raise DegenerateRot6d(f"expected 6 finite values, got {a!r}")
    c1 = a[:3]
    n1 = np.linalg.norm(c1)
    if n1 < eps:
        raise DegenerateRot6d(f"first column norm {n1:.3g} below {eps:.3g}")
    b1 = c1 / n1
    c2 = a[3:]
    resid = c2 - np.dot(b1, c2) * b1
    n2 = np.linalg.norm(resid)
    if n2 < eps:
        raise DegenerateRot6d(f"second column residual {n2:.3g} below {eps:.3g}")
    b2 = resid / n2
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=1)


def check_rotation(R, tol=1e-6):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise NotARotation(f"expected finite 3x3 matrix, got shape {getattr(R, 'shape', None)}")
    err = np.linalg.norm(R.T @ R - np.eye(3))
    if err > tol:
        raise NotARotation(f"columns not orthonormal (|R^T R - I| = {err:.3g})")
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise NotARotation(f"det = {det:.9f}, not +1")
    return R


def matrix_to_rot6d(R):
    """First two columns of a (validated) rotation matrix, concatenated."""
    R = check_rotation(R)
    return np.concatenate([R[:, 0], R[:, 1]])


def compose_rot6d(delta, prev):
    """Apply the increment `delta` on top of `prev`: matrix product, back to 6D."""
    return matrix_to_rot6d(rot6d_to_matrix(delta) @ rot6d_to_matrix(prev))


def axis_angle_to_matrix(v):
    """Rodrigues formula; the zero vector maps to identity."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        return np.eye(3)
    axis = v / angle
    K = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def matrix_to_axis_angle(R):
    """Rodrigues vector with angle in [0, pi].

    At angle == pi the axis sign is ambiguous; we pick the axis whose first
    nonzero component is positive.
    """
    R = check_rotation(R)
    cos_angle = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos_angle)
    if angle < 1e-8:
        return np.zeros(3)
    if np.pi - angle > 1e-6:
        axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        axis /= 2.0 * np.sin(angle)
    else:
        # Near pi: R ~= 2 aa^T - I, read the axis off the symmetric part.
        M = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.clip(np.diag(M), 0.0, None))
        # Off-diagonals fix relative signs; anchor on the largest component.
        k = int(np.argmax(axis))
        for i in range(3):
            if i != k and axis[i] > 0:
                axis[i] *= np.sign(M[k, i]) or 1.0
        axis /= np.linalg.norm(axis)
        for c in axis:
            if abs(c) > 1e-12:
                if c < 0:
                    axis = -axis
                break
    return axis * angle
