"""MANO-compatible parametric hand model.

The model factors a hand mesh into shape coefficients (10 blendshape weights),
per-joint rotations (16 joints in 6D representation, joint 0 = global/wrist)
and a root translation. Forward evaluation runs shape blendshapes, optional
pose-corrective blendshapes, a rigid kinematic chain and linear blend skinning,
then extracts 21 keypoints (16 joint centers + 5 fingertip vertices).

Joint ordering convention (documented part of the model-file schema):
    0            wrist
    1 + 3f + s   finger f in (thumb, index, middle, ring, pinky),
                 segment s in (MCP, PIP, DIP)
21-keypoint ordering: wrist, then per finger MCP, PIP, DIP, tip.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, SchemaError
from .rotation import IDENTITY_6D, rot6d_to_matrix

NUM_JOINTS = 16
NUM_SHAPE = 10
NUM_KEYPOINTS = 21

FINGER_NAMES = ("thumb", "index", "middle", "ring", "pinky")

# keypoint index of each model joint under the convention above
_JOINT_TO_KP = [0] + [1 + 4 * f + s for f in range(5) for s in range(3)]
# keypoint index of each fingertip
_TIP_KP = [1 + 4 * f + 3 for f in range(5)]

WRIST_KP = 0
INDEX_MCP_KP = 1 + 4 * 1
RING_MCP_KP = 1 + 4 * 3
MIDDLE_TIP_KP = 1 + 4 * 2 + 3


@dataclass(frozen=True)
class HandModel:
    template: np.ndarray          # V x 3, meters
    shape_dirs: np.ndarray        # 10 x V x 3
    pose_dirs: np.ndarray | None  # 135 x V x 3 or None
    joint_regressor: np.ndarray   # 16 x V
    skin_weights: np.ndarray      # V x 16
    parents: np.ndarray           # 16, parents[0] == -1
    faces: np.ndarray             # F x 3
    fingertip_vertices: np.ndarray  # 5, (thumb, index, middle, ring, pinky)
    name: str = "hand"

    @property
    def num_vertices(self):
        return self.template.shape[0]


@dataclass(frozen=True)
class HandParams:
    shape: np.ndarray  # 10
    pose: np.ndarray   # 16 x 6
    root: np.ndarray   # 3, meters

    @staticmethod
    def rest(shape=None, root=None):
        return HandParams(
            shape=np.zeros(NUM_SHAPE) if shape is None else np.asarray(shape, dtype=float),
            pose=np.tile(IDENTITY_6D, (NUM_JOINTS, 1)),
            root=np.zeros(3) if root is None else np.asarray(root, dtype=float),
        )


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # V x 3
    faces: np.ndarray     # F x 3


def validate_model(m: HandModel):
    """Check every HandModel invariant; raise InvariantError naming the field."""
    V = m.template.shape[0]
    if m.template.shape != (V, 3):
        raise InvariantError(f"template: expected Vx3, got {m.template.shape}")
    if m.shape_dirs.shape != (NUM_SHAPE, V, 3):
        raise InvariantError(f"shape_dirs: expected {NUM_SHAPE}x{V}x3, got {m.shape_dirs.shape}")
    if m.pose_dirs is not None and m.pose_dirs.shape != (9 * (NUM_JOINTS - 1), V, 3):
        raise InvariantError(f"pose_dirs: expected 135x{V}x3, got {m.pose_dirs.shape}")
    if m.joint_regressor.shape != (NUM_JOINTS, V):
        raise InvariantError(f"joint_regressor: expected {NUM_JOINTS}x{V}, got {m.joint_regressor.shape}")
    if m.skin_weights.shape != (V, NUM_JOINTS):
        raise InvariantError(f"skin_weights: expected {V}x{NUM_JOINTS}, got {m.skin_weights.shape}")
    if np.any(m.skin_weights < 0):
        rows = np.where((m.skin_weights < 0).any(axis=1))[0]
        raise InvariantError(f"skin_weights: negative entries in row {rows[0]}")
    sums = m.skin_weights.sum(axis=1)
    bad = np.where(np.abs(sums - 1.0) > 1e-6)[0]
    if bad.size:
        raise InvariantError(f"skin_weights: row {bad[0]} sums to {sums[bad[0]]:.8f}, expected 1")
    if m.parents.shape != (NUM_JOINTS,) or m.parents[0] != -1:
        raise InvariantError("parents: expected 16 entries with parents[0] == -1")
    # a tree rooted at 0: each non-root parent must be a lower index already
    # reachable from the root (topological ordering rules out cycles)
    for j in range(1, NUM_JOINTS):
        p = m.parents[j]
        if not (0 <= p < j):
            raise InvariantError(f"parents: not a tree (joint {j} has parent {p})")
    if m.faces.ndim != 2 or m.faces.shape[1] != 3:
        raise InvariantError(f"faces: expected Fx3, got {m.faces.shape}")
    if m.faces.size and (m.faces.min() < 0 or m.faces.max() >= V):
        raise InvariantError("faces: vertex index out of range")
    for fi, face in enumerate(m.faces):
        if len(set(int(i) for i in face)) != 3:
            raise InvariantError(f"faces: face {fi} repeats a vertex index")
    if m.fingertip_vertices.shape != (5,):
        raise InvariantError("fingertip_vertices: expected 5 indices")
    if m.fingertip_vertices.min() < 0 or m.fingertip_vertices.max() >= V:
        raise InvariantError("fingertip_vertices: index out of range")
    for field in ("template", "shape_dirs", "joint_regressor", "skin_weights"):
        if not np.all(np.isfinite(getattr(m, field))):
            raise InvariantError(f"{field}: non-finite values")
    return m


def _require(doc, key, kind):
    if key not in doc:
        raise SchemaError(f"missing field '{key}'")
    try:
        if kind is str:
            if not isinstance(doc[key], str):
                raise TypeError
            return doc[key]
        return np.asarray(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"field '{key}' is ill-typed")


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("model file must be a JSON object")
    if doc.get("format_version") != 1:
        raise SchemaError(f"unsupported format_version {doc.get('format_version')!r}")
    pose_dirs = doc.get("pose_dirs")
    model = HandModel(
        template=_require(doc, "template", float),
        shape_dirs=_require(doc, "shape_dirs", float),
        pose_dirs=None if pose_dirs is None else np.asarray(pose_dirs, dtype=float),
        joint_regressor=_require(doc, "joint_regressor", float),
        skin_weights=_require(doc, "skin_weights", float),
        parents=np.asarray(_require(doc, "parents", float), dtype=int),
        faces=np.asarray(_require(doc, "faces", float), dtype=int),
        fingertip_vertices=np.asarray(_require(doc, "fingertip_vertices", float), dtype=int),
        name=doc.get("name", "hand"),
    )
    return validate_model(model)


def model_to_dict(m: HandModel):
    return {
        "format_version": 1,
        "name": m.name,
        "template": m.template.tolist(),
        "shape_dirs": m.shape_dirs.tolist(),
        "pose_dirs": None if m.pose_dirs is None else m.pose_dirs.tolist(),
        "joint_regressor": m.joint_regressor.tolist(),
        "skin_weights": m.skin_weights.tolist(),
        "parents": m.parents.tolist(),
        "faces": m.faces.tolist(),
        "fingertip_vertices": m.fingertip_vertices.tolist(),
    }


def load_model(data) -> HandModel:
    """Parse and validate a hand-model JSON document (bytes/str)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from e
    return model_from_dict(doc)


def load_model_file(path) -> HandModel:
    with open(path, "rb") as f:
        return load_model(f.read())


def save_model_file(m: HandModel, path):
    with open(path, "w") as f:
        json.dump(model_to_dict(m), f)


def shaped_template(model: HandModel, shape):
    """Template plus shape blendshape offsets; affine in the coefficients."""
    shape = np.asarray(shape, dtype=float)
    return model.template + np.tensordot(shape, model.shape_dirs, axes=1)


def joint_locations(model: HandModel, shape):
    return model.joint_regressor @ shaped_template(model, shape)


def linear_blend_skin(points, weights, transforms):
    """Blend 4x4 rigid transforms per vertex: v' = sum_k w[v,k] * (G_k @ v).

    points: V x 3, weights: V x J, transforms: J x 4 x 4.
    """
    rotated = np.einsum("jab,vb->jva", transforms[:, :3, :3], points) + transforms[:, None, :3, 3]
    return np.einsum("vj,jva->va", weights, rotated)


def global_transforms(rotations, joints, parents):
    """Compose the kinematic chain: each joint rotates about its rest location.

    Returns (G, G_skin): G[k] maps rest joint k onto its posed location;
    G_skin[k] = G[k] with the rest-pose offset removed (identity at rest).
    """
    J = len(parents)
    G = np.zeros((J, 4, 4))
    G[:, 3, 3] = 1.0
    G[0, :3, :3] = rotations[0]
    G[0, :3, 3] = joints[0]
    for k in range(1, J):
        local = np.eye(4)
        local[:3, :3] = rotations[k]
        local[:3, 3] = joints[k] - joints[parents[k]]
        G[k] = G[parents[k]] @ local
    G_skin = G.copy()
    G_skin[:, :3, 3] -= np.einsum("jab,jb->ja", G[:, :3, :3], joints)
    return G, G_skin


def pose_blend_offsets(model: HandModel, rotations):
    """Corrective offsets driven by vec(R_n - I) of the 15 non-root joints."""
    if model.pose_dirs is None:
        return 0.0
    feat = (rotations[1:] - np.eye(3)).reshape(-1)  # 135, row-major
    return np.tensordot(feat, model.pose_dirs, axes=1)


def forward(model: HandModel, params: HandParams):
    """Evaluate the model: returns (Mesh, 21x3 keypoints), both in meters."""
    rotations = np.stack([rot6d_to_matrix(p) for p in params.pose])
    joints = joint_locations(model, params.shape)
    v_shaped = shaped_template(model, params.shape) + pose_blend_offsets(model, rotations)
    G, G_skin = global_transforms(rotations, joints, model.parents)
    vertices = linear_blend_skin(v_shaped, model.skin_weights, G_skin) + params.root
    posed_joints = G[:, :3, 3] + params.root
    keypoints = np.zeros((NUM_KEYPOINTS, 3))
    keypoints[_JOINT_TO_KP] = posed_joints
    keypoints[_TIP_KP] = vertices[model.fingertip_vertices]
    return Mesh(vertices=vertices, faces=model.faces), keypoints


def keypoints3d(model: HandModel, params: HandParams):
    return forward(model, params)[1]


def synth_toy_model(seed: int, v_per_segment: int = 4, with_pose_dirs: bool = False) -> HandModel:
    """Deterministic procedural 5-finger test model (J=16, S=10).

    Shape semantics: shape_dirs[0] scales the whole hand isotropically about
    the wrist; shape_dirs[1] elongates the fingers along their directions;
    the remaining directions are small seeded random displacements.
    """
    if v_per_segment < 2:
        raise ValueError("v_per_segment must be >= 2")
    rng = np.random.default_rng(seed)

    angles = np.deg2rad([-50.0, -15.0, 0.0, 15.0, 30.0])
    dirs = np.stack([np.cos(angles), np.sin(angles), np.zeros(5)], axis=1)
    palm_len = np.array([0.040, 0.090, 0.095, 0.090, 0.080])
    seg_len = np.array([0.035, 0.032, 0.035, 0.032, 0.025])

    joints = np.zeros((NUM_JOINTS, 3))
    parents = np.full(NUM_JOINTS, -1, dtype=int)
    tips = np.zeros((5, 3))
    for f in range(5):
        for s in range(3):
            j = 1 + 3 * f + s
            joints[j] = dirs[f] * (palm_len[f] + s * seg_len[f])
            parents[j] = 0 if s == 0 else j - 1
        tips[f] = dirs[f] * (palm_len[f] + 3 * seg_len[f])

    verts = []
    weights_rows = []
    finger_of = []  # finger index per vertex, -1 for palm

    # palm ring around the palm center, alternating out-of-plane offset
    palm_center = np.array([0.045, 0.0, 0.0])
    for i in range(8):
        a = 2 * np.pi * i / 8
        off = np.array([0.035 * np.cos(a), 0.030 * np.sin(a), 0.010 * (-1) ** i])
        verts.append(palm_center + off)
        w = np.zeros(NUM_JOINTS)
        w[0] = 1.0
        weights_rows.append(w)
        finger_of.append(-1)
    palm_face_base = 0

    # one marker vertex per joint (used by the joint regressor)
    marker_base = len(verts)
    for j in range(NUM_JOINTS):
        verts.append(joints[j].copy())
        w = np.zeros(NUM_JOINTS)
        w[j] = 1.0
        weights_rows.append(w)
        finger_of.append(-1 if j == 0 else (j - 1) // 3)

    # finger segment strips; the last vertex of each finger sits exactly at
    # the tip and becomes the fingertip vertex
    faces = []
    fingertip_vertices = np.zeros(5, dtype=int)
    for f in range(5):
        strip = []
        normal = np.array([0.0, 0.0, 1.0])
        side = np.cross(normal, dirs[f])
        for s in range(3):
            j = 1 + 3 * f + s
            p0 = joints[j]
            p1 = joints[j + 1] if s < 2 else tips[f]
            for i in range(v_per_segment):
                t = (i + 1) / v_per_segment
                p = p0 + t * (p1 - p0)
                last = s == 2 and i == v_per_segment - 1
                if not last:
                    k = len(strip)
                    p = p + ((-1) ** k) * (0.004 * normal + 0.002 * side)
                idx = len(verts)
                verts.append(p)
                w = np.zeros(NUM_JOINTS)
                if i == v_per_segment - 1 and s < 2:
                    # blend across the knuckle for non-trivial skinning rows
                    w[j] = 0.5
                    w[j + 1] = 0.5
                else:
                    w[j] = 1.0
                weights_rows.append(w)
                finger_of.append(f)
                strip.append(idx)
                if last:
                    fingertip_vertices[f] = idx
        for i in range(len(strip) - 2):
            faces.append([strip[i], strip[i + 1], strip[i + 2]])
    for i in range(6):
        faces.append([palm_face_base + i, palm_face_base + i + 1, palm_face_base + (i + 2) % 8])

    template = np.asarray(verts)
    V = len(template)
    skin_weights = np.asarray(weights_rows)
    finger_of = np.asarray(finger_of)

    joint_regressor = np.zeros((NUM_JOINTS, V))
    for j in range(NUM_JOINTS):
        joint_regressor[j, marker_base + j] = 1.0

    shape_dirs = np.zeros((NUM_SHAPE, V, 3))
    shape_dirs[0] = 0.15 * template  # isotropic scale about the wrist
    for v in range(V):
        f = finger_of[v]
        if f < 0:
            continue
        reach = np.dot(template[v], dirs[f]) - palm_len[f]
        if reach > 0:
            shape_dirs[1, v] = 0.3 * reach * dirs[f]
    shape_dirs[2:] = 0.001 * rng.standard_normal((NUM_SHAPE - 2, V, 3))

    pose_dirs = None
    if with_pose_dirs:
        pose_dirs = 0.0005 * rng.standard_normal((9 * (NUM_JOINTS - 1), V, 3))

    return validate_model(HandModel(
        template=template,
        shape_dirs=shape_dirs,
        pose_dirs=pose_dirs,
        joint_regressor=joint_regressor,
        skin_weights=skin_weights,
        parents=parents,
        faces=np.asarray(faces, dtype=int),
        fingertip_vertices=fingertip_vertices,
        name=f"toy-{seed}",
    ))
