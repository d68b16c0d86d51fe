"""Pose normalization and feature assembly matching the engine's conventions.

Independent implementation (the cross-check against the engine lives in
the tests): hip-midpoint origin, X along the hip axis, Y from the spine
orthogonalized against X, Z = X x Y, coordinates scaled so the
spine_base -> spine_shoulder segment has unit length. Features per frame:
normalized coordinates (3J), pairwise distances on normalized coordinates
(C(J,2), lexicographic), bone elevation/azimuth from raw coordinates (2b).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

from .sequences import Sequence, Topology


def normalize_coords(coords: np.ndarray, topo: Topology, target_torso: float = 1.0,
                     eps: float = 1e-8) -> np.ndarray:
    d = topo.designations
    out = np.empty_like(coords)
    prev_rot, prev_scale = None, None
    for n, joints in enumerate(coords):
        hip_l, hip_r = joints[d["hip_left"]], joints[d["hip_right"]]
        origin = (hip_l + hip_r) / 2.0
        hip_vec = hip_r - hip_l
        hip_len = np.linalg.norm(hip_vec)
        torso = np.linalg.norm(joints[d["spine_shoulder"]] - joints[d["spine_base"]])
        degenerate = hip_len < eps or torso < eps
        if not degenerate:
            x_axis = hip_vec / hip_len
            spine = joints[d["spine_mid"]] - origin
            y_raw = spine - (spine @ x_axis) * x_axis
            y_len = np.linalg.norm(y_raw)
            degenerate = y_len < eps
        if degenerate:
            if prev_rot is None:
                raise ValueError(f"degenerate pose at frame {n} with no previous transform")
            rot, scale = prev_rot, prev_scale
        else:
            y_axis = y_raw / y_len
            rot = np.column_stack([x_axis, y_axis, np.cross(x_axis, y_axis)])
            scale = target_torso / torso
        prev_rot, prev_scale = rot, scale
        out[n] = (joints - origin) @ rot * scale
    return out


def bone_angles(coords_frame: np.ndarray, topo: Topology) -> np.ndarray:
    parents = np.array([p for p, _ in topo.bones])
    children = np.array([c for _, c in topo.bones])
    v = coords_frame[children] - coords_frame[parents]
    norms = np.linalg.norm(v, axis=1)
    nonzero = norms > 0
    phi = np.zeros(topo.n_bones)
    theta = np.zeros(topo.n_bones)
    phi[nonzero] = np.arcsin(np.clip(v[nonzero, 1] / norms[nonzero], -1.0, 1.0))
    theta[nonzero] = np.arctan2(v[nonzero, 2], v[nonzero, 0])
    theta[theta == -np.pi] = np.pi
    out = np.empty(2 * topo.n_bones)
    out[0::2] = phi
    out[1::2] = theta
    return out


def feature_matrix(seq: Sequence) -> np.ndarray:
    """(N, 3J + C(J,2) + 2b) features: normalized coords | distances | angles."""
    topo = seq.topology
    normalized = normalize_coords(seq.coords, topo)
    rows = np.empty((len(seq), topo.feature_dim))
    j3 = 3 * topo.n_joints
    nd = topo.n_joints * (topo.n_joints - 1) // 2
    for n in range(len(seq)):
        rows[n, :j3] = normalized[n].reshape(-1)
        rows[n, j3 : j3 + nd] = pdist(normalized[n])
        rows[n, j3 + nd :] = bone_angles(seq.coords[n], topo)
    return rows
