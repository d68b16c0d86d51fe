"""View- and location-invariant pose normalization.

Per frame, a body-centric frame H is fitted to the skeleton: origin at the
hip midpoint, X along the left-to-right hip axis (so the left hip gets a
negative X coordinate), Y along the spine direction orthogonalized against
X, and Z = X x Y (right-handed). Coordinates are re-expressed in H and
uniformly scaled so the torso (spine_shoulder to spine_base) has a fixed
target length, which removes camera pose and subject size from the stream.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegeneratePoseError, MoveseqError
from .skeleton import JointTopology, Pose, SkeletonSequence


@dataclass(frozen=True)
class NormalizationConfig:
    torso_target_length: float = 1.0
    degenerate_epsilon: float = 1e-8
    scale_mode: str = "per_frame"  # or "sequence_median"

    def __post_init__(self):
        if self.torso_target_length <= 0:
            raise MoveseqError("torso_target_length must be positive")
        if self.degenerate_epsilon <= 0:
            raise MoveseqError("degenerate_epsilon must be positive")
        if self.scale_mode not in ("per_frame", "sequence_median"):
            raise MoveseqError(f"unknown scale_mode {self.scale_mode!r}")


@dataclass(frozen=True)
class FrameTransform:
    """World-to-body-frame transform for one pose.

    rotation columns are the body frame's X, Y, Z axes expressed in world
    coordinates; a point x maps to scale * rotation^T @ (x - origin).
    """

    rotation: np.ndarray  # (3, 3)
    origin: np.ndarray  # (3,)
    scale: float

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        o = np.asarray(self.origin, dtype=np.float64)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "origin", o)
        if r.shape != (3, 3) or o.shape != (3,):
            raise MoveseqError("transform shape mismatch")
        if np.abs(r.T @ r - np.eye(3)).max() > 1e-9:
            raise MoveseqError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise MoveseqError("rotation must have determinant +1")
        if not self.scale > 0:
            raise MoveseqError("scale must be positive")


def _torso_length(joints: np.ndarray, topo: JointTopology) -> float:
    return float(np.linalg.norm(joints[topo.spine_shoulder] - joints[topo.spine_base]))


def compute_frame_transform(
    pose: Pose,
    topo: JointTopology,
    cfg: NormalizationConfig,
    prev: FrameTransform | None = None,
) -> FrameTransform:
    """Fit the body frame to one pose.

    Degenerate geometry (coincident hips, spine parallel to the hip axis,
    or zero torso) reuses the previous frame's rotation and scale with the
    current hip midpoint, or raises DegeneratePoseError when no previous
    transform is available.
    """
    joints = pose.joints
    if not np.isfinite(joints).all():
        raise MoveseqError("pose has non-finite joints; repair the sequence first")
    hip_l = joints[topo.hip_left]
    hip_r = joints[topo.hip_right]
    origin = (hip_l + hip_r) / 2.0

    eps = cfg.degenerate_epsilon
    hip_vec = hip_r - hip_l
    hip_len = np.linalg.norm(hip_vec)
    torso = _torso_length(joints, topo)
    degenerate = hip_len < eps or torso < eps
    if not degenerate:
        x_axis = hip_vec / hip_len
        spine = joints[topo.spine_mid] - origin
        y_raw = spine - (spine @ x_axis) * x_axis
        y_len = np.linalg.norm(y_raw)
        degenerate = y_len < eps
    if degenerate:
        if prev is None:
            raise DegeneratePoseError(f"degenerate pose at frame {pose.frame_index}")
        return FrameTransform(rotation=prev.rotation, origin=origin, scale=prev.scale)

    y_axis = y_raw / y_len
    z_axis = np.cross(x_axis, y_axis)
    rotation = np.column_stack([x_axis, y_axis, z_axis])
    return FrameTransform(rotation=rotation, origin=origin, scale=cfg.torso_target_length / torso)


def normalize_pose(pose: Pose, tf: FrameTransform) -> Pose:
    """Express a pose in the body frame: x -> scale * R^T (x - origin)."""
    coords = (pose.joints - tf.origin) @ tf.rotation * tf.scale
    return replace(pose, joints=coords, validity=np.ones(len(coords), bool))


def normalize_sequence(
    seq: SkeletonSequence, cfg: NormalizationConfig | None = None
) -> tuple[SkeletonSequence, list[FrameTransform]]:
    """Normalize every frame, threading the previous transform as fallback.

    In scale_mode="sequence_median" the per-frame torso length is replaced
    by the sequence median before scaling. Requires a repaired sequence.
    """
    cfg = cfg or NormalizationConfig()
    if not all(p.validity.all() for p in seq.poses):
        raise MoveseqError("sequence has invalid joints; repair before normalizing")

    scale_override = None
    if cfg.scale_mode == "sequence_median":
        lengths = [_torso_length(p.joints, seq.topology) for p in seq.poses]
        lengths = [L for L in lengths if L >= cfg.degenerate_epsilon]
        if not lengths:
            raise DegeneratePoseError("no frame has a usable torso length")
        scale_override = cfg.torso_target_length / float(np.median(lengths))

    transforms: list[FrameTransform] = []
    normalized: list[Pose] = []
    prev: FrameTransform | None = None
    for pose in seq.poses:
        tf = compute_frame_transform(pose, seq.topology, cfg, prev=prev)
        if scale_override is not None:
            tf = replace(tf, scale=scale_override)
        prev = tf
        transforms.append(tf)
        normalized.append(normalize_pose(pose, tf))
    out = SkeletonSequence(seq.topology, seq.fps, normalized, normalized=True)
    return out, transforms
