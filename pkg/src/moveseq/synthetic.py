"""Deterministic synthetic skeleton streams for fixtures and demos."""

from __future__ import annotations

import numpy as np

from .skeleton import JointTopology, Pose, SkeletonSequence, kinect25


def rest_pose_kinect25() -> np.ndarray:
    """A plausible standing skeleton (meters, Y up) for the kinect25 topology."""
    coords = {
        "spine_base": (0.0, 0.95, 0.0),
        "spine_mid": (0.0, 1.15, 0.0),
        "neck": (0.0, 1.38, 0.0),
        "head": (0.0, 1.52, 0.0),
        "spine_shoulder": (0.0, 1.33, 0.0),
        "shoulder_left": (-0.18, 1.30, 0.0),
        "elbow_left": (-0.22, 1.05, 0.0),
        "wrist_left": (-0.24, 0.82, 0.0),
        "hand_left": (-0.25, 0.75, 0.0),
        "hand_tip_left": (-0.255, 0.70, 0.0),
        "thumb_left": (-0.22, 0.73, 0.03),
        "shoulder_right": (0.18, 1.30, 0.0),
        "elbow_right": (0.22, 1.05, 0.0),
        "wrist_right": (0.24, 0.82, 0.0),
        "hand_right": (0.25, 0.75, 0.0),
        "hand_tip_right": (0.255, 0.70, 0.0),
        "thumb_right": (0.22, 0.73, 0.03),
        "hip_left": (-0.09, 0.90, 0.0),
        "knee_left": (-0.10, 0.50, 0.0),
        "ankle_left": (-0.10, 0.10, 0.0),
        "foot_left": (-0.10, 0.05, 0.12),
        "hip_right": (0.09, 0.90, 0.0),
        "knee_right": (0.10, 0.50, 0.0),
        "ankle_right": (0.10, 0.10, 0.0),
        "foot_right": (0.10, 0.05, 0.12),
    }
    topo = kinect25()
    return np.array([coords[name] for name in topo.joint_names])


def _sequence_from_coords(topo: JointTopology, coords: np.ndarray, fps: float) -> SkeletonSequence:
    poses = [
        Pose(frame_index=i, joints=coords[i], validity=np.ones(topo.n_joints, bool))
        for i in range(coords.shape[0])
    ]
    return SkeletonSequence(topo, fps, poses)


def make_motion(
    kind: str,
    n_frames: int,
    fps: float = 30.0,
    amplitude: float = 0.35,
    period: int = 24,
    noise: float = 0.0,
    seed: int = 0,
    phase: float = 0.0,
) -> SkeletonSequence:
    """Animated kinect25 sequence of the given kind.

    Kinds: "idle" (rest pose), "wave" (right arm raised and swung),
    "bob" (whole-body vertical bounce), "sway" (lateral upper-body sway).
    Optional Gaussian jitter uses a seeded generator.
    """
    topo = kinect25()
    rest = rest_pose_kinect25()
    coords = np.repeat(rest[None, :, :], n_frames, axis=0)
    t = np.arange(n_frames)
    osc = np.sin(2 * np.pi * t / period + phase)
    arm = [topo.joint_names.index(n) for n in
           ("elbow_right", "wrist_right", "hand_right", "hand_tip_right", "thumb_right")]
    upper = [topo.joint_names.index(n) for n in
             ("spine_mid", "spine_shoulder", "neck", "head",
              "shoulder_left", "elbow_left", "wrist_left", "hand_left", "hand_tip_left", "thumb_left",
              "shoulder_right", "elbow_right", "wrist_right", "hand_right", "hand_tip_right", "thumb_right")]
    if kind == "idle":
        pass
    elif kind == "wave":
        lift = np.array([0.5, 1.0, 1.2, 1.3, 1.1])
        for k, j in enumerate(arm):
            coords[:, j, 1] += amplitude * lift[k] * (osc + 1.0) / 2.0
            coords[:, j, 0] += 0.3 * amplitude * lift[k] * np.sin(4 * np.pi * t / period + phase)
    elif kind == "bob":
        coords[:, :, 1] += amplitude * 0.5 * osc[:, None]
    elif kind == "sway":
        for j in upper:
            coords[:, j, 0] += amplitude * osc * (coords[0, j, 1] - 0.9)
    else:
        raise ValueError(f"unknown motion kind {kind!r}")
    if noise > 0:
        rng = np.random.default_rng(seed)
        coords = coords + rng.normal(0.0, noise, coords.shape)
    return _sequence_from_coords(topo, coords, fps)


def concat_motions(parts: list[SkeletonSequence]) -> SkeletonSequence:
    """Concatenate sequences over the same topology, re-enumerating frames."""
    topo = parts[0].topology
    coords = np.concatenate([seq.joint_array() for seq in parts], axis=0)
    return _sequence_from_coords(topo, coords, parts[0].fps)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation matrix via QR with positive diagonal."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def apply_rigid(
    seq: SkeletonSequence,
    rotation: np.ndarray | None = None,
    translation: np.ndarray | None = None,
    scale: float = 1.0,
) -> SkeletonSequence:
    """World-frame similarity transform x -> scale * R @ x + t of every joint."""
    rotation = np.eye(3) if rotation is None else rotation
    translation = np.zeros(3) if translation is None else np.asarray(translation, float)
    coords = scale * seq.joint_array() @ rotation.T + translation
    out = _sequence_from_coords(seq.topology, coords, seq.fps)
    out.normalized = seq.normalized
    return out
