import numpy as np
import pytest

from moveseq import JointTopology, Pose, SkeletonSequence, TcnConfig, init_seeded, kinect25


def tiny_topology() -> JointTopology:
    """6-joint test topology: hips, spine chain, one free joint."""
    return JointTopology(
        joint_names=("hip_l", "hip_r", "spine_mid", "spine_base", "spine_shoulder", "hand"),
        bones=((3, 2), (2, 4), (3, 0), (3, 1), (4, 5)),
        hip_left=0,
        hip_right=1,
        spine_mid=2,
        spine_base=3,
        spine_shoulder=4,
        mirror_map=(1, 0, 2, 3, 4, 5),
    )


def canonical_pose(frame_index: int = 0) -> Pose:
    """Tiny-topology pose already aligned with the body frame."""
    joints = np.array([
        [-0.1, 0.0, 0.0],
        [0.1, 0.0, 0.0],
        [0.0, 0.3, 0.0],
        [0.0, 0.05, 0.0],
        [0.0, 0.55, 0.0],
        [0.25, 0.4, 0.1],
    ])
    return Pose(frame_index=frame_index, joints=joints, validity=np.ones(6, bool))


def sequence_from_coords(topo, coords, fps=30.0) -> SkeletonSequence:
    coords = np.asarray(coords, dtype=float)
    poses = [
        Pose(frame_index=i, joints=coords[i], validity=np.isfinite(coords[i]).all(axis=1))
        for i in range(coords.shape[0])
    ]
    return SkeletonSequence(topo, fps, poses)


def random_valid_coords(rng, n_frames, topo=None) -> np.ndarray:
    """Random jittered variants of the canonical tiny pose (never degenerate)."""
    base = canonical_pose().joints
    return base[None] + rng.normal(0.0, 0.02, size=(n_frames, base.shape[0], 3))


@pytest.fixture
def topo():
    return tiny_topology()


@pytest.fixture
def topo25():
    return kinect25()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


SMALL_CONFIG = TcnConfig(input_dim=33, filters=16, kernel_size=3, num_blocks=2, dilations=(1, 2), window_w=8)


@pytest.fixture(scope="session")
def small_config():
    return SMALL_CONFIG


@pytest.fixture(scope="session")
def small_model(small_config):
    return init_seeded(small_config, seed=7)


def tiny_motion(kind: str, n_frames: int, noise: float = 0.0, seed: int = 0, phase: float = 0.0):
    """Animated tiny-topology sequence: "idle" or "wave" (hand oscillation)."""
    base = canonical_pose().joints
    coords = np.repeat(base[None], n_frames, axis=0)
    if kind == "wave":
        t = np.arange(n_frames)
        coords[:, 5, 1] += 0.3 * np.sin(2 * np.pi * t / 10 + phase)
        coords[:, 5, 0] += 0.15 * np.cos(2 * np.pi * t / 10 + phase)
    elif kind != "idle":
        raise ValueError(kind)
    if noise > 0:
        coords = coords + np.random.default_rng(seed).normal(0, noise, coords.shape)
    return sequence_from_coords(tiny_topology(), coords)


def planted_corpus(m: int):
    """3 planted-distance games where the m=3 optimum is stricter than m=1.

    Unit 4-dim embeddings: anchors are e1 (plus e2, e3 in the m=3 set).
    Frames planted inside the ground-truth intervals sit at distance
    0.455/0.465/0.475 from e1 and 0.375/0.385/0.395 from the extended set
    (per game); every other frame is >= 0.56 from all anchors. Swept on a
    0.01 grid, F1 first reaches 1.0 at alpha=0.48 (m=1) vs 0.40 (m=3).
    """
    from moveseq import build_anchor
    from moveseq.evaluation import GameEval

    def unit(c1, c2, c3):
        fill = np.sqrt(max(0.0, 1.0 - c1 * c1 - c2 * c2 - c3 * c3))
        return np.array([c1, c2, c3, fill])

    anchor_vecs = np.eye(4)[:3]
    games = []
    for g in range(3):
        d1 = 0.455 + 0.01 * g
        dm = 0.375 + 0.01 * g
        tp_vec = unit(1.0 - d1, 1.0 - dm, 0.0)
        rng = np.random.default_rng(100 + g)
        frames = np.stack([unit(*rng.uniform(0.05, 0.40, 3)) for _ in range(200)])
        gt = ((60, 80), (140, 160))
        for frame in (75, 155):
            frames[frame] = tp_vec
        if m == 1:
            anchor = build_anchor([anchor_vecs[:1]], m=1, class_label="planted")
        else:
            anchor = build_anchor([anchor_vecs[k : k + 1] for k in range(3)], m=m, class_label="planted")
        games.append(GameEval(anchor=anchor, target_embeddings=frames, gt_intervals=gt))
    return games
