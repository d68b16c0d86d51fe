"""Three-class separable synthetic motion dataset on a 5-joint skeleton."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .sequences import Sequence, Topology, write_jsonl

CLASSES = ("updown", "side", "depth")


def mini_topology() -> Topology:
    return Topology(
        joint_names=("hip_l", "hip_r", "spine_base", "spine_mid", "spine_shoulder"),
        bones=((2, 3), (3, 4), (2, 0), (2, 1)),
        designations={"hip_left": 0, "hip_right": 1, "spine_mid": 3,
                      "spine_base": 2, "spine_shoulder": 4},
        mirror_map=(1, 0, 2, 3, 4),
    )


_BASE = np.array([
    [-0.10, 0.00, 0.00],
    [0.10, 0.00, 0.00],
    [0.00, 0.05, 0.00],
    [0.00, 0.30, 0.00],
    [0.00, 0.55, 0.00],
])


def make_sample(label: str, rng: np.random.Generator, n_frames: int | None = None,
                fps: float = 15.0) -> Sequence:
    """One randomized execution: random length, phase, amplitude, yaw, placement."""
    topo = mini_topology()
    n = int(n_frames if n_frames is not None else rng.integers(36, 60))
    coords = np.repeat(_BASE[None], n, axis=0)
    period = float(rng.uniform(10, 16))
    phase = float(rng.uniform(0, 2 * np.pi))
    amp = float(rng.uniform(0.12, 0.22))
    osc = amp * np.sin(2 * np.pi * np.arange(n) / period + phase)
    if label == "updown":
        coords[:, 4, 1] += osc
        coords[:, 3, 1] += 0.5 * osc
    elif label == "side":
        coords[:, 4, 0] += osc
        coords[:, 3, 0] += 0.5 * osc
    elif label == "depth":
        coords[:, 4, 2] += osc
        coords[:, 3, 2] += 0.5 * osc
    else:
        raise ValueError(f"unknown class {label!r}")
    yaw = float(rng.uniform(-np.pi, np.pi))
    rot = np.array([
        [np.cos(yaw), 0.0, np.sin(yaw)],
        [0.0, 1.0, 0.0],
        [-np.sin(yaw), 0.0, np.cos(yaw)],
    ])
    coords = coords @ rot.T + rng.uniform(-1.0, 1.0, 3)
    coords += rng.normal(0.0, 0.004, coords.shape)
    return Sequence(topology=topo, fps=fps, coords=coords)


def write_dataset(root, n_per_class: int, seed: int = 0) -> Path:
    """Write <root>/<class>/<class>_<i>.jsonl for every class."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    for label in CLASSES:
        class_dir = root / label
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(n_per_class):
            write_jsonl(make_sample(label, rng), class_dir / f"{label}_{i:03d}.jsonl")
    return root
