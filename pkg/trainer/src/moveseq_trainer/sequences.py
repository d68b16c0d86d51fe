"""Reader/writer for the engine's moveseq-seq/1 JSONL sequence format.

Kept independent of the engine package on purpose: the trainer talks to
the engine only through its file formats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

SEQ_FORMAT = "moveseq-seq/1"
DESIGNATION_KEYS = ("hip_left", "hip_right", "spine_mid", "spine_base", "spine_shoulder")


@dataclass(frozen=True)
class Topology:
    joint_names: tuple[str, ...]
    bones: tuple[tuple[int, int], ...]
    designations: dict[str, int]
    mirror_map: tuple[int, ...]

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    @property
    def n_bones(self) -> int:
        return len(self.bones)

    @property
    def feature_dim(self) -> int:
        j, b = self.n_joints, self.n_bones
        return 3 * j + j * (j - 1) // 2 + 2 * b


@dataclass
class Sequence:
    topology: Topology
    fps: float
    coords: np.ndarray  # (N, J, 3) float64

    def __len__(self) -> int:
        return self.coords.shape[0]

    def with_coords(self, coords: np.ndarray) -> "Sequence":
        return replace(self, coords=np.asarray(coords, dtype=np.float64))


def _fmt(x: float) -> str:
    return "null" if not math.isfinite(x) else format(x, ".17g")


def write_jsonl(seq: Sequence, path) -> None:
    topo = seq.topology
    header = {
        "format": SEQ_FORMAT,
        "fps": seq.fps,
        "joints": list(topo.joint_names),
        "bones": [list(b) for b in topo.bones],
        "designations": {k: topo.designations[k] for k in DESIGNATION_KEYS},
        "mirror_map": list(topo.mirror_map),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for i, frame in enumerate(seq.coords):
            joints = ",".join("[" + ",".join(_fmt(v) for v in joint) + "]" for joint in frame)
            fh.write(f'{{"frame":{i},"joints":[{joints}]}}\n')


def read_jsonl(path) -> Sequence:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != SEQ_FORMAT:
            raise ValueError(f"{path}: expected {SEQ_FORMAT!r} header")
        topo = Topology(
            joint_names=tuple(header["joints"]),
            bones=tuple((int(p), int(c)) for p, c in header["bones"]),
            designations={k: int(header["designations"][k]) for k in DESIGNATION_KEYS},
            mirror_map=tuple(int(i) for i in header["mirror_map"]),
        )
        frames = []
        for raw in fh:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            row = [
                [np.nan if v is None else float(v) for v in (joint or [None] * 3)]
                for joint in obj["joints"]
            ]
            frames.append(row)
    coords = np.asarray(frames, dtype=np.float64).reshape(len(frames), topo.n_joints, 3)
    return Sequence(topology=topo, fps=float(header["fps"]), coords=coords)
