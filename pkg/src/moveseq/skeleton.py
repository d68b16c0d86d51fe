"""Skeleton stream data model, file formats, repair and resampling.

Sequence files (``moveseq-seq/1``) are UTF-8 JSONL. Line 1 is a header:

    {"format": "moveseq-seq/1", "fps": 30, "joints": [...names...],
     "bones": [[parent, child], ...],
     "designations": {"hip_left": i, "hip_right": i, "spine_mid": i,
                      "spine_base": i, "spine_shoulder": i},
     "mirror_map": [...]}

Each following line is one frame:

    {"frame": k, "joints": [[x, y, z], ...]}

Coordinates are meters. Non-finite values are written as ``null`` and
parsed back as invalid joints. Frame indices are re-enumerated to dense
0..N-1 on parse; the original index is kept in an optional ``source``
field. Coordinates are written with 17 significant digits so that
parse(serialize(seq)) reproduces the sequence exactly.

Annotation files are JSON:

    {"games": [{"id": str, "class": str, "anchor_intervals": [[s, e], ...],
                "target_intervals": [[s, e], ...], "idle_interval": [a, b]}]}

Intervals are inclusive frame ranges in the dense post-parse indexing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import MoveseqError, ParseError, UnrecoverableJointError

SEQ_FORMAT = "moveseq-seq/1"

_DESIGNATION_KEYS = ("hip_left", "hip_right", "spine_mid", "spine_base", "spine_shoulder")


def _fmt(x: float) -> str:
    """17-significant-digit decimal, or null for non-finite values."""
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


@dataclass(frozen=True)
class JointTopology:
    """Named joint set with bone connectivity and body-frame designations."""

    joint_names: tuple[str, ...]
    bones: tuple[tuple[int, int], ...]
    hip_left: int
    hip_right: int
    spine_mid: int
    spine_base: int
    spine_shoulder: int
    mirror_map: tuple[int, ...]

    def __post_init__(self):
        j = self.n_joints
        for p, c in self.bones:
            if not (0 <= p < j and 0 <= c < j):
                raise MoveseqError(f"bone ({p}, {c}) out of range for {j} joints")
        if len(set(self.bones)) != len(self.bones):
            raise MoveseqError("duplicate bones in topology")
        designations = self.designations()
        if len(set(designations.values())) != len(designations):
            raise MoveseqError("designation indices must be distinct")
        for key, idx in designations.items():
            if not 0 <= idx < j:
                raise MoveseqError(f"designation {key}={idx} out of range")
        if len(self.mirror_map) != j:
            raise MoveseqError("mirror_map length must equal joint count")
        for a, b in enumerate(self.mirror_map):
            if not 0 <= b < j or self.mirror_map[b] != a:
                raise MoveseqError("mirror_map must be an involution over joint indices")

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    @property
    def n_bones(self) -> int:
        return len(self.bones)

    def designations(self) -> dict[str, int]:
        return {key: getattr(self, key) for key in _DESIGNATION_KEYS}


@dataclass
class Pose:
    """One frame of joint coordinates with per-joint validity flags."""

    frame_index: int
    joints: np.ndarray  # (J, 3) float64; invalid entries hold NaN
    validity: np.ndarray  # (J,) bool
    source_index: int | None = None

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=np.float64)
        self.validity = np.asarray(self.validity, dtype=bool)
        if self.joints.shape != (self.validity.shape[0], 3):
            raise MoveseqError(f"pose joints shape {self.joints.shape} inconsistent with validity")


@dataclass
class SkeletonSequence:
    """Ordered pose stream over a fixed topology."""

    topology: JointTopology
    fps: float
    poses: list[Pose]
    normalized: bool = False

    def __post_init__(self):
        j = self.topology.n_joints
        prev = None
        for pose in self.poses:
            if pose.joints.shape[0] != j:
                raise MoveseqError(
                    f"pose at frame {pose.frame_index} has {pose.joints.shape[0]} joints, topology has {j}"
                )
            if prev is not None and pose.frame_index <= prev:
                raise MoveseqError(f"frame indices not strictly increasing at {pose.frame_index}")
            prev = pose.frame_index

    def __len__(self) -> int:
        return len(self.poses)

    def joint_array(self) -> np.ndarray:
        """Stacked coordinates, shape (N, J, 3)."""
        return np.stack([p.joints for p in self.poses]) if self.poses else np.zeros((0, self.topology.n_joints, 3))

    def validity_array(self) -> np.ndarray:
        return np.stack([p.validity for p in self.poses]) if self.poses else np.zeros((0, self.topology.n_joints), bool)


@dataclass(frozen=True)
class GameRecord:
    """One imitation game: reference executions, ground truth and idle span."""

    id: str
    class_label: str
    anchor_intervals: tuple[tuple[int, int], ...]
    target_intervals: tuple[tuple[int, int], ...]
    idle_interval: tuple[int, int] | None = None

    def __post_init__(self):
        for s, e in (*self.anchor_intervals, *self.target_intervals):
            if s > e:
                raise MoveseqError(f"interval [{s}, {e}] has start > end in game {self.id}")
        if self.idle_interval is not None:
            a, b = self.idle_interval
            if a > b:
                raise MoveseqError(f"idle interval [{a}, {b}] has start > end in game {self.id}")
            for s, e in self.target_intervals:
                if s <= b and a <= e:
                    raise MoveseqError(f"idle interval overlaps target interval in game {self.id}")


@dataclass(frozen=True)
class AnnotationSet:
    games: tuple[GameRecord, ...]

    def __post_init__(self):
        ids = [g.id for g in self.games]
        if len(set(ids)) != len(ids):
            raise MoveseqError("duplicate game ids in annotation set")

    def by_id(self, game_id: str) -> GameRecord:
        for g in self.games:
            if g.id == game_id:
                return g
        raise MoveseqError(f"unknown game id {game_id!r}")


def kinect25() -> JointTopology:
    """The 25-joint topology used by the default engine configuration (24 bones)."""
    names = (
        "spine_base", "spine_mid", "neck", "head",
        "shoulder_left", "elbow_left", "wrist_left", "hand_left",
        "shoulder_right", "elbow_right", "wrist_right", "hand_right",
        "hip_left", "knee_left", "ankle_left", "foot_left",
        "hip_right", "knee_right", "ankle_right", "foot_right",
        "spine_shoulder", "hand_tip_left", "thumb_left", "hand_tip_right", "thumb_right",
    )
    bones = (
        (0, 1), (1, 20), (20, 2), (2, 3),
        (20, 4), (4, 5), (5, 6), (6, 7), (7, 21), (6, 22),
        (20, 8), (8, 9), (9, 10), (10, 11), (11, 23), (10, 24),
        (0, 12), (12, 13), (13, 14), (14, 15),
        (0, 16), (16, 17), (17, 18), (18, 19),
    )
    mirror = list(range(25))
    for a, b in ((4, 8), (5, 9), (6, 10), (7, 11), (12, 16), (13, 17), (14, 18), (15, 19), (21, 23), (22, 24)):
        mirror[a], mirror[b] = b, a
    return JointTopology(
        joint_names=names,
        bones=bones,
        hip_left=12,
        hip_right=16,
        spine_mid=1,
        spine_base=0,
        spine_shoulder=20,
        mirror_map=tuple(mirror),
    )


def _topology_from_header(header: dict) -> JointTopology:
    try:
        names = tuple(str(n) for n in header["joints"])
        bones = tuple((int(p), int(c)) for p, c in header["bones"])
        designations = {k: int(header["designations"][k]) for k in _DESIGNATION_KEYS}
        mirror = tuple(int(i) for i in header["mirror_map"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed header: {exc}", line=1) from exc
    return JointTopology(joint_names=names, bones=bones, mirror_map=mirror, **designations)


def parse_sequence(path) -> SkeletonSequence:
    """Parse a moveseq-seq/1 JSONL file into a validated sequence.

    Non-finite or null coordinates yield validity=False for the joint.
    Raises ParseError with a line number on malformed input.
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise ParseError("malformed header: empty file", line=1)
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed header: {exc.msg}", line=1) from exc
        if not isinstance(header, dict) or header.get("format") != SEQ_FORMAT:
            raise ParseError(f"malformed header: expected format {SEQ_FORMAT!r}", line=1)
        try:
            fps = float(header["fps"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("malformed header: missing or bad fps", line=1) from exc
        try:
            topo = _topology_from_header(header)
        except ParseError:
            raise
        except MoveseqError as exc:
            raise ParseError(f"malformed header: {exc}", line=1) from exc
        normalized = bool(header.get("normalized", False))

        poses: list[Pose] = []
        prev_frame = None
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed frame: {exc.msg}", line=lineno) from exc
            try:
                frame = int(obj["frame"])
                joints_raw = obj["joints"]
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"malformed frame object: {exc}", line=lineno) from exc
            if prev_frame is not None and frame <= prev_frame:
                raise ParseError(f"non-monotone frame index {frame} after {prev_frame}", line=lineno)
            prev_frame = frame
            if len(joints_raw) != topo.n_joints:
                raise ParseError(
                    f"joint count mismatch: expected {topo.n_joints}, got {len(joints_raw)}", line=lineno
                )
            coords = np.empty((topo.n_joints, 3))
            for j, entry in enumerate(joints_raw):
                if entry is None:
                    coords[j] = np.nan
                    continue
                if len(entry) != 3:
                    raise ParseError(f"joint {j} does not have 3 coordinates", line=lineno)
                coords[j] = [np.nan if v is None else float(v) for v in entry]
            validity = np.isfinite(coords).all(axis=1)
            coords[~np.isfinite(coords)] = np.nan
            position = len(poses)
            if "source" in obj and obj["source"] is not None:
                source = int(obj["source"])
            else:
                source = frame if frame != position else None
            poses.append(Pose(frame_index=position, joints=coords, validity=validity, source_index=source))
    return SkeletonSequence(topology=topo, fps=fps, poses=poses, normalized=normalized)


def serialize_sequence(seq: SkeletonSequence, path) -> None:
    """Write a sequence as moveseq-seq/1 JSONL (deterministic bytes)."""
    topo = seq.topology
    header: dict = {
        "format": SEQ_FORMAT,
        "fps": seq.fps,
        "joints": list(topo.joint_names),
        "bones": [list(b) for b in topo.bones],
        "designations": topo.designations(),
        "mirror_map": list(topo.mirror_map),
    }
    if seq.normalized:
        header["normalized"] = True
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for pose in seq.poses:
            joints = ",".join(
                "[" + ",".join(_fmt(v) for v in joint) + "]" for joint in pose.joints
            )
            line = f'{{"frame":{pose.frame_index},"joints":[{joints}]'
            if pose.source_index is not None:
                line += f',"source":{pose.source_index}'
            fh.write(line + "}\n")


def parse_annotations(path) -> AnnotationSet:
    """Parse a game annotation JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed annotation file: {exc.msg}") from exc
    try:
        games = []
        for g in obj["games"]:
            idle = g.get("idle_interval")
            games.append(
                GameRecord(
                    id=str(g["id"]),
                    class_label=str(g["class"]),
                    anchor_intervals=tuple((int(s), int(e)) for s, e in g["anchor_intervals"]),
                    target_intervals=tuple((int(s), int(e)) for s, e in g["target_intervals"]),
                    idle_interval=None if idle is None else (int(idle[0]), int(idle[1])),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed annotation file: {exc}") from exc
    return AnnotationSet(games=tuple(games))


def write_annotations(annotations: AnnotationSet, path) -> None:
    obj = {
        "games": [
            {
                "id": g.id,
                "class": g.class_label,
                "anchor_intervals": [list(i) for i in g.anchor_intervals],
                "target_intervals": [list(i) for i in g.target_intervals],
                "idle_interval": None if g.idle_interval is None else list(g.idle_interval),
            }
            for g in annotations.games
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def repair_pose(seq: SkeletonSequence) -> tuple[SkeletonSequence, int]:
    """Fill invalid joints from the nearest valid frame and report the count.

    Carry-forward from the most recent valid value; joints invalid from the
    start are back-filled from the first later valid value. A joint with no
    valid value anywhere raises UnrecoverableJointError.
    """
    if not seq.poses:
        return seq, 0
    coords = seq.joint_array().copy()
    valid = seq.validity_array()
    n_repaired = int((~valid).sum())
    if n_repaired:
        for j in range(seq.topology.n_joints):
            col_valid = valid[:, j]
            if col_valid.all():
                continue
            if not col_valid.any():
                raise UnrecoverableJointError(
                    f"unrecoverable joint {seq.topology.joint_names[j]!r}: invalid in every frame"
                )
            idx = np.where(col_valid, np.arange(len(seq)), -1)
            ffill = np.maximum.accumulate(idx)
            first_valid = int(np.argmax(col_valid))
            for n in range(len(seq)):
                if not col_valid[n]:
                    src = ffill[n] if ffill[n] >= 0 else first_valid
                    coords[n, j] = coords[src, j]
    poses = [
        replace(p, joints=coords[n], validity=np.ones(seq.topology.n_joints, bool))
        for n, p in enumerate(seq.poses)
    ]
    return SkeletonSequence(seq.topology, seq.fps, poses, normalized=seq.normalized), n_repaired


def resample(seq: SkeletonSequence, stride: int) -> SkeletonSequence:
    """Keep every stride-th frame; fps is divided and indices re-enumerated.

    Original frame indices are retained in Pose.source_index.
    """
    if not isinstance(stride, int) or stride < 1:
        raise ValueError(f"stride must be a positive integer, got {stride!r}")
    if stride == 1:
        return seq
    poses = []
    for new_index, pose in enumerate(seq.poses[::stride]):
        source = pose.source_index if pose.source_index is not None else pose.frame_index
        poses.append(replace(pose, frame_index=new_index, source_index=source))
    return SkeletonSequence(seq.topology, seq.fps / stride, poses, normalized=seq.normalized)
