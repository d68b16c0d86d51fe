"""One-shot / few-shot recognition over motion embeddings.

An anchor action is represented by the embeddings of its last m frames
(unioned over anchor sequences in the few-shot case). The distance from a
target embedding to the anchor is the minimum pairwise distance to that
set, under either the cosine distance or the Jensen-Shannon divergence
root (softmax inputs, base-2 logs); both are bounded in [0, 1] on the
engine's nonnegative embeddings. Detection thresholds the distance
strictly (d < alpha); the dynamic variant tightens alpha to the nearest-
rank 10th percentile of the distances measured over a known idle span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MoveseqError


def _check_dims(z1: np.ndarray, z2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z1 = np.asarray(z1, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    if z1.shape != z2.shape or z1.ndim != 1:
        raise MoveseqError(f"embedding dimension mismatch: {z1.shape} vs {z2.shape}")
    return z1, z2


def cosine_distance(z1, z2) -> float:
    """1 - cos(z1, z2); in [0, 1] for nonnegative inputs.

    Zero-vector convention: both norms < 1e-12 -> 0, exactly one -> 1.
    """
    z1, z2 = _check_dims(z1, z2)
    n1 = np.linalg.norm(z1)
    n2 = np.linalg.norm(z2)
    small1, small2 = n1 < 1e-12, n2 < 1e-12
    if small1 and small2:
        return 0.0
    if small1 or small2:
        return 1.0
    return max(0.0, 1.0 - float(z1 @ z2) / (n1 * n2))


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def js_distance(z1, z2) -> float:
    """Jensen-Shannon divergence root between softmax(z1) and softmax(z2).

    Base-2 logarithms bound the result in [0, 1]; 0*log(0) counts as 0.
    """
    z1, z2 = _check_dims(z1, z2)
    if not (np.isfinite(z1).all() and np.isfinite(z2).all()):
        raise MoveseqError("non-finite embedding passed to js_distance")
    p1 = _softmax(z1)
    p2 = _softmax(z2)
    mid = (p1 + p2) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        kl1 = np.where(p1 > 0, p1 * np.log2(p1 / mid), 0.0).sum()
        kl2 = np.where(p2 > 0, p2 * np.log2(p2 / mid), 0.0).sum()
    jsd = (kl1 + kl2) / 2.0
    return math.sqrt(min(max(jsd, 0.0), 1.0))


METRICS = {"cos": cosine_distance, "js": js_distance}


@dataclass(frozen=True)
class AnchorRepresentation:
    """Embedding set defining one action class (size m per anchor sequence)."""

    class_label: str
    embeddings: np.ndarray  # (n, dim), nonnegative
    m: int
    source_count: int

    def __post_init__(self):
        emb = np.asarray(self.embeddings, dtype=np.float64)
        object.__setattr__(self, "embeddings", emb)
        if emb.ndim != 2 or emb.shape[0] == 0:
            raise MoveseqError("anchor representation needs a non-empty (n, dim) embedding set")
        if not np.isfinite(emb).all() or (emb < 0).any():
            raise MoveseqError("anchor embeddings must be finite and nonnegative")


def build_anchor(
    anchor_embeddings_per_sequence: list, m: int, class_label: str
) -> AnchorRepresentation:
    """Union of the last min(m, available) embeddings from each anchor sequence."""
    if m < 1:
        raise MoveseqError("m must be >= 1")
    if not anchor_embeddings_per_sequence:
        raise MoveseqError("at least one anchor sequence is required")
    chunks = []
    for embeddings in anchor_embeddings_per_sequence:
        arr = np.asarray(embeddings, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise MoveseqError("each anchor sequence must provide a non-empty embedding list")
        chunks.append(arr[-min(m, arr.shape[0]) :])
    return AnchorRepresentation(
        class_label=class_label,
        embeddings=np.concatenate(chunks, axis=0),
        m=m,
        source_count=len(chunks),
    )


def distance_to_anchor(anchor: AnchorRepresentation, z, metric: str = "cos") -> float:
    """Minimum distance from z to any embedding in the anchor set."""
    fn = METRICS[metric]
    return min(fn(za, z) for za in anchor.embeddings)


def anchor_distances(anchor: AnchorRepresentation, embeddings, metric: str = "cos") -> np.ndarray:
    """distance_to_anchor for each row of an (N, dim) embedding stream."""
    return np.array([distance_to_anchor(anchor, z, metric) for z in np.asarray(embeddings, dtype=np.float64)])


@dataclass(frozen=True)
class Threshold:
    alpha: float
    dynamic: bool
    effective_alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise MoveseqError("alpha must be in [0, 1]")
        if self.dynamic and self.effective_alpha > self.alpha:
            raise MoveseqError("dynamic threshold cannot exceed alpha")


def static_threshold(alpha: float) -> Threshold:
    return Threshold(alpha=alpha, dynamic=False, effective_alpha=alpha)


def nearest_rank_p10(values) -> float:
    """Nearest-rank 10th percentile: the ceil(0.1*N)-th smallest value."""
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise MoveseqError("cannot take a percentile of no values")
    return ordered[(len(ordered) + 9) // 10 - 1]


def dynamic_threshold(
    alpha: float, anchor: AnchorRepresentation, idle_embeddings, metric: str = "cos"
) -> Threshold:
    """Tighten alpha to the P10 of idle-frame distances to the anchor."""
    idle = np.asarray(idle_embeddings, dtype=np.float64)
    if idle.size == 0:
        return Threshold(alpha=alpha, dynamic=True, effective_alpha=alpha)
    distances = anchor_distances(anchor, idle, metric)
    return Threshold(alpha=alpha, dynamic=True, effective_alpha=min(alpha, nearest_rank_p10(distances)))


@dataclass(frozen=True)
class TimelineRecord:
    frame: int
    distance: float
    detected: bool
    quality: float | None  # defined only when detected


@dataclass(frozen=True)
class DetectionTimeline:
    records: tuple[TimelineRecord, ...]
    threshold: Threshold
    metric: str

    def detected_frames(self) -> list[int]:
        return [r.frame for r in self.records if r.detected]


def detect_stream(
    anchor: AnchorRepresentation,
    target_embeddings,
    threshold: Threshold,
    metric: str = "cos",
    frames=None,
) -> DetectionTimeline:
    """Per-frame anchor distances thresholded at effective_alpha (strict).

    quality = 1 - distance on detected frames, mirroring the similarity
    shading of the timeline output.
    """
    target = np.asarray(target_embeddings, dtype=np.float64)
    if frames is None:
        frames = range(target.shape[0])
    distances = anchor_distances(anchor, target, metric)
    records = []
    for frame, d in zip(frames, distances):
        detected = bool(d < threshold.effective_alpha)
        records.append(
            TimelineRecord(frame=int(frame), distance=float(d), detected=detected,
                           quality=(1.0 - float(d)) if detected else None)
        )
    return DetectionTimeline(records=tuple(records), threshold=threshold, metric=metric)


def classify_segment(anchors: list[AnchorRepresentation], segment_embedding, metric: str = "cos") -> str:
    """Nearest-anchor class label; ties break toward the earliest anchor."""
    if not anchors:
        raise MoveseqError("classify_segment needs at least one anchor")
    best_label, best_d = None, math.inf
    for anchor in anchors:
        d = distance_to_anchor(anchor, segment_embedding, metric)
        if d < best_d:
            best_label, best_d = anchor.class_label, d
    return best_label


def write_timeline_csv(timeline: DetectionTimeline, path) -> None:
    """CSV rows frame,distance,detected,quality (9 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("frame,distance,detected,quality\n")
        for r in timeline.records:
            quality = format(r.quality, ".9g") if r.detected else ""
            fh.write(f"{r.frame},{format(r.distance, '.9g')},{int(r.detected)},{quality}\n")


def read_timeline_csv(path) -> list[TimelineRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "frame,distance,detected,quality":
            raise MoveseqError(f"unexpected timeline header {header!r} in {path}")
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            frame, distance, detected, quality = raw.split(",")
            records.append(
                TimelineRecord(
                    frame=int(frame),
                    distance=float(distance),
                    detected=detected == "1",
                    quality=float(quality) if quality else None,
                )
            )
    return records
