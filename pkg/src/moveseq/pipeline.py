"""End-to-end composition: sequence -> embeddings -> detection -> matching.

One pipeline instance per stream; the TCN weights are shared read-only.
Frame n's embedding only ever sees frames <= n (streaming semantics), so
truncating a target leaves all earlier embeddings and detections intact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MoveseqError
from .evaluation import GameEval, MatchResult, match_detections
from .features import FeatureLayout, feature_matrix
from .matcher import (
    DetectionTimeline,
    build_anchor,
    detect_stream,
    dynamic_threshold,
    static_threshold,
    write_timeline_csv,
)
from .normalization import NormalizationConfig, normalize_sequence
from .skeleton import GameRecord, SkeletonSequence, repair_pose, resample
from .tcn import TcnConfig, TcnModel, forward_windows


@dataclass(frozen=True)
class PipelineConfig:
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)
    features: FeatureLayout = field(default_factory=FeatureLayout)
    tcn: TcnConfig = field(default_factory=TcnConfig)
    metric: str = "cos"
    m: int = 3
    alpha: float = 0.40
    dynamic: bool = True
    frame_skip: int = 1

    def __post_init__(self):
        if self.metric not in ("cos", "js"):
            raise MoveseqError(f"unknown metric {self.metric!r}")
        if self.m < 1:
            raise MoveseqError("m must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise MoveseqError("alpha must be in [0, 1]")
        if self.frame_skip < 1:
            raise MoveseqError("frame_skip must be >= 1")

    def check_dims(self, topology) -> None:
        dim = self.features.dim(topology.n_joints, topology.n_bones)
        if dim != self.tcn.input_dim:
            raise MoveseqError(
                f"feature layout yields {dim} inputs but the TCN expects {self.tcn.input_dim}"
            )


def encode_sequence(seq: SkeletonSequence, model: TcnModel, cfg: PipelineConfig) -> np.ndarray:
    """Streaming embeddings for every frame: (N, embedding_dim).

    Applies frame skipping, repair, normalization, feature assembly and
    the windowed encoder; frame n's window holds frames max(0, n-w+1)..n
    left-padded with zero feature frames.
    """
    if cfg.frame_skip > 1:
        seq = resample(seq, cfg.frame_skip)
    seq, _ = repair_pose(seq)
    seq_norm, _ = normalize_sequence(seq, cfg.normalization)
    feats = feature_matrix(seq, seq_norm, cfg.features)
    if feats.shape[1] != model.config.input_dim:
        raise MoveseqError(
            f"feature dimension {feats.shape[1]} does not match model input {model.config.input_dim}"
        )
    w = model.config.window_w
    padded = np.vstack([np.zeros((w - 1, feats.shape[1])), feats])
    windows = np.stack([padded[i : i + w] for i in range(len(seq))]) if len(seq) else np.zeros((0, w, feats.shape[1]))
    return forward_windows(model, windows)


def _map_interval(interval: tuple[int, int], stride: int) -> tuple[int, int]:
    s, e = interval
    return (-(-s // stride), e // stride)


def _anchor_embedding_lists(
    anchor_seqs: list[SkeletonSequence],
    intervals: tuple[tuple[int, int], ...],
    model: TcnModel,
    cfg: PipelineConfig,
) -> list[np.ndarray]:
    if not intervals:
        raise MoveseqError("game has no anchor intervals")
    if len(anchor_seqs) == 1:
        pairing = [(anchor_seqs[0], iv) for iv in intervals]
    elif len(anchor_seqs) == len(intervals):
        pairing = list(zip(anchor_seqs, intervals))
    else:
        raise MoveseqError(
            f"{len(anchor_seqs)} anchor sequences cannot be paired with {len(intervals)} anchor intervals"
        )
    encoded: dict[int, np.ndarray] = {}
    lists = []
    for seq, interval in pairing:
        key = id(seq)
        if key not in encoded:
            encoded[key] = encode_sequence(seq, model, cfg)
        embeddings = encoded[key]
        s, e = _map_interval(interval, cfg.frame_skip)
        if s > e:
            raise MoveseqError(f"anchor interval {interval} empty after frame skipping")
        if s < 0 or e >= len(embeddings):
            raise MoveseqError(f"anchor interval {interval} out of sequence bounds")
        lists.append(embeddings[s : e + 1])
    return lists


def prepare_game(
    anchor_seqs: list[SkeletonSequence],
    target_seq: SkeletonSequence,
    game: GameRecord,
    model: TcnModel,
    cfg: PipelineConfig,
) -> GameEval:
    """Encode one game into sweep-ready inputs.

    The anchor representation takes the last m embeddings of each
    annotated anchor interval; idle embeddings are the target embeddings
    over the annotated idle interval, when present.
    """
    anchor_lists = _anchor_embedding_lists(anchor_seqs, game.anchor_intervals, model, cfg)
    anchor = build_anchor(anchor_lists, cfg.m, game.class_label)
    target_embeddings = encode_sequence(target_seq, model, cfg)

    idle = None
    if game.idle_interval is not None:
        a, b = _map_interval(game.idle_interval, cfg.frame_skip)
        if a < 0 or b >= len(target_embeddings) or a > b:
            raise MoveseqError(f"idle interval {game.idle_interval} out of target bounds")
        idle = target_embeddings[a : b + 1]
    gt = tuple(_map_interval(iv, cfg.frame_skip) for iv in game.target_intervals)
    return GameEval(anchor=anchor, target_embeddings=target_embeddings, gt_intervals=gt, idle_embeddings=idle)


def run_game(
    anchor_seqs: list[SkeletonSequence],
    target_seq: SkeletonSequence,
    game: GameRecord,
    model: TcnModel,
    cfg: PipelineConfig,
) -> tuple[DetectionTimeline, MatchResult]:
    """Detect one game's anchor action in its target stream and score it."""
    ge = prepare_game(anchor_seqs, target_seq, game, model, cfg)
    if cfg.dynamic and ge.idle_embeddings is not None:
        threshold = dynamic_threshold(cfg.alpha, ge.anchor, ge.idle_embeddings, cfg.metric)
    else:
        threshold = static_threshold(cfg.alpha)
    timeline = detect_stream(ge.anchor, ge.target_embeddings, threshold, cfg.metric)
    result = match_detections(timeline, ge.gt_intervals, w=model.config.window_w)
    return timeline, result


def emit_timeline(timeline: DetectionTimeline, path) -> None:
    """Write the timeline CSV (frame,distance,detected,quality)."""
    write_timeline_csv(timeline, path)
