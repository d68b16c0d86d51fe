import numpy as np
import pytest

from moveseq import (
    FeatureLayout,
    GameRecord,
    MoveseqError,
    PipelineConfig,
    TcnConfig,
    build_anchor,
    detect_stream,
    emit_timeline,
    encode_sequence,
    init_seeded,
    run_game,
    static_threshold,
)
from moveseq.matcher import DetectionTimeline, read_timeline_csv
from moveseq.pipeline import _map_interval
from moveseq.synthetic import apply_rigid, random_rotation

from conftest import tiny_motion

TINY_TCN = TcnConfig(input_dim=43, filters=16, kernel_size=3, num_blocks=2, dilations=(1, 2), window_w=8)
TINY_MODEL = init_seeded(TINY_TCN, seed=21)


def tiny_cfg(**kw):
    defaults = dict(tcn=TINY_TCN, m=3, alpha=0.40, dynamic=True, frame_skip=1)
    defaults.update(kw)
    return PipelineConfig(**defaults)


class TestEncode:
    def test_embedding_count_and_dim(self):
        seq = tiny_motion("wave", 23, noise=0.01)
        embeddings = encode_sequence(seq, TINY_MODEL, tiny_cfg())
        assert embeddings.shape == (23, 16)
        assert (embeddings >= 0).all()

    def test_single_frame(self):
        seq = tiny_motion("idle", 1)
        embeddings = encode_sequence(seq, TINY_MODEL, tiny_cfg())
        assert embeddings.shape == (1, 16)

    def test_streaming_causality_under_truncation(self):
        seq = tiny_motion("wave", 30, noise=0.01)
        full = encode_sequence(seq, TINY_MODEL, tiny_cfg())
        prefix_seq = tiny_motion("wave", 30, noise=0.01)
        prefix_seq.poses = prefix_seq.poses[:18]
        prefix = encode_sequence(prefix_seq, TINY_MODEL, tiny_cfg())
        np.testing.assert_array_equal(full[:18], prefix)

    def test_rigid_invariance_with_angles_disabled(self, small_model, rng):
        layout = FeatureLayout(include_angles=False)  # norm + distances = 33 dims
        cfg = tiny_cfg(tcn=small_model.config, features=layout)
        seq = tiny_motion("wave", 20, noise=0.01)
        moved = apply_rigid(seq, rotation=random_rotation(rng), translation=rng.normal(size=3), scale=2.3)
        a = encode_sequence(seq, small_model, cfg)
        b = encode_sequence(moved, small_model, cfg)
        np.testing.assert_allclose(a, b, atol=1e-6)

    def test_frame_skip(self):
        seq = tiny_motion("wave", 21, noise=0.01)
        embeddings = encode_sequence(seq, TINY_MODEL, tiny_cfg(frame_skip=2))
        assert embeddings.shape == (11, 16)

    def test_dim_mismatch_rejected(self, small_model):
        seq = tiny_motion("idle", 3)
        with pytest.raises(MoveseqError, match="does not match model input"):
            encode_sequence(seq, small_model, tiny_cfg(tcn=small_model.config))

    def test_deterministic(self):
        seq = tiny_motion("wave", 15, noise=0.02)
        a = encode_sequence(seq, TINY_MODEL, tiny_cfg())
        b = encode_sequence(tiny_motion("wave", 15, noise=0.02), TINY_MODEL, tiny_cfg())
        np.testing.assert_array_equal(a, b)


def self_match_game():
    """Anchor wave; target = idle + exact copy of the anchor + idle."""
    anchor = tiny_motion("wave", 20, noise=0.01, seed=4)
    idle_a = tiny_motion("idle", 15, noise=0.01, seed=5)
    idle_b = tiny_motion("idle", 15, noise=0.01, seed=6)
    coords = np.concatenate([idle_a.joint_array(), anchor.joint_array(), idle_b.joint_array()])
    from conftest import sequence_from_coords, tiny_topology

    target = sequence_from_coords(tiny_topology(), coords)
    game = GameRecord(
        id="g1", class_label="wave",
        anchor_intervals=((0, 19),),
        target_intervals=((15, 34),),
        idle_interval=(0, 14),
    )
    return anchor, target, game


class TestRunGame:
    def test_self_match_detected_near_copy_end(self):
        anchor, target, game = self_match_game()
        timeline, result = run_game([anchor], target, game, TINY_MODEL, tiny_cfg())
        detected = timeline.detected_frames()
        end = 34
        assert any(end <= n <= end + TINY_TCN.window_w for n in detected) or any(
            game.target_intervals[0][0] <= n <= end for n in detected
        )
        assert result.tp == 1 and result.fn == 0
        # the aligned copy reproduces the anchor window exactly
        assert min(r.distance for r in timeline.records) <= 1e-9

    def test_remote_target_has_no_detections_at_tiny_alpha(self):
        anchor, _, game = self_match_game()
        far = tiny_motion("idle", 40, noise=0.01, seed=9)
        game_far = GameRecord(id="g2", class_label="wave", anchor_intervals=((0, 19),),
                              target_intervals=(), idle_interval=(0, 14))
        timeline, result = run_game([anchor], far, game_far, TINY_MODEL, tiny_cfg(alpha=1e-6, dynamic=False))
        assert timeline.detected_frames() == []
        assert result.fp == 0

    def test_zero_embedding_target_below_alpha(self, rng):
        anchor = build_anchor([rng.uniform(0.1, 1.0, (3, 16))], m=3, class_label="a")
        zeros = np.zeros((10, 16))
        timeline = detect_stream(anchor, zeros, static_threshold(0.9), "cos")
        assert timeline.detected_frames() == []  # zero-vs-nonzero distance is 1

    def test_m3_detections_superset_of_m1(self):
        anchor, target, game = self_match_game()
        alpha = 0.35
        t1, _ = run_game([anchor], target, game, TINY_MODEL, tiny_cfg(m=1, alpha=alpha, dynamic=False))
        t3, _ = run_game([anchor], target, game, TINY_MODEL, tiny_cfg(m=3, alpha=alpha, dynamic=False))
        assert set(t1.detected_frames()) <= set(t3.detected_frames())

    def test_dynamic_threshold_subset(self):
        anchor, target, game = self_match_game()
        t_static, _ = run_game([anchor], target, game, TINY_MODEL, tiny_cfg(dynamic=False))
        t_dynamic, _ = run_game([anchor], target, game, TINY_MODEL, tiny_cfg(dynamic=True))
        assert set(t_dynamic.detected_frames()) <= set(t_static.detected_frames())
        assert t_dynamic.threshold.effective_alpha <= t_static.threshold.effective_alpha

    def test_empty_anchor_interval_rejected(self):
        anchor, target, _ = self_match_game()
        game = GameRecord(id="g", class_label="wave", anchor_intervals=((4, 5),),
                          target_intervals=(), idle_interval=None)
        # stride 3 maps [4, 5] -> [2, 1], an empty interval
        with pytest.raises(MoveseqError, match="empty"):
            run_game([anchor], target, game, TINY_MODEL, tiny_cfg(frame_skip=3))

    def test_anchor_interval_out_of_bounds(self):
        anchor, target, _ = self_match_game()
        game = GameRecord(id="g", class_label="wave", anchor_intervals=((0, 99),),
                          target_intervals=(), idle_interval=None)
        with pytest.raises(MoveseqError, match="bounds"):
            run_game([anchor], target, game, TINY_MODEL, tiny_cfg())

    def test_anchor_sequence_interval_pairing(self):
        anchor, target, game = self_match_game()
        game2 = GameRecord(id="g", class_label="wave",
                           anchor_intervals=((0, 19), (0, 19)),
                           target_intervals=game.target_intervals, idle_interval=game.idle_interval)
        # one sequence, many intervals: allowed; mismatched counts: rejected
        run_game([anchor], target, game2, TINY_MODEL, tiny_cfg())
        run_game([anchor, anchor], target, game2, TINY_MODEL, tiny_cfg())
        game3 = GameRecord(id="g", class_label="wave",
                           anchor_intervals=((0, 19), (0, 19), (0, 19)),
                           target_intervals=(), idle_interval=None)
        with pytest.raises(MoveseqError, match="paired"):
            run_game([anchor, anchor], target, game3, TINY_MODEL, tiny_cfg())


class TestIntervalMapping:
    def test_stride_mapping(self):
        assert _map_interval((4, 11), 2) == (2, 5)
        assert _map_interval((5, 5), 2) == (3, 2)  # empty after mapping
        assert _map_interval((0, 9), 1) == (0, 9)

    def test_resampled_detection_frames_reference_resampled_indices(self):
        anchor, target, game = self_match_game()
        timeline, _ = run_game([anchor], target, game, TINY_MODEL, tiny_cfg(frame_skip=2, alpha=0.5, dynamic=False))
        assert timeline.records[-1].frame == len(target.poses[::2]) - 1


class TestEmitTimeline:
    def test_empty_timeline_header_only(self, tmp_path):
        timeline = DetectionTimeline(records=(), threshold=static_threshold(0.4), metric="cos")
        path = tmp_path / "empty.csv"
        emit_timeline(timeline, path)
        assert path.read_text() == "frame,distance,detected,quality\n"

    def test_single_detection_row(self, tmp_path, rng):
        anchor = build_anchor([rng.uniform(0.1, 1.0, (1, 8))], m=1, class_label="a")
        timeline = detect_stream(anchor, anchor.embeddings, static_threshold(0.5))
        path = tmp_path / "one.csv"
        emit_timeline(timeline, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].split(",")[2] == "1"

    def test_round_trip(self, tmp_path):
        anchor, target, game = self_match_game()
        timeline, _ = run_game([anchor], target, game, TINY_MODEL, tiny_cfg())
        path = tmp_path / "t.csv"
        emit_timeline(timeline, path)
        back = read_timeline_csv(path)
        assert [r.frame for r in back] == [r.frame for r in timeline.records]
        assert [r.detected for r in back] == [r.detected for r in timeline.records]
