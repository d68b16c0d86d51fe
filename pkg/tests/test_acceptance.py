"""Acceptance suite: one test and one printed pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
Everything runs on deterministic seeded weights; no trained model needed.
"""

import math
import time

import numpy as np

from moveseq import (
    EmbeddingStreamState,
    GameRecord,
    NormalizationConfig,
    PipelineConfig,
    TcnConfig,
    build_anchor,
    compute_frame_transform,
    cosine_distance,
    detect_stream,
    distance_to_anchor,
    dynamic_threshold,
    feature_matrix,
    forward_window,
    init_seeded,
    js_distance,
    kinect25,
    normalize_pose,
    normalize_sequence,
    static_threshold,
    stream_step,
    sweep_thresholds,
)
from moveseq.evaluation import _match_frames, write_pr_csv
from moveseq.features import bone_angles, pairwise_distances
from moveseq.matcher import anchor_distances, nearest_rank_p10
from moveseq.pipeline import encode_sequence, prepare_game, run_game
from moveseq.skeleton import Pose, SkeletonSequence
from moveseq.synthetic import concat_motions, make_motion, random_rotation, rest_pose_kinect25

from conftest import planted_corpus
from test_evaluation import brute_force_match, random_instance
from test_matcher import js_oracle


def check(name: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" — {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_feature_dimension_reproduction():
    """25 joints, 24 bones -> 423 features exactly."""
    topo = kinect25()
    seq = make_motion("wave", 2)
    seq_norm, _ = normalize_sequence(seq)
    matrix = feature_matrix(seq, seq_norm)
    parts = (3 * topo.n_joints, topo.n_joints * (topo.n_joints - 1) // 2, 2 * topo.n_bones)
    check(
        "feature-dimension reproduction",
        matrix.shape[1] == 423 and sum(parts) == 423 and parts == (75, 300, 48),
        f"dim={matrix.shape[1]} (75+300+48)",
    )


def test_normalization_invariance_suite():
    """1000 random poses x random rigid+scale: outputs match to 1e-6; torso = target."""
    topo = kinect25()
    rest = rest_pose_kinect25()
    cfg = NormalizationConfig()
    rng = np.random.default_rng(2024)
    worst_coord = worst_dist = worst_torso = 0.0
    for _ in range(1000):
        joints = rest + rng.normal(0.0, 0.05, rest.shape)
        pose = Pose(0, joints, np.ones(25, bool))
        q = random_rotation(rng)
        t = rng.uniform(-5, 5, 3)
        s = float(np.exp(rng.uniform(-2, 2)))
        moved = Pose(0, s * joints @ q.T + t, np.ones(25, bool))
        a = normalize_pose(pose, compute_frame_transform(pose, topo, cfg))
        b = normalize_pose(moved, compute_frame_transform(moved, topo, cfg))
        worst_coord = max(worst_coord, float(np.abs(a.joints - b.joints).max()))
        worst_dist = max(worst_dist, float(np.abs(pairwise_distances(a) - pairwise_distances(b)).max()))
        torso = np.linalg.norm(a.joints[topo.spine_shoulder] - a.joints[topo.spine_base])
        worst_torso = max(worst_torso, abs(torso - cfg.torso_target_length))
    check(
        "normalization invariance suite",
        worst_coord < 1e-6 and worst_dist < 1e-6 and worst_torso < 1e-9,
        f"max coord dev {worst_coord:.2e}, max dist dev {worst_dist:.2e}, max torso dev {worst_torso:.2e}",
    )


def test_online_equals_offline_oracle():
    """Streaming equals windowed batch at every step; evicted frames are inert."""
    config = TcnConfig()
    model = init_seeded(config, seed=123)
    rng = np.random.default_rng(7)
    frames = rng.normal(size=(100, config.input_dim))
    state = EmbeddingStreamState(config.window_w)
    w = config.window_w
    worst = 0.0
    for n in range(len(frames)):
        online = stream_step(model, state, frames[n])
        offline = forward_window(model, frames[max(0, n - w + 1) : n + 1])
        worst = max(worst, float(np.abs(online - offline).max()))

    n_total = w + 5
    base = rng.normal(size=(n_total, config.input_dim))
    mutated = base.copy()
    mutated[2] += 1e6  # evicted by the final step: n_total-1-2 >= w
    finals = []
    for stream in (base, mutated):
        st = EmbeddingStreamState(w)
        for f in stream:
            emb = stream_step(model, st, f)
        finals.append(emb)
    bit_neutral = bool((finals[0] == finals[1]).all())
    check(
        "online == offline oracle",
        worst < 1e-6 and bit_neutral,
        f"max stream/batch dev {worst:.2e}, evicted-frame mutation bit-neutral={bit_neutral}",
    )


def test_distance_function_properties():
    """10k random nonnegative pairs: identity, symmetry, range; js vs oracle at 1e-9."""
    rng = np.random.default_rng(99)
    n_pairs, dim = 10_000, 256
    z1 = rng.uniform(0, 5, (n_pairs, dim))
    z2 = rng.uniform(0, 5, (n_pairs, dim))
    ok_props = True
    worst_oracle = 0.0
    for i in range(n_pairs):
        for fn in (cosine_distance, js_distance):
            d = fn(z1[i], z2[i])
            ok_props &= fn(z1[i], z2[i]) == fn(z2[i], z1[i])
            ok_props &= 0.0 <= d <= 1.0
            ok_props &= fn(z1[i], z1[i]) <= 1e-12
        worst_oracle = max(worst_oracle, abs(js_distance(z1[i], z2[i]) - js_oracle(z1[i], z2[i])))
    check(
        "distance-function properties",
        ok_props and worst_oracle < 1e-9,
        f"10k pairs, max |js - oracle| = {worst_oracle:.2e}",
    )


def test_extended_anchor_and_dynamic_threshold():
    """d_m <= d_1 on supersets; DT only tightens; DT detections subset; P10 rule."""
    rng = np.random.default_rng(321)
    ok_dm = ok_dt = ok_subset = True
    for _ in range(300):
        embeddings = rng.uniform(0, 2, (10, 32))
        single = build_anchor([embeddings], m=1, class_label="a")
        extended = build_anchor([embeddings], m=int(rng.integers(2, 6)), class_label="a")
        z = rng.uniform(0, 2, 32)
        metric = "cos" if rng.integers(2) else "js"
        ok_dm &= distance_to_anchor(extended, z, metric) <= distance_to_anchor(single, z, metric) + 1e-15

        alpha = float(rng.uniform(0, 1))
        idle = rng.uniform(0, 2, (int(rng.integers(1, 15)), 32))
        th = dynamic_threshold(alpha, extended, idle, metric)
        ok_dt &= th.effective_alpha <= alpha

        target = rng.uniform(0, 2, (30, 32))
        with_dt = detect_stream(extended, target, th, metric).detected_frames()
        without = detect_stream(extended, target, static_threshold(alpha), metric).detected_frames()
        ok_subset &= set(with_dt) <= set(without)

    hand = nearest_rank_p10([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    check(
        "extended anchor / dynamic threshold behavior",
        ok_dm and ok_dt and ok_subset and hand == 0.1,
        f"300 random trials; P10 of 10-value example = {hand}",
    )


def test_metric_harness_oracle(tmp_path):
    """Brute-force match parity on 10k instances; curve shape on the planted corpus."""
    rng = np.random.default_rng(555)
    agree = True
    for _ in range(10_000):
        frames, intervals, w = random_instance(rng)
        result = _match_frames(frames, intervals, w)
        agree &= (result.tp, result.fp, result.fn) == brute_force_match(frames, intervals, w)

    grid = [i / 100 for i in range(101)]
    sweep_m1 = sweep_thresholds(planted_corpus(m=1), grid, metric="cos", m=1, w=32)
    sweep_m3 = sweep_thresholds(planted_corpus(m=3), grid, metric="cos", m=3, w=32)
    recall_monotone = precision_monotone = True
    for sweep in (sweep_m1, sweep_m3):
        recalls = [p.recall for p in sweep.points]
        precisions = [p.precision for p in sweep.points]
        recall_monotone &= all(a <= b + 1e-12 for a, b in zip(recalls, recalls[1:]))
        precision_monotone &= all(a + 1e-12 >= b for a, b in zip(precisions, precisions[1:]))

    path = tmp_path / "pr.csv"
    write_pr_csv(sweep_m3, path)
    marked = [line for line in path.read_text().splitlines()[1:] if line.endswith(",1")]
    fig7 = (
        sweep_m1.best.f1 == 1.0
        and sweep_m3.best.f1 == 1.0
        and math.isclose(sweep_m1.best.alpha, 0.48)
        and math.isclose(sweep_m3.best.alpha, 0.40)
        and sweep_m3.best.alpha < sweep_m1.best.alpha
        and len(marked) == 1
        and marked[0].startswith("0.4,")
    )
    check(
        "metric-harness oracle",
        agree and recall_monotone and precision_monotone and fig7,
        f"10k brute-force instances agree={agree}; best alpha m=1 {sweep_m1.best.alpha:.2f} vs m=3 {sweep_m3.best.alpha:.2f}",
    )


def _self_match_fixture():
    model = init_seeded(TcnConfig(), seed=0)
    cfg = PipelineConfig(m=3)
    anchor = make_motion("wave", 40, noise=0.005, seed=1)
    idle1 = make_motion("idle", 30, noise=0.005, seed=2)
    idle2 = make_motion("idle", 25, noise=0.005, seed=3)
    target = concat_motions([idle1, anchor, idle2])  # exact copy spans [30, 69]
    unrelated = make_motion("bob", 70, noise=0.005, seed=4)
    game = GameRecord(id="fix", class_label="wave", anchor_intervals=((0, 39),),
                      target_intervals=((30, 69),), idle_interval=(0, 29))
    return model, cfg, anchor, target, unrelated, game


def test_end_to_end_self_match():
    """Exact-copy target reaches F1=1 at the swept alpha; unrelated motion stays silent."""
    model, cfg, anchor, target, unrelated, game = _self_match_fixture()
    ge = prepare_game([anchor], target, game, model, cfg)
    grid = [i / 100 for i in range(61)]
    sweep = sweep_thresholds([ge], grid, metric=cfg.metric, m=cfg.m, dynamic=True, w=model.config.window_w)
    best = sweep.best

    unrelated_game = GameRecord(id="far", class_label="wave", anchor_intervals=((0, 39),),
                                target_intervals=(), idle_interval=(0, 29))
    cfg_at_best = PipelineConfig(m=cfg.m, alpha=best.alpha, dynamic=True)
    timeline, result = run_game([anchor], unrelated, unrelated_game, model, cfg_at_best)
    check(
        "end-to-end self-match",
        best.f1 == 1.0 and timeline.detected_frames() == [] and result.fp == 0,
        f"best alpha={best.alpha:.2f} F1={best.f1:.2f}; unrelated detections={len(timeline.detected_frames())}",
    )


def test_per_step_latency():
    """Amortized feature assembly + stream_step under 5 ms/frame on a 25-joint stream."""
    model = init_seeded(TcnConfig(), seed=0)
    topo = kinect25()
    norm_cfg = NormalizationConfig()
    seq = make_motion("wave", 150, noise=0.01, seed=6)
    runs = []
    for _ in range(2):
        state = EmbeddingStreamState(model.config.window_w)
        prev = None
        start = time.perf_counter()
        for pose in seq.poses:
            tf = compute_frame_transform(pose, topo, norm_cfg, prev=prev)
            prev = tf
            pose_norm = normalize_pose(pose, tf)
            frame = np.concatenate([
                pose_norm.joints.reshape(-1),
                pairwise_distances(pose_norm),
                bone_angles(pose, topo),
            ])
            stream_step(model, state, frame)
        runs.append((time.perf_counter() - start) / len(seq))
    per_frame_ms = min(runs) * 1e3
    check(
        "per-step latency",
        per_frame_ms < 5.0,
        f"measured {per_frame_ms:.2f} ms/frame (budget 5 ms)",
    )
