#!/usr/bin/env python3
"""Per-frame latency breakdown of the streaming path (25-joint stream)."""

import argparse
import time

import numpy as np

from moveseq import (
    EmbeddingStreamState,
    NormalizationConfig,
    TcnConfig,
    compute_frame_transform,
    init_seeded,
    kinect25,
    normalize_pose,
    stream_step,
)
from moveseq.features import bone_angles, pairwise_distances
from moveseq.synthetic import make_motion


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    model = init_seeded(TcnConfig(), seed=args.seed)
    topo = kinect25()
    cfg = NormalizationConfig()
    seq = make_motion("wave", args.frames, noise=0.01, seed=1)

    state = EmbeddingStreamState(model.config.window_w)
    prev = None
    t_norm = t_feat = t_tcn = 0.0
    for pose in seq.poses:
        t0 = time.perf_counter()
        tf = compute_frame_transform(pose, topo, cfg, prev=prev)
        prev = tf
        pose_norm = normalize_pose(pose, tf)
        t1 = time.perf_counter()
        frame = np.concatenate([
            pose_norm.joints.reshape(-1),
            pairwise_distances(pose_norm),
            bone_angles(pose, topo),
        ])
        t2 = time.perf_counter()
        stream_step(model, state, frame)
        t3 = time.perf_counter()
        t_norm += t1 - t0
        t_feat += t2 - t1
        t_tcn += t3 - t2

    n = len(seq)
    total = (t_norm + t_feat + t_tcn) / n * 1e3
    print(f"frames: {n}")
    print(f"normalization: {t_norm / n * 1e3:8.3f} ms/frame")
    print(f"features:      {t_feat / n * 1e3:8.3f} ms/frame")
    print(f"tcn forward:   {t_tcn / n * 1e3:8.3f} ms/frame")
    print(f"total:         {total:8.3f} ms/frame")


if __name__ == "__main__":
    main()
