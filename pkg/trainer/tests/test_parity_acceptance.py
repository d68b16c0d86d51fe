"""Secondary acceptance: the engine reproduces the trainer's forward pass.

The trainer talks to the engine only through its external surfaces: the
moveseq-seq/1 sequence files it writes, the moveseq-tcn/1 weight file it
exports, and the engine CLI (`python -m moveseq encode` / `classify`).
Run with `pytest -s` to see the PASS lines.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import torch

from moveseq_trainer import (
    MotionTcn,
    NetConfig,
    TrainConfig,
    import_tensors,
    pretrain_and_export,
    read_weights,
    stream_embeddings,
    write_jsonl,
)
from moveseq_trainer.geometry import feature_matrix
from moveseq_trainer.synthetic import CLASSES, make_sample, write_dataset

pytest.importorskip("moveseq", reason="the engine package must be installed for parity checks")


def engine(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "moveseq", *map(str, args)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, f"engine CLI failed: {proc.stderr}"
    return proc.stdout


def engine_encode(weights: Path, seq_path: Path, out: Path) -> np.ndarray:
    engine("encode", "--weights", weights, "--in", seq_path, "--out", out)
    lines = out.read_text().splitlines()
    return np.array([json.loads(line)["embedding"] for line in lines[1:]])


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("parity")
    write_dataset(root / "data", n_per_class=30, seed=0)
    cfg = TrainConfig(dataset_dir=root / "data", export_path=root / "trained.json", seed=0)
    report = pretrain_and_export(cfg)
    return root, cfg, report


def test_forward_parity_on_100_held_out_windows(trained):
    root, cfg, _ = trained
    config, tensors = read_weights(root / "trained.json")
    net_cfg = NetConfig(
        input_dim=config["input_dim"], filters=config["filters"],
        kernel_size=config["kernel_size"], num_blocks=config["num_blocks"],
        dilations=tuple(config["dilations"]), window=config["window_w"],
    )
    torch.manual_seed(123)
    model = import_tensors(MotionTcn(net_cfg), tensors)

    rng = np.random.default_rng(50_000)
    worst = 0.0
    n_windows = 0
    for i in range(4):
        seq = make_sample(CLASSES[i % 3], rng, n_frames=25)
        seq_path = root / f"heldout_{i}.jsonl"
        write_jsonl(seq, seq_path)
        ours = stream_embeddings(model, feature_matrix(seq)).numpy()
        theirs = engine_encode(root / "trained.json", seq_path, root / f"emb_{i}.jsonl")
        assert theirs.shape == ours.shape
        worst = max(worst, float(np.abs(ours - theirs).max()))
        n_windows += len(seq)
    assert n_windows == 100
    print(f"[PASS] trainer parity — engine matches trainer on {n_windows} held-out windows, "
          f"max dev {worst:.2e} (tolerance 1e-4)")
    assert worst < 1e-4


def test_one_shot_classification_through_engine(trained):
    root, cfg, report = trained
    rng = np.random.default_rng(60_000)
    anchors = root / "anchors"
    anchors.mkdir(exist_ok=True)
    for label in CLASSES:
        write_jsonl(make_sample(label, rng), anchors / f"{label}.jsonl")

    correct = total = 0
    for label in CLASSES:
        for k in range(5):
            seq_path = root / f"segment_{label}_{k}.jsonl"
            write_jsonl(make_sample(label, rng), seq_path)
            predicted = engine(
                "classify", "--weights", root / "trained.json",
                "--anchors", anchors, "--segment", seq_path, "--m", "1",
            ).strip()
            correct += predicted == label
            total += 1
    accuracy = correct / total
    print(f"[PASS] one-shot classification — {correct}/{total} = {accuracy:.3f} "
          f"via engine classify (threshold 0.9); trainer val acc {report.val_accuracy}")
    assert accuracy > 0.9
