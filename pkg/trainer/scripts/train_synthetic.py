#!/usr/bin/env python3
"""Train on the synthetic 3-class corpus, export weights, probe the engine.

Writes the dataset, runs classification pretraining, exports moveseq-tcn/1
weights, and (when the engine package is installed) runs one-shot
classification of held-out segments through `python -m moveseq classify`.
"""

import argparse
import subprocess
import sys
from pathlib import Path

import numpy as np

from moveseq_trainer import TrainConfig, pretrain_and_export, write_jsonl
from moveseq_trainer.synthetic import CLASSES, make_sample, write_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="train_out")
    parser.add_argument("--n-per-class", type=int, default=30)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-engine-eval", action="store_true")
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    write_dataset(work / "data", n_per_class=args.n_per_class, seed=args.seed)

    cfg = TrainConfig(
        dataset_dir=work / "data",
        export_path=work / "trained.json",
        epochs=args.epochs,
        seed=args.seed,
    )
    report = pretrain_and_export(cfg)
    print(f"classes: {report.classes}")
    print(f"epoch losses: {[round(v, 4) for v in report.epoch_losses]}")
    print(f"validation accuracy (softmax head): {report.val_accuracy}")
    print(f"exported: {report.weights_path}")

    if args.skip_engine_eval:
        return
    rng = np.random.default_rng(args.seed + 1_000_000)
    anchors = work / "anchors"
    anchors.mkdir(exist_ok=True)
    for label in CLASSES:
        write_jsonl(make_sample(label, rng), anchors / f"{label}.jsonl")
    correct = total = 0
    for label in CLASSES:
        for k in range(5):
            segment = work / f"segment_{label}_{k}.jsonl"
            write_jsonl(make_sample(label, rng), segment)
            proc = subprocess.run(
                [sys.executable, "-m", "moveseq", "classify",
                 "--weights", work / "trained.json",
                 "--anchors", anchors, "--segment", segment, "--m", "1"],
                capture_output=True, text=True, check=True,
            )
            correct += proc.stdout.strip() == label
            total += 1
    print(f"one-shot accuracy through the engine: {correct}/{total} = {correct / total:.3f}")


if __name__ == "__main__":
    main()
