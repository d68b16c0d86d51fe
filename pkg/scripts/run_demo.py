#!/usr/bin/env python3
"""End-to-end demo on the synthetic corpus: weights -> sweep -> detect -> eval.

Equivalent CLI session:
    moveseq init-weights --seed 0 --out w.json
    moveseq sweep --weights w.json --corpus demo_data/corpus.json \
        --annotations demo_data/annotations.json --alpha-grid 0:0.6:0.01 --out pr.csv
    moveseq detect --weights w.json --anchor ... --target ... --alpha <best> --out g.csv
    moveseq eval --timelines timelines/ --annotations demo_data/annotations.json --out report.json
"""

import argparse
import csv
import json
import subprocess
import sys
from pathlib import Path


def run(*args):
    cmd = [sys.executable, "-m", "moveseq", *map(str, args)]
    print("+", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="demo_data")
    parser.add_argument("--workdir", default="demo_out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--alpha-grid", default="0:0.6:0.01")
    args = parser.parse_args()

    data = Path(args.data)
    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    if not (data / "corpus.json").exists():
        subprocess.run([sys.executable, Path(__file__).with_name("make_demo_data.py"), "--out", data],
                       check=True)

    weights = work / "weights.json"
    run("init-weights", "--seed", args.seed, "--out", weights)
    run("sweep", "--weights", weights, "--corpus", data / "corpus.json",
        "--annotations", data / "annotations.json", "--alpha-grid", args.alpha_grid,
        "--out", work / "pr.csv")

    with open(work / "pr.csv") as fh:
        best = next(row for row in csv.DictReader(fh) if row["best"] == "1")
    print(f"best alpha={best['alpha']} precision={best['precision']} "
          f"recall={best['recall']} f1={best['f1']}")

    manifest = json.loads((data / "corpus.json").read_text())
    timelines = work / "timelines"
    timelines.mkdir(exist_ok=True)
    for entry in manifest["games"]:
        run("detect", "--weights", weights,
            "--anchor", data / entry["anchor"],
            "--annotations", data / "annotations.json",
            "--game", entry["id"],
            "--target", data / entry["target"],
            "--alpha", best["alpha"],
            "--out", timelines / f"{entry['id']}.csv")

    run("eval", "--timelines", timelines, "--annotations", data / "annotations.json",
        "--alpha", best["alpha"], "--out", work / "report.json")
    print(json.dumps(json.loads((work / "report.json").read_text()), indent=2))


if __name__ == "__main__":
    main()
