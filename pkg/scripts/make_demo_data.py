#!/usr/bin/env python3
"""Generate a synthetic imitation-game corpus (sequences + annotations + manifest)."""

import argparse
import json
from pathlib import Path

from moveseq.skeleton import AnnotationSet, GameRecord, serialize_sequence, write_annotations
from moveseq.synthetic import concat_motions, make_motion

GAMES = [
    # (id, class, anchor kind, unrelated filler kind)
    ("g_wave", "wave", "wave", "bob"),
    ("g_bob", "bob", "bob", "sway"),
    ("g_sway", "sway", "sway", "wave"),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_data", help="output directory")
    parser.add_argument("--noise", type=float, default=0.005)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    records = []
    manifest = {"games": []}
    for i, (game_id, label, kind, _) in enumerate(GAMES):
        anchor = make_motion(kind, 40, noise=args.noise, seed=10 + i)
        idle1 = make_motion("idle", 30, noise=args.noise, seed=20 + i)
        idle2 = make_motion("idle", 25, noise=args.noise, seed=30 + i)
        target = concat_motions([idle1, anchor, idle2])
        serialize_sequence(anchor, out / f"{game_id}_anchor.jsonl")
        serialize_sequence(target, out / f"{game_id}_target.jsonl")
        records.append(GameRecord(
            id=game_id, class_label=label,
            anchor_intervals=((0, 39),),
            target_intervals=((30, 69),),
            idle_interval=(0, 29),
        ))
        manifest["games"].append({
            "id": game_id,
            "anchor": f"{game_id}_anchor.jsonl",
            "target": f"{game_id}_target.jsonl",
        })

    write_annotations(AnnotationSet(games=tuple(records)), out / "annotations.json")
    (out / "corpus.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(GAMES)} games to {out}/")


if __name__ == "__main__":
    main()
