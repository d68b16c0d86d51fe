"""Command-line surface for batch and reproduction workflows.

Subcommands: init-weights, normalize, features, encode, detect, classify,
eval, sweep. Exit codes: 0 success, 1 domain error, 2 usage error. Every
subcommand is deterministic given identical inputs and flags; the only
randomness (weight initialization) is seeded via --seed.

The sweep corpus manifest is JSON: {"games": [{"id": str, "anchor": path
or [paths], "target": path}]} with paths relative to the manifest file.
Timeline files consumed by `eval` are named <game_id>.csv.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import MoveseqError
from .evaluation import match_detections, per_class_report, sweep_thresholds, write_pr_csv, write_report_json
from .features import FeatureLayout, feature_matrix
from .matcher import METRICS, build_anchor, distance_to_anchor, read_timeline_csv
from .normalization import NormalizationConfig, normalize_sequence
from .pipeline import PipelineConfig, emit_timeline, encode_sequence, prepare_game, run_game
from .skeleton import parse_annotations, parse_sequence, repair_pose, serialize_sequence
from .tcn import TcnConfig, init_seeded, load_weights, save_weights


def _fmt17(x: float) -> str:
    return format(x, ".17g")


def _pipeline_config(args, model) -> PipelineConfig:
    return PipelineConfig(
        features=FeatureLayout.from_flags(args.features),
        tcn=model.config,
        metric=args.metric,
        m=args.m,
        alpha=getattr(args, "alpha", 0.40),
        dynamic=getattr(args, "dynamic", True),
        frame_skip=getattr(args, "frame_skip", 1),
    )


def cmd_init_weights(args) -> int:
    config = TcnConfig()
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = TcnConfig.from_dict(json.load(fh))
    model = init_seeded(config, args.seed)
    save_weights(model, args.out)
    return 0


def cmd_normalize(args) -> int:
    seq = parse_sequence(args.infile)
    seq, _ = repair_pose(seq)
    cfg = NormalizationConfig(torso_target_length=args.torso_length, scale_mode=args.scale_mode)
    seq_norm, _ = normalize_sequence(seq, cfg)
    serialize_sequence(seq_norm, args.out)
    return 0


def cmd_features(args) -> int:
    layout = FeatureLayout.from_flags(args.features)
    seq = parse_sequence(args.infile)
    seq, _ = repair_pose(seq)
    seq_norm, _ = normalize_sequence(seq, NormalizationConfig())
    matrix = feature_matrix(seq, seq_norm, layout)
    with open(args.out, "w", encoding="utf-8") as fh:
        header = {"format": "moveseq-feat/1", "dim": matrix.shape[1], "features": args.features}
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for i, row in enumerate(matrix):
            fh.write('{"frame":%d,"vector":[%s]}\n' % (i, ",".join(_fmt17(v) for v in row)))
    return 0


def cmd_encode(args) -> int:
    model = load_weights(args.weights)
    seq = parse_sequence(args.infile)
    cfg = _pipeline_config(args, model)
    embeddings = encode_sequence(seq, model, cfg)
    with open(args.out, "w", encoding="utf-8") as fh:
        header = {"format": "moveseq-emb/1", "dim": embeddings.shape[1]}
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for i, row in enumerate(embeddings):
            fh.write('{"frame":%d,"embedding":[%s]}\n' % (i, ",".join(_fmt17(v) for v in row)))
    return 0


def _select_game(annotations, game_id):
    if game_id is not None:
        return annotations.by_id(game_id)
    if len(annotations.games) != 1:
        raise MoveseqError("annotation file holds several games; pick one with --game")
    return annotations.games[0]


def cmd_detect(args) -> int:
    model = load_weights(args.weights)
    annotations = parse_annotations(args.annotations)
    game = _select_game(annotations, args.game)
    anchor_seqs = [parse_sequence(p) for p in args.anchor]
    target_seq = parse_sequence(args.target)
    cfg = _pipeline_config(args, model)
    timeline, result = run_game(anchor_seqs, target_seq, game, model, cfg)
    emit_timeline(timeline, args.out)
    print(
        f"game={game.id} detections={len(timeline.detected_frames())} "
        f"tp={result.tp} fp={result.fp} fn={result.fn} "
        f"effective_alpha={timeline.threshold.effective_alpha:.6g}",
        file=sys.stderr,
    )
    return 0


def cmd_classify(args) -> int:
    model = load_weights(args.weights)
    cfg = _pipeline_config(args, model)
    anchor_files = sorted(Path(args.anchors).glob("*.jsonl"))
    if not anchor_files:
        raise MoveseqError(f"no anchor sequence files (*.jsonl) in {args.anchors}")
    anchors = []
    for path in anchor_files:
        embeddings = encode_sequence(parse_sequence(path), model, cfg)
        anchors.append(build_anchor([embeddings], cfg.m, class_label=path.stem))
    segment = encode_sequence(parse_sequence(args.segment), model, cfg)
    if len(segment) == 0:
        raise MoveseqError("segment sequence is empty")
    query = segment[-1]
    distances = {a.class_label: distance_to_anchor(a, query, cfg.metric) for a in anchors}
    label = min(anchors, key=lambda a: distances[a.class_label]).class_label
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"label": label, "distances": distances}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(label)
    return 0


def cmd_eval(args) -> int:
    annotations = parse_annotations(args.annotations)
    results = []
    for game in annotations.games:
        path = Path(args.timelines) / f"{game.id}.csv"
        if not path.exists():
            raise MoveseqError(f"missing timeline file {path}")
        records = read_timeline_csv(path)
        results.append((game.class_label, match_detections(records, game.target_intervals, w=args.w)))
    alpha = args.alpha if args.alpha is not None else math.nan
    report = per_class_report(results, alpha=alpha, macro=args.macro)
    write_report_json(report, args.out)
    print(f"precision={report.precision:.4f} recall={report.recall:.4f} f1={report.f1:.4f}", file=sys.stderr)
    return 0


def _parse_grid(spec: str) -> list[float]:
    try:
        start, stop, step = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise MoveseqError(f"bad --alpha-grid {spec!r}, expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise MoveseqError(f"bad --alpha-grid {spec!r}")
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(count) if start + i * step <= stop + 1e-12]


def cmd_sweep(args) -> int:
    model = load_weights(args.weights)
    annotations = parse_annotations(args.annotations)
    cfg = _pipeline_config(args, model)
    root = Path(args.corpus).parent
    with open(args.corpus, encoding="utf-8") as fh:
        manifest = json.load(fh)
    games = []
    for entry in manifest["games"]:
        game = annotations.by_id(entry["id"])
        anchors = entry["anchor"] if isinstance(entry["anchor"], list) else [entry["anchor"]]
        anchor_seqs = [parse_sequence(root / p) for p in anchors]
        target_seq = parse_sequence(root / entry["target"])
        games.append(prepare_game(anchor_seqs, target_seq, game, model, cfg))
    sweep = sweep_thresholds(
        games, _parse_grid(args.alpha_grid), metric=cfg.metric, m=cfg.m,
        dynamic=cfg.dynamic, w=model.config.window_w,
    )
    write_pr_csv(sweep, args.out)
    best = sweep.best
    print(f"best alpha={best.alpha:.6g} f1={best.f1:.4f}", file=sys.stderr)
    return 0


def _add_feature_flags(parser, with_metric=True):
    parser.add_argument("--features", default="norm,geom", help="comma set of coords,norm,geom")
    if with_metric:
        parser.add_argument("--metric", choices=sorted(METRICS), default="cos")
        parser.add_argument("--m", type=int, default=3, help="anchor embeddings kept per sequence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moveseq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init-weights", help="write deterministic seeded weights")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="TCN config JSON (defaults when omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_init_weights)

    p = sub.add_parser("normalize", help="dump a normalized sequence")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale-mode", choices=["per_frame", "sequence_median"], default="per_frame")
    p.add_argument("--torso-length", type=float, default=1.0)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("features", help="dump per-frame feature vectors")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--features", default="norm,geom")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("encode", help="dump streaming embeddings")
    p.add_argument("--weights", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--frame-skip", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_feature_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("detect", help="detect an anchor action inside a target stream")
    p.add_argument("--weights", required=True)
    p.add_argument("--anchor", action="append", required=True, help="anchor sequence file (repeatable)")
    p.add_argument("--annotations", required=True)
    p.add_argument("--game", help="game id when the annotation file holds several")
    p.add_argument("--target", required=True)
    p.add_argument("--alpha", type=float, default=0.40)
    p.add_argument("--dynamic", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--frame-skip", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_feature_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("classify", help="nearest-anchor classification of a segment")
    p.add_argument("--weights", required=True)
    p.add_argument("--anchors", required=True, help="directory of per-class anchor .jsonl files")
    p.add_argument("--segment", required=True)
    p.add_argument("--out", help="optional JSON with per-class distances")
    _add_feature_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="score timeline CSVs against annotations")
    p.add_argument("--timelines", required=True, help="directory of <game_id>.csv files")
    p.add_argument("--annotations", required=True)
    p.add_argument("--w", type=int, default=32)
    p.add_argument("--alpha", type=float, default=None, help="recorded in the report")
    p.add_argument("--macro", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="PR curve over a threshold grid")
    p.add_argument("--weights", required=True)
    p.add_argument("--corpus", required=True, help="corpus manifest JSON")
    p.add_argument("--annotations", required=True)
    p.add_argument("--alpha-grid", default="0:1:0.01")
    p.add_argument("--dynamic", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--frame-skip", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_feature_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except MoveseqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
