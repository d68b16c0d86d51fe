"""Windowed detection evaluation: TP/FP/FN matching, PR sweeps, reports.

A detection at frame n matches a ground-truth interval [s, e] when
s <= n <= e + w, i.e. while the action runs or within the encoder window
after it ends. Every matched interval counts exactly one TP regardless of
how many detections reference it; unmatched detections are grouped
left-to-right (successive frames with gap <= w share a group) and each
group counts one FP; each unmatched interval counts one FN.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import MoveseqError
from .matcher import AnchorRepresentation, DetectionTimeline, anchor_distances, nearest_rank_p10


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    matched: tuple[tuple[tuple[int, int], int], ...]  # (gt interval, first matching detection)
    fp_groups: tuple[tuple[int, int], ...]  # frame ranges of grouped false detections


@dataclass(frozen=True)
class ClassMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    alpha: float
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    per_class: dict[str, ClassMetrics]
    macro: dict[str, float] | None = None


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    best_index: int
    metric: str
    m: int
    dynamic: bool

    @property
    def best(self) -> SweepPoint:
        return self.points[self.best_index]


@dataclass(frozen=True)
class GameEval:
    """Pre-encoded inputs for sweeping one game."""

    anchor: AnchorRepresentation
    target_embeddings: np.ndarray
    gt_intervals: tuple[tuple[int, int], ...]
    idle_embeddings: np.ndarray | None = None
    frames: tuple[int, ...] | None = None


def _sorted_intervals(gt) -> list[tuple[int, int]]:
    intervals = sorted((int(s), int(e)) for s, e in gt)
    for s, e in intervals:
        if s > e:
            raise MoveseqError(f"ground-truth interval [{s}, {e}] has start > end")
    for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
        if s2 <= e1:
            raise MoveseqError(f"overlapping ground-truth intervals [{s1},{e1}] and [{s2},{e2}]")
    return intervals


def _match_frames(detected_frames, gt, w: int) -> MatchResult:
    if w < 1:
        raise MoveseqError("matching window w must be >= 1")
    frames = sorted(set(int(n) for n in detected_frames))
    intervals = _sorted_intervals(gt)

    matched = []
    fn = 0
    claimed = set()
    for s, e in intervals:
        hits = [n for n in frames if s <= n <= e + w]
        if hits:
            matched.append(((s, e), hits[0]))
            claimed.update(hits)
        else:
            fn += 1
    unmatched = [n for n in frames if n not in claimed]

    fp_groups = []
    for n in unmatched:
        if fp_groups and n - fp_groups[-1][1] <= w:
            fp_groups[-1][1] = n
        else:
            fp_groups.append([n, n])
    return MatchResult(
        tp=len(matched),
        fp=len(fp_groups),
        fn=fn,
        matched=tuple(matched),
        fp_groups=tuple((a, b) for a, b in fp_groups),
    )


def match_detections(timeline, gt, w: int) -> MatchResult:
    """Match a timeline's detections against ground-truth intervals."""
    if isinstance(timeline, DetectionTimeline):
        frames = timeline.detected_frames()
    else:
        frames = [r.frame for r in timeline if r.detected]
    return _match_frames(frames, gt, w)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def precision_recall_f1(m: MatchResult) -> tuple[float, float, float]:
    """Precision, recall and F1 with the empty-denominator = 1 convention."""
    return _prf(m.tp, m.fp, m.fn)


def sweep_thresholds(
    games: list[GameEval],
    alphas,
    metric: str = "cos",
    m: int = 1,
    dynamic: bool = False,
    w: int = 32,
) -> SweepResult:
    """PR curve over a threshold grid; best = max F1, ties to the smallest alpha.

    Distances (and the idle-derived threshold cap, when dynamic) are
    computed once per game; each alpha only re-thresholds them. Counts are
    aggregated by summation over games (micro averaging).
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise MoveseqError("alpha grid must be non-empty")
    prepared = []
    for game in games:
        distances = anchor_distances(game.anchor, game.target_embeddings, metric)
        frames = game.frames if game.frames is not None else tuple(range(len(distances)))
        cap = None
        if dynamic and game.idle_embeddings is not None and len(game.idle_embeddings):
            cap = nearest_rank_p10(anchor_distances(game.anchor, game.idle_embeddings, metric))
        prepared.append((distances, frames, cap, game.gt_intervals))

    points = []
    for alpha in alphas:
        tp = fp = fn = 0
        for distances, frames, cap, gt in prepared:
            effective = alpha if cap is None else min(alpha, cap)
            detected = [frames[i] for i in np.flatnonzero(distances < effective)]
            result = _match_frames(detected, gt, w)
            tp, fp, fn = tp + result.tp, fp + result.fp, fn + result.fn
        precision, recall, f1 = _prf(tp, fp, fn)
        points.append(SweepPoint(alpha=alpha, precision=precision, recall=recall, f1=f1))

    best_index = 0
    for i, point in enumerate(points):
        if point.f1 > points[best_index].f1:
            best_index = i
    return SweepResult(points=tuple(points), best_index=best_index, metric=metric, m=m, dynamic=dynamic)


def per_class_report(
    results: list[tuple[str, MatchResult]], alpha: float, macro: bool = False
) -> EvalReport:
    """Aggregate per-game match results by class label, then overall.

    Overall counts are micro-aggregated (summed); macro=True adds
    per-game-averaged precision/recall/f1.
    """
    per_class: dict[str, list[MatchResult]] = {}
    for label, result in results:
        per_class.setdefault(label, []).append(result)

    class_metrics = {}
    for label in sorted(per_class):
        tp = sum(r.tp for r in per_class[label])
        fp = sum(r.fp for r in per_class[label])
        fn = sum(r.fn for r in per_class[label])
        p, r, f1 = _prf(tp, fp, fn)
        class_metrics[label] = ClassMetrics(tp=tp, fp=fp, fn=fn, precision=p, recall=r, f1=f1)

    tp = sum(c.tp for c in class_metrics.values())
    fp = sum(c.fp for c in class_metrics.values())
    fn = sum(c.fn for c in class_metrics.values())
    p, r, f1 = _prf(tp, fp, fn)

    macro_block = None
    if macro:
        rows = [_prf(res.tp, res.fp, res.fn) for _, res in results]
        macro_block = {
            "precision": float(np.mean([row[0] for row in rows])),
            "recall": float(np.mean([row[1] for row in rows])),
            "f1": float(np.mean([row[2] for row in rows])),
        }
    return EvalReport(alpha=alpha, tp=tp, fp=fp, fn=fn, precision=p, recall=r, f1=f1,
                      per_class=class_metrics, macro=macro_block)


def write_report_json(report: EvalReport, path) -> None:
    obj = {
        "alpha": report.alpha,
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "per_class": {
            label: {"tp": c.tp, "fp": c.fp, "fn": c.fn,
                    "precision": c.precision, "recall": c.recall, "f1": c.f1}
            for label, c in report.per_class.items()
        },
    }
    if report.macro is not None:
        obj["macro"] = report.macro
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_pr_csv(sweep: SweepResult, path) -> None:
    """PR curve CSV alpha,precision,recall,f1 plus a best-F1 marker column."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "precision", "recall", "f1", "best"])
        for i, point in enumerate(sweep.points):
            writer.writerow([
                format(point.alpha, ".12g"),
                format(point.precision, ".9g"),
                format(point.recall, ".9g"),
                format(point.f1, ".9g"),
                int(i == sweep.best_index),
            ])
