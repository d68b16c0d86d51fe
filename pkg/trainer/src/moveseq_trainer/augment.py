"""Random augmentations applied to raw joint coordinates before featurization."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .sequences import Sequence


def augment_speed(seq: Sequence, factor: float) -> Sequence:
    """Resample along time by linear interpolation; output length round(N * factor)."""
    if factor <= 0:
        raise ValueError(f"speed factor must be positive, got {factor}")
    n = len(seq)
    n_out = max(1, int(round(n * factor)))
    positions = np.minimum(np.arange(n_out) / factor, n - 1)
    lo = np.floor(positions).astype(int)
    hi = np.minimum(lo + 1, n - 1)
    frac = (positions - lo)[:, None, None]
    coords = (1.0 - frac) * seq.coords[lo] + frac * seq.coords[hi]
    return seq.with_coords(coords)


def augment_frame_skip(seq: Sequence, stride: int) -> Sequence:
    """Keep one frame out of every `stride` (the engine's resampling rule)."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return replace(seq, coords=seq.coords[::stride], fps=seq.fps / stride)


def augment_hflip(seq: Sequence, axis: int = 0) -> Sequence:
    """Swap left/right joints and negate the horizontal axis; an involution."""
    mirrored = seq.coords[:, list(seq.topology.mirror_map), :].copy()
    mirrored[:, :, axis] = -mirrored[:, :, axis]
    return seq.with_coords(mirrored)


def crop_pad_features(features: np.ndarray, window: int, start: int | None = None,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Fixed-size window: random contiguous crop when longer, left zero-pad when shorter."""
    n, dim = features.shape
    if n == 0:
        raise ValueError("cannot crop or pad an empty feature sequence")
    if n == window:
        return features
    if n > window:
        if start is None:
            start = int(rng.integers(0, n - window + 1)) if rng is not None else 0
        if not 0 <= start <= n - window:
            raise ValueError(f"crop start {start} out of range for {n} -> {window}")
        return features[start : start + window]
    out = np.zeros((window, dim))
    out[window - n :] = features
    return out


def random_augment(seq: Sequence, rng: np.random.Generator, *, speed: bool = True,
                   speed_range: tuple[float, float] = (0.7, 1.4),
                   frame_skip: bool = False, hflip: bool = True) -> Sequence:
    """The training-time augmentation pipeline over raw coordinates."""
    if speed:
        seq = augment_speed(seq, float(rng.uniform(*speed_range)))
    if frame_skip:
        seq = augment_frame_skip(seq, int(rng.choice([2, 3])))
    if hflip and rng.random() < 0.5:
        seq = augment_hflip(seq)
    return seq
