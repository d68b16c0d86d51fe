"""Dilated causal temporal-convolution encoder with a hard input window.

The encoder maps a window of up to ``window_w`` feature frames to one
embedding. Shorter windows are left-padded with zero frames; the engine
never sees more than ``window_w`` frames, which pins the effective memory
regardless of the theoretical receptive field of the convolution stack.

Block i (1-based), with one convolution per configured dilation:

    h = relu(conv_i1(x)); h = relu(conv_i2(h)); h = conv_i3(h)
    out_i = relu(h + residual_i(x))

residual_i is a 1x1 projection when the block's input width differs from
``filters`` and the identity otherwise. The model output is
relu(sum_i skip_i(out_i)) with per-block 1x1 skip projections, and the
embedding is the output at the last time step, so every embedding entry
is nonnegative. All arithmetic is float64.

Weight files (``moveseq-tcn/1``) are JSON with the config and named
layers "block{i}.conv{j}" / "block{i}.residual" / "block{i}.skip", each
followed by its ".bias" entry. Conv weights are shaped [kernel, in, out]
and written row-major with 17 significant digits.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import MoveseqError, SchemaError

WEIGHTS_FORMAT = "moveseq-tcn/1"


@dataclass(frozen=True)
class TcnConfig:
    input_dim: int = 423
    filters: int = 256
    kernel_size: int = 4
    num_blocks: int = 2
    dilations: tuple[int, ...] = (1, 2, 4)
    window_w: int = 32
    embedding_dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "dilations", tuple(int(d) for d in self.dilations))
        if self.embedding_dim is None:
            object.__setattr__(self, "embedding_dim", self.filters)
        values = (self.input_dim, self.filters, self.kernel_size, self.num_blocks, self.window_w, *self.dilations)
        if any(v < 1 for v in values):
            raise MoveseqError("all TCN hyperparameters must be positive")
        if self.embedding_dim != self.filters:
            raise MoveseqError("embedding_dim must equal filters")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "filters": self.filters,
            "kernel_size": self.kernel_size,
            "num_blocks": self.num_blocks,
            "dilations": list(self.dilations),
            "window_w": self.window_w,
            "embedding_dim": self.embedding_dim,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TcnConfig":
        try:
            return cls(
                input_dim=int(obj["input_dim"]),
                filters=int(obj["filters"]),
                kernel_size=int(obj["kernel_size"]),
                num_blocks=int(obj["num_blocks"]),
                dilations=tuple(int(d) for d in obj["dilations"]),
                window_w=int(obj["window_w"]),
                embedding_dim=int(obj.get("embedding_dim", obj["filters"])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad TCN config: {exc}") from exc


@dataclass(frozen=True)
class LayerWeights:
    name: str
    weight: np.ndarray  # convs: (kernel, in, out); 1x1 projections: (1, in, out)
    bias: np.ndarray  # (out,)


@dataclass(frozen=True)
class BlockWeights:
    convs: tuple[LayerWeights, ...]
    residual: LayerWeights | None  # None when input width == filters
    skip: LayerWeights


@dataclass(frozen=True)
class TcnModel:
    config: TcnConfig
    blocks: tuple[BlockWeights, ...]

    def __post_init__(self):
        for layer in self.iter_layers():
            if not (np.isfinite(layer.weight).all() and np.isfinite(layer.bias).all()):
                raise SchemaError(f"non-finite values in layer {layer.name}")
        for name, shape in _expected_shapes(self.config).items():
            layer = self.layer(name)
            actual = layer.weight.shape if not name.endswith(".bias") else layer.bias.shape
            if actual != shape:
                raise SchemaError(f"layer {name}: expected shape {shape}, got {actual}")

    def iter_layers(self):
        for block in self.blocks:
            yield from block.convs
            if block.residual is not None:
                yield block.residual
            yield block.skip

    def layer(self, name: str) -> LayerWeights:
        base = name[: -len(".bias")] if name.endswith(".bias") else name
        for layer in self.iter_layers():
            if layer.name == base:
                return layer
        raise SchemaError(f"unknown layer {name!r}")


def _block_in_dim(config: TcnConfig, block_index: int) -> int:
    return config.input_dim if block_index == 0 else config.filters


def _expected_shapes(config: TcnConfig) -> dict[str, tuple[int, ...]]:
    """Canonical layer name -> shape map, in enumeration order."""
    shapes: dict[str, tuple[int, ...]] = {}
    for b in range(config.num_blocks):
        in_dim = _block_in_dim(config, b)
        width = in_dim
        for j in range(len(config.dilations)):
            shapes[f"block{b + 1}.conv{j + 1}"] = (config.kernel_size, width, config.filters)
            shapes[f"block{b + 1}.conv{j + 1}.bias"] = (config.filters,)
            width = config.filters
        if in_dim != config.filters:
            shapes[f"block{b + 1}.residual"] = (1, in_dim, config.filters)
            shapes[f"block{b + 1}.residual.bias"] = (config.filters,)
        shapes[f"block{b + 1}.skip"] = (1, config.filters, config.filters)
        shapes[f"block{b + 1}.skip.bias"] = (config.filters,)
    return shapes


def _splitmix64_uniform(seed: int, count: int) -> np.ndarray:
    """count outputs of SplitMix64(seed) mapped to [-0.05, 0.05)."""
    gamma = np.uint64(0x9E3779B97F4A7C15)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + np.arange(1, count + 1, dtype=np.uint64) * gamma
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return ((z >> np.uint64(11)).astype(np.float64) * 2.0**-53 - 0.5) * 0.1


def init_seeded(config: TcnConfig, seed: int) -> TcnModel:
    """Deterministic model: parameters drawn from a SplitMix64 stream.

    Parameters are consumed block-major, layer-major (convs in dilation
    order, then residual when present, then skip), weight tensor before
    bias, tensor entries in row-major [kernel][in][out] order.
    """
    shapes = _expected_shapes(config)
    total = sum(math.prod(s) for s in shapes.values())
    values = _splitmix64_uniform(seed, total)
    tensors: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in shapes.items():
        size = math.prod(shape)
        tensors[name] = values[offset : offset + size].reshape(shape)
        offset += size
    return _model_from_tensors(config, tensors)


def _model_from_tensors(config: TcnConfig, tensors: dict[str, np.ndarray]) -> TcnModel:
    blocks = []
    for b in range(config.num_blocks):
        prefix = f"block{b + 1}"
        convs = tuple(
            LayerWeights(f"{prefix}.conv{j + 1}", tensors[f"{prefix}.conv{j + 1}"], tensors[f"{prefix}.conv{j + 1}.bias"])
            for j in range(len(config.dilations))
        )
        residual = None
        if _block_in_dim(config, b) != config.filters:
            residual = LayerWeights(f"{prefix}.residual", tensors[f"{prefix}.residual"], tensors[f"{prefix}.residual.bias"])
        skip = LayerWeights(f"{prefix}.skip", tensors[f"{prefix}.skip"], tensors[f"{prefix}.skip.bias"])
        blocks.append(BlockWeights(convs=convs, residual=residual, skip=skip))
    return TcnModel(config=config, blocks=tuple(blocks))


def _causal_conv(x: np.ndarray, layer: LayerWeights, dilation: int) -> np.ndarray:
    """Left-zero-padded dilated convolution over (B, T, C_in) -> (B, T, C_out).

    Small batches accumulate one GEMM per kernel tap; larger batches stack
    the taps into a single GEMM, which is about twice as fast here.
    """
    batch, t, c_in = x.shape
    kernel = layer.weight.shape[0]
    pad = (kernel - 1) * dilation
    xp = np.zeros((batch, t + pad, c_in))
    xp[:, pad:] = x
    if batch <= 2 or kernel == 1:
        y = xp[:, 0:t] @ layer.weight[0]
        for tau in range(1, kernel):
            y += xp[:, tau * dilation : tau * dilation + t] @ layer.weight[tau]
        y += layer.bias
        return y
    stacked = np.empty((batch, t, kernel * c_in))
    for tau in range(kernel):
        stacked[:, :, tau * c_in : (tau + 1) * c_in] = xp[:, tau * dilation : tau * dilation + t]
    y = stacked.reshape(batch * t, kernel * c_in) @ layer.weight.reshape(kernel * c_in, -1)
    y += layer.bias
    return y.reshape(batch, t, -1)


def _forward_padded(model: TcnModel, windows: np.ndarray) -> np.ndarray:
    """Forward (B, window_w, input_dim) -> (B, embedding_dim) embeddings."""
    cfg = model.config
    x = windows
    skip_sum = None
    for block in model.blocks:
        h = x
        for j, (conv, dilation) in enumerate(zip(block.convs, cfg.dilations)):
            h = _causal_conv(h, conv, dilation)
            if j < len(block.convs) - 1:
                np.maximum(h, 0.0, out=h)
        if block.residual is not None:
            h += x @ block.residual.weight[0] + block.residual.bias
        else:
            h += x
        np.maximum(h, 0.0, out=h)
        x = h
        s = x @ block.skip.weight[0] + block.skip.bias
        skip_sum = s if skip_sum is None else skip_sum + s
    np.maximum(skip_sum, 0.0, out=skip_sum)
    return skip_sum[:, -1, :]


def _as_window_array(window, input_dim: int) -> np.ndarray:
    arr = np.asarray(window, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != input_dim:
        raise MoveseqError(f"window frames must have {input_dim} features, got shape {arr.shape}")
    return arr


def forward_window(model: TcnModel, window) -> np.ndarray:
    """Embed one window of 1..window_w feature frames (left zero padding)."""
    cfg = model.config
    arr = _as_window_array(window, cfg.input_dim)
    if not 1 <= arr.shape[0] <= cfg.window_w:
        raise MoveseqError(f"window length must be in [1, {cfg.window_w}], got {arr.shape[0]}")
    padded = np.zeros((1, cfg.window_w, cfg.input_dim))
    padded[0, cfg.window_w - arr.shape[0] :] = arr
    return _forward_padded(model, padded)[0]


def forward_windows(model: TcnModel, windows: np.ndarray, chunk: int = 24) -> np.ndarray:
    """Embed a batch of already-padded (B, window_w, input_dim) windows."""
    cfg = model.config
    if windows.ndim != 3 or windows.shape[1:] != (cfg.window_w, cfg.input_dim):
        raise MoveseqError(
            f"expected windows of shape (B, {cfg.window_w}, {cfg.input_dim}), got {windows.shape}"
        )
    out = np.empty((windows.shape[0], cfg.embedding_dim))
    for start in range(0, windows.shape[0], chunk):
        stop = min(start + chunk, windows.shape[0])
        out[start:stop] = _forward_padded(model, np.ascontiguousarray(windows[start:stop], dtype=np.float64))
    return out


class EmbeddingStreamState:
    """Per-stream ring buffer of the most recent window_w feature frames."""

    def __init__(self, window_w: int):
        self.buffer: deque[np.ndarray] = deque(maxlen=window_w)
        self.frames_seen = 0

    def push(self, frame: np.ndarray) -> None:
        self.buffer.append(np.array(frame, dtype=np.float64, copy=True))
        self.frames_seen += 1


def stream_step(model: TcnModel, state: EmbeddingStreamState, frame) -> np.ndarray:
    """Push one feature frame and return the embedding for the buffered window."""
    arr = np.asarray(frame, dtype=np.float64)
    if arr.shape != (model.config.input_dim,):
        raise MoveseqError(f"frame must have {model.config.input_dim} features, got shape {arr.shape}")
    state.push(arr)
    return forward_window(model, np.stack(state.buffer))


def save_weights(model: TcnModel, path) -> None:
    """Write the model as canonical moveseq-tcn/1 JSON (deterministic bytes)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('{"format":"%s","config":%s,"layers":[' % (
            WEIGHTS_FORMAT, json.dumps(model.config.to_dict(), separators=(",", ":"))))
        first = True
        for layer in model.iter_layers():
            for name, tensor in ((layer.name, layer.weight), (layer.name + ".bias", layer.bias)):
                if not first:
                    fh.write(",")
                first = False
                shape = json.dumps(list(tensor.shape), separators=(",", ":"))
                data = ",".join(format(v, ".17g") for v in tensor.reshape(-1))
                fh.write('{"name":"%s","shape":%s,"data":[%s]}' % (name, shape, data))
        fh.write("]}\n")


def load_weights(path) -> TcnModel:
    """Load and validate a moveseq-tcn/1 weight file."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed weight file: {exc.msg}") from exc
    if not isinstance(obj, dict) or obj.get("format") != WEIGHTS_FORMAT:
        raise SchemaError(f"weight file format mismatch: expected {WEIGHTS_FORMAT!r}")
    config = TcnConfig.from_dict(obj.get("config", {}))
    expected = _expected_shapes(config)
    tensors: dict[str, np.ndarray] = {}
    for entry in obj.get("layers", []):
        try:
            name = entry["name"]
            shape = tuple(int(s) for s in entry["shape"])
            data = np.asarray(entry["data"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed layer entry: {exc}") from exc
        if name not in expected:
            raise SchemaError(f"unexpected layer {name!r}")
        if name in tensors:
            raise SchemaError(f"duplicate layer {name!r}")
        if shape != expected[name]:
            raise SchemaError(f"layer {name}: expected shape {expected[name]}, got {shape}")
        if data.size != math.prod(shape):
            raise SchemaError(f"layer {name}: data length {data.size} does not match shape {shape}")
        if not np.isfinite(data).all():
            raise SchemaError(f"layer {name}: non-finite values")
        tensors[name] = data.reshape(shape)
    missing = set(expected) - set(tensors)
    if missing:
        raise SchemaError(f"missing layers: {sorted(missing)}")
    return _model_from_tensors(config, tensors)
