"""Torch implementation of the motion encoder, structurally identical to the engine.

Per block: two ReLU-separated dilated causal convolutions followed by a
third, a 1x1 residual projection when the channel width changes (identity
otherwise), ReLU; per-block 1x1 skip projections are summed and ReLU'd,
and the embedding is the last time step. Causality comes from explicit
left zero padding of (kernel-1)*dilation per convolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn


@dataclass(frozen=True)
class NetConfig:
    input_dim: int
    filters: int = 256
    kernel_size: int = 4
    num_blocks: int = 2
    dilations: tuple[int, ...] = (1, 2, 4)
    window: int = 32

    def to_engine_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "filters": self.filters,
            "kernel_size": self.kernel_size,
            "num_blocks": self.num_blocks,
            "dilations": list(self.dilations),
            "window_w": self.window,
            "embedding_dim": self.filters,
        }


class _Block(nn.Module):
    def __init__(self, cfg: NetConfig, in_channels: int, dtype):
        super().__init__()
        self.dilations = cfg.dilations
        convs = []
        width = in_channels
        for d in cfg.dilations:
            convs.append(nn.Conv1d(width, cfg.filters, cfg.kernel_size, dilation=d, dtype=dtype))
            width = cfg.filters
        self.convs = nn.ModuleList(convs)
        self.kernel = cfg.kernel_size
        self.residual = (
            nn.Conv1d(in_channels, cfg.filters, 1, dtype=dtype) if in_channels != cfg.filters else None
        )
        self.skip = nn.Conv1d(cfg.filters, cfg.filters, 1, dtype=dtype)

    def forward(self, x):
        h = x
        for i, (conv, d) in enumerate(zip(self.convs, self.dilations)):
            h = conv(F.pad(h, ((self.kernel - 1) * d, 0)))
            if i < len(self.convs) - 1:
                h = F.relu(h)
        res = x if self.residual is None else self.residual(x)
        out = F.relu(h + res)
        return out, self.skip(out)


class MotionTcn(nn.Module):
    """Maps (B, window, input_dim) feature windows to (B, filters) embeddings."""

    def __init__(self, cfg: NetConfig, dtype=torch.float64):
        super().__init__()
        self.cfg = cfg
        blocks = []
        width = cfg.input_dim
        for _ in range(cfg.num_blocks):
            blocks.append(_Block(cfg, width, dtype))
            width = cfg.filters
        self.blocks = nn.ModuleList(blocks)

    def forward(self, x):
        h = x.transpose(1, 2)  # -> (B, C, T)
        skip_sum = None
        for block in self.blocks:
            h, skip = block(h)
            skip_sum = skip if skip_sum is None else skip_sum + skip
        out = F.relu(skip_sum)
        return out[:, :, -1]


class Classifier(nn.Module):
    """Encoder plus the softmax head used only during pretraining."""

    def __init__(self, cfg: NetConfig, n_classes: int, dtype=torch.float64):
        super().__init__()
        self.backbone = MotionTcn(cfg, dtype=dtype)
        self.head = nn.Linear(cfg.filters, n_classes, dtype=dtype)

    def forward(self, x):
        return self.head(self.backbone(x))


def stream_embeddings(model: MotionTcn, features) -> "torch.Tensor":
    """Per-frame embeddings with the engine's streaming semantics.

    Frame n is encoded from the window of frames max(0, n-w+1)..n,
    left-padded with zero feature frames to the full window length.
    """
    import numpy as np

    features = np.asarray(features, dtype=np.float64)
    w = model.cfg.window
    padded = np.vstack([np.zeros((w - 1, features.shape[1])), features])
    windows = np.stack([padded[i : i + w] for i in range(features.shape[0])])
    with torch.no_grad():
        return model(torch.from_numpy(windows))


def export_tensors(model: MotionTcn) -> dict:
    """Engine-format tensors: conv weights [kernel, in, out] plus biases."""
    tensors = {}
    for b, block in enumerate(model.blocks, start=1):
        for j, conv in enumerate(block.convs, start=1):
            name = f"block{b}.conv{j}"
            tensors[name] = conv.weight.detach().permute(2, 1, 0).numpy().astype(float)
            tensors[name + ".bias"] = conv.bias.detach().numpy().astype(float)
        if block.residual is not None:
            tensors[f"block{b}.residual"] = block.residual.weight.detach().permute(2, 1, 0).numpy().astype(float)
            tensors[f"block{b}.residual.bias"] = block.residual.bias.detach().numpy().astype(float)
        tensors[f"block{b}.skip"] = block.skip.weight.detach().permute(2, 1, 0).numpy().astype(float)
        tensors[f"block{b}.skip.bias"] = block.skip.bias.detach().numpy().astype(float)
    return tensors


def import_tensors(model: MotionTcn, tensors: dict) -> MotionTcn:
    """Load engine-format tensors back into a torch model (inverse of export)."""
    with torch.no_grad():
        for b, block in enumerate(model.blocks, start=1):
            for j, conv in enumerate(block.convs, start=1):
                conv.weight.copy_(torch.from_numpy(tensors[f"block{b}.conv{j}"]).permute(2, 1, 0))
                conv.bias.copy_(torch.from_numpy(tensors[f"block{b}.conv{j}.bias"]))
            if block.residual is not None:
                block.residual.weight.copy_(torch.from_numpy(tensors[f"block{b}.residual"]).permute(2, 1, 0))
                block.residual.bias.copy_(torch.from_numpy(tensors[f"block{b}.residual.bias"]))
            block.skip.weight.copy_(torch.from_numpy(tensors[f"block{b}.skip"]).permute(2, 1, 0))
            block.skip.bias.copy_(torch.from_numpy(tensors[f"block{b}.skip.bias"]))
    return model
