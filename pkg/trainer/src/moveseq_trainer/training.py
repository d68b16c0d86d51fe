"""Classification pretraining of the motion encoder with export to the engine.

The backbone is trained with a categorical cross-entropy head on fixed
(window x features) crops of augmented sequences; after training the head
is discarded and the backbone weights are written as moveseq-tcn/1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .augment import crop_pad_features, random_augment
from .geometry import feature_matrix
from .network import Classifier, NetConfig, export_tensors
from .sequences import Sequence, read_jsonl
from .weights_io import write_weights


@dataclass
class TrainConfig:
    dataset_dir: str
    export_path: str
    filters: int = 48
    kernel_size: int = 4
    num_blocks: int = 2
    dilations: tuple[int, ...] = (1, 2, 4)
    window: int = 32
    epochs: int = 20
    batch_size: int = 8
    learning_rate: float = 5e-3
    seed: int = 0
    val_fraction: float = 0.2
    augment_speed: bool = True
    augment_hflip: bool = True
    augment_frame_skip: bool = False

    def __post_init__(self):
        positive = (self.filters, self.kernel_size, self.num_blocks, self.window,
                    self.epochs + 1, self.batch_size, *self.dilations)
        if any(v < 1 for v in positive) or self.learning_rate <= 0:
            raise ValueError("hyperparameters must be positive (epochs may be zero)")


@dataclass
class TrainReport:
    weights_path: str
    classes: tuple[str, ...]
    epoch_losses: list[float] = field(default_factory=list)
    val_accuracy: float | None = None
    n_train: int = 0
    n_val: int = 0


class TrainingDiverged(RuntimeError):
    def __init__(self, message: str, report: TrainReport):
        super().__init__(message)
        self.report = report


def load_dataset(dataset_dir) -> tuple[list[tuple[Sequence, str]], tuple[str, ...]]:
    """Read <dataset_dir>/<class_label>/*.jsonl into labeled sequences."""
    root = Path(dataset_dir)
    classes = tuple(sorted(p.name for p in root.iterdir() if p.is_dir()))
    if not classes:
        raise ValueError(f"no class directories under {root}")
    samples = []
    for label in classes:
        for path in sorted((root / label).glob("*.jsonl")):
            samples.append((read_jsonl(path), label))
    if not samples:
        raise ValueError(f"no .jsonl sequences under {root}")
    return samples, classes


def _last_window(features: np.ndarray, window: int) -> np.ndarray:
    start = max(0, features.shape[0] - window)
    return crop_pad_features(features[start:], window)


def _ensure_finite(loss: float, where: str, report: TrainReport) -> None:
    if not np.isfinite(loss):
        raise TrainingDiverged(f"loss diverged ({loss}) at {where}", report)


def pretrain_and_export(cfg: TrainConfig) -> TrainReport:
    """Train the classifier, drop the head, export backbone weights.

    epochs=0 exports the seeded initialization unchanged.
    """
    samples, classes = load_dataset(cfg.dataset_dir)
    input_dim = samples[0][0].topology.feature_dim
    net_cfg = NetConfig(
        input_dim=input_dim, filters=cfg.filters, kernel_size=cfg.kernel_size,
        num_blocks=cfg.num_blocks, dilations=tuple(cfg.dilations), window=cfg.window,
    )
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    model = Classifier(net_cfg, n_classes=len(classes))
    report = TrainReport(weights_path=str(cfg.export_path), classes=classes)

    # stratified split: every k-th sample of each class goes to validation
    by_class: dict[str, list[Sequence]] = {}
    for seq, label in samples:
        by_class.setdefault(label, []).append(seq)
    train_set, val_set = [], []
    val_every = max(2, int(round(1.0 / cfg.val_fraction))) if cfg.val_fraction > 0 else 0
    for label, seqs in by_class.items():
        for i, seq in enumerate(seqs):
            if val_every and i % val_every == val_every - 1:
                val_set.append((seq, label))
            else:
                train_set.append((seq, label))
    report.n_train, report.n_val = len(train_set), len(val_set)
    label_index = {label: i for i, label in enumerate(classes)}

    def batch_tensor(batch):
        windows = []
        for seq, _ in batch:
            augmented = random_augment(
                seq, rng, speed=cfg.augment_speed,
                frame_skip=cfg.augment_frame_skip, hflip=cfg.augment_hflip,
            )
            features = feature_matrix(augmented)
            windows.append(crop_pad_features(features, cfg.window, rng=rng))
        x = torch.from_numpy(np.stack(windows))
        y = torch.tensor([label_index[label] for _, label in batch])
        return x, y

    if cfg.epochs > 0:
        optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
        loss_fn = nn.CrossEntropyLoss()
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(train_set))
            epoch_loss = 0.0
            for start in range(0, len(order), cfg.batch_size):
                batch = [train_set[i] for i in order[start : start + cfg.batch_size]]
                x, y = batch_tensor(batch)
                optimizer.zero_grad()
                loss = loss_fn(model(x), y)
                value = float(loss.detach())
                _ensure_finite(value, f"epoch {epoch} step {start // cfg.batch_size}", report)
                loss.backward()
                optimizer.step()
                epoch_loss += value * len(batch)
            report.epoch_losses.append(epoch_loss / len(train_set))

    if val_set:
        with torch.no_grad():
            windows = np.stack([_last_window(feature_matrix(seq), cfg.window) for seq, _ in val_set])
            logits = model(torch.from_numpy(windows))
            predicted = logits.argmax(dim=1).numpy()
        truth = np.array([label_index[label] for _, label in val_set])
        report.val_accuracy = float((predicted == truth).mean())

    write_weights(net_cfg.to_engine_dict(), export_tensors(model.backbone), cfg.export_path)
    return report
