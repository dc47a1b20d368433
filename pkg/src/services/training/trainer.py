"""
Training loop: sample -> forward -> L1 -> backward -> Adam, epoch step-decay lr.

Writes the checkpoint (with manifest) and the per-iteration loss CSV
``epoch,iteration,loss,lr`` into the run's output directory.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.config.experiment import TrainConfig
from src.config.logging_config import setup_logger
from src.services.autodiff import ops
from src.services.autodiff.tensor import GradTape, Tensor
from src.services.exceptions import TrainingDivergedError
from src.services.harness.checkpoint import CheckpointInfo, save_checkpoint
from src.services.network.model import SuperResolutionModel
from src.services.training.dataset import ImageDataset
from src.services.training.optimizer import AdamState, adam_step, learning_rate
from src.services.training.sampler import SamplerStreams, TrainingBatch, sample_batch

logger = setup_logger(__name__)

LOSS_CSV_HEADER = ("epoch", "iteration", "loss", "lr")


@dataclass(frozen=True)
class LossRecord:
    epoch: int
    iteration: int
    loss: float
    lr: float


@dataclass
class LossHistory:
    records: list[LossRecord] = field(default_factory=list)

    def append(self, record: LossRecord) -> None:
        self.records.append(record)

    @property
    def losses(self) -> list[float]:
        return [record.loss for record in self.records]

    def epoch_mean(self, epoch: int) -> float:
        values = [record.loss for record in self.records if record.epoch == epoch]
        return float(np.mean(values)) if values else math.nan

    def moving_average(self, window: int) -> np.ndarray:
        """Trailing mean over ``window`` iterations (first value covers the first window)."""
        losses = np.asarray(self.losses, dtype=np.float64)
        if len(losses) < window:
            return np.asarray([losses.mean()]) if len(losses) else losses
        return np.convolve(losses, np.ones(window) / window, mode="valid")

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(LOSS_CSV_HEADER)
            for record in self.records:
                writer.writerow([record.epoch, record.iteration, repr(record.loss), repr(record.lr)])
        return path


@dataclass(frozen=True)
class TrainResult:
    model: SuperResolutionModel
    history: LossHistory
    checkpoint: CheckpointInfo | None
    loss_csv: Path | None


class Trainer:
    """Owns the model, optimizer state and sampling streams of one run."""

    def __init__(self, cfg: TrainConfig, dataset: ImageDataset, model: SuperResolutionModel | None = None) -> None:
        self.cfg = cfg
        self.dataset = dataset
        self.model = model or SuperResolutionModel.initialise(cfg.model_spec(), cfg.seed)
        self.streams = SamplerStreams.from_seed(cfg.seed)
        self.state = AdamState.initialise(self.model.named_parameters())
        self.history = LossHistory()

    def batch_loss(self, batch: TrainingBatch) -> Tensor:
        """Mean L1 over every query of the batch (forward only, records on the active tape)."""
        preds = []
        for sample in batch.samples:
            fm = self.model.encode(sample.lr)
            preds.append(self.model.query(fm, sample.coords, sample.cells))
        pred = preds[0] if len(preds) == 1 else ops.concat(preds, axis=0)
        return ops.l1_loss(pred, Tensor(batch.targets, dtype=pred.dtype))

    def step(self, batch: TrainingBatch, lr: float) -> float:
        """One optimisation step; returns the loss before the update."""
        params = self.model.named_parameters()
        with GradTape() as tape:
            loss = self.batch_loss(batch)
        value = loss.item()
        if not math.isfinite(value):
            return value
        grads = tape.backward(loss)
        adam_step(params, grads, self.state, lr)
        return value

    def train(self, output_dir: str | Path | None = None, run_name: str = "model") -> TrainResult:
        """
        Run every epoch of the config.

        With an output_dir, writes ``<run_name>.ckpt`` (+ manifest) and
        ``<run_name>_loss.csv`` there.

        Raises:
            TrainingDivergedError: a loss became NaN or infinite
        """
        cfg = self.cfg
        step = 0
        for epoch in range(cfg.epochs):
            lr = learning_rate(cfg.lr, epoch, cfg.lr_decay_every, cfg.lr_decay_factor)
            for iteration in range(cfg.iterations_per_epoch):
                batch = sample_batch(self.dataset, cfg, self.streams)
                loss = self.step(batch, lr)
                if not math.isfinite(loss):
                    logger.error("Training diverged at epoch %d iteration %d (step %d)", epoch, iteration, step)
                    raise TrainingDivergedError(epoch, iteration, step, loss)
                self.history.append(LossRecord(epoch, iteration, loss, lr))
                step += 1
            logger.info("Epoch %d/%d: mean L1 %.5f, lr %.3g", epoch + 1, cfg.epochs, self.history.epoch_mean(epoch), lr)

        checkpoint = loss_csv = None
        if output_dir is not None:
            output_dir = Path(output_dir)
            output_dir.mkdir(parents=True, exist_ok=True)
            checkpoint = save_checkpoint(self.model, output_dir / f"{run_name}.ckpt", metadata=cfg.as_dict())
            loss_csv = self.history.write_csv(output_dir / f"{run_name}_loss.csv")
        return TrainResult(self.model, self.history, checkpoint, loss_csv)


def train(dataset: ImageDataset, cfg: TrainConfig, output_dir: str | Path | None = None) -> TrainResult:
    """Train a fresh model from cfg.seed; output_dir defaults to cfg.output_path."""
    return Trainer(cfg, dataset).train(cfg.output_path if output_dir is None else output_dir)
