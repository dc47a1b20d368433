"""
K ablation: train one A-LIIF model per expansion rate under an identical
seed and budget, then score each on the validation images at eval_scale.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.config.experiment import TrainConfig, validate_train_config
from src.config.logging_config import setup_logger
from src.services.exceptions import ConfigError, ContractError, SuperResolutionError
from src.services.harness.evaluation import ModelUpscaler, score_method
from src.services.imaging.models import Image
from src.services.training.dataset import ImageDataset
from src.services.training.trainer import Trainer

logger = setup_logger(__name__)

ABLATION_COLUMNS = ("k", "psnr", "scale", "final_loss", "checksum", "status")


def parse_k_list(text: str) -> tuple[int, ...]:
    """'1,2,4' -> (1, 2, 4); every entry must be an integer >= 1."""
    values: list[int] = []
    for token in (part.strip() for part in text.split(",")):
        if not token:
            continue
        try:
            k = int(token)
        except ValueError:
            raise ConfigError("k-list", f"{token!r} is not an integer") from None
        if k < 1:
            raise ConfigError("k-list", "K must be ≥ 1")
        values.append(k)
    if not values:
        raise ConfigError("k-list", "no K values given")
    return tuple(values)


@dataclass
class AblationRow:
    k: int
    scale: float
    psnr: float = math.nan
    final_loss: float = math.nan
    checksum: str = ""
    error: str = ""

    @property
    def status(self) -> str:
        return "failed" if self.error else "ok"


@dataclass
class AblationReport:
    rows: list[AblationRow] = field(default_factory=list)

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(ABLATION_COLUMNS)
            for row in self.rows:
                writer.writerow(
                    [row.k, repr(row.psnr), repr(row.scale), repr(row.final_loss), row.checksum, row.status]
                )
        return path

    @classmethod
    def read_csv(cls, path: str | Path) -> AblationReport:
        with Path(path).open(newline="", encoding="utf-8") as handle:
            rows = [
                AblationRow(
                    k=int(entry["k"]),
                    scale=float(entry["scale"]),
                    psnr=float(entry["psnr"]),
                    final_loss=float(entry["final_loss"]),
                    checksum=entry["checksum"],
                    error="" if entry["status"] == "ok" else entry["status"],
                )
                for entry in csv.DictReader(handle)
            ]
        return cls(rows)


def run_single(
    cfg: TrainConfig,
    dataset: ImageDataset,
    val_images: Sequence[tuple[str, Image]],
    output_dir: Path | None,
    run_name: str,
) -> AblationRow:
    """Train one config and score it; raises on training or config errors."""
    errors = validate_train_config(cfg)
    if errors:
        raise ContractError("; ".join(errors))
    result = Trainer(cfg, dataset).train(output_dir, run_name=run_name)
    psnrs, _, _ = score_method(ModelUpscaler(result.model), val_images, cfg.eval_scale)
    if not psnrs:
        raise ContractError(f"no validation image could be scored at x{cfg.eval_scale:g}")
    return AblationRow(
        k=cfg.model_spec().k,
        scale=cfg.eval_scale,
        psnr=float(np.mean(psnrs)),
        final_loss=result.history.losses[-1],
        checksum=result.checkpoint.checksum if result.checkpoint else "",
    )


def run_k_ablation(
    cfg: TrainConfig,
    k_values: Sequence[int],
    dataset: ImageDataset,
    val_images: Sequence[tuple[str, Image]],
    output_dir: str | Path | None = None,
) -> AblationReport:
    """
    One aliif run per K, each from cfg.seed. A failed K is logged and
    recorded as a failed row; the remaining Ks still run.
    """
    report = AblationReport()
    output_dir = Path(output_dir) if output_dir is not None else None
    for k in k_values:
        run_cfg = cfg.with_overrides(mode="aliif", k=k)
        try:
            row = run_single(run_cfg, dataset, val_images, output_dir, run_name=f"aliif_k{k}")
        except SuperResolutionError as exc:
            logger.warning("Ablation run K=%d failed: %s", k, exc)
            row = AblationRow(k=k, scale=cfg.eval_scale, error=str(exc) or type(exc).__name__)
        else:
            logger.info("K=%d: PSNR %.3f dB at x%g (final L1 %.5f)", k, row.psnr, row.scale, row.final_loss)
        report.rows.append(row)
    return report
