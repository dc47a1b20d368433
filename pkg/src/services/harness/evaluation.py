"""
Evaluation protocol: bicubic-downsample each HR image by s, upscale back to
the exact HR size with every method, score full-image RGB PSNR (and SSIM).

The report holds one row per (method, scale). A row is "failed" when no image
could be scored for it; unreadable images count against every row.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.config.logging_config import setup_logger
from src.services.exceptions import ContractError, SuperResolutionError
from src.services.imaging.metrics import psnr, ssim
from src.services.imaging.models import Image
from src.services.imaging.png_io import list_pngs, load_png
from src.services.imaging.resize import bicubic_resize
from src.services.network.model import SuperResolutionModel
from src.services.protocols import Upscaler

logger = setup_logger(__name__)

BICUBIC = "bicubic"
SCALE_PRESETS: dict[str, tuple[float, ...]] = {
    "in": (2.0, 3.0, 4.0),
    "out": (6.0, 12.0, 18.0, 24.0, 30.0),
}
REPORT_COLUMNS = ("method", "scale", "psnr", "ssim", "images", "failed", "status")


def parse_scales(text: str) -> tuple[float, ...]:
    """'2,3,4', 'in', 'out' or 'in,out' -> scales in the given order."""
    scales: list[float] = []
    for token in (part.strip().lower() for part in text.split(",")):
        if not token:
            continue
        if token in SCALE_PRESETS:
            scales.extend(SCALE_PRESETS[token])
            continue
        try:
            value = float(token)
        except ValueError:
            raise ContractError(f"invalid scale {token!r}") from None
        if not math.isfinite(value) or value <= 0:
            raise ContractError(f"scale must be > 0, got {token}")
        scales.append(value)
    if not scales:
        raise ContractError("no scales given")
    return tuple(scales)


def lr_size(height: int, width: int, scale: float) -> tuple[int, int]:
    return max(1, int(round(height / scale))), max(1, int(round(width / scale)))


def bicubic_upscaler(lr: Image, out_h: int, out_w: int) -> Image:
    return bicubic_resize(lr, out_h, out_w)


@dataclass(frozen=True)
class ModelUpscaler:
    """Adapts a trained model to the Upscaler protocol."""

    model: SuperResolutionModel

    def __call__(self, lr: Image, out_h: int, out_w: int) -> Image:
        return self.model.render(lr, out_h, out_w)


@dataclass
class EvalRow:
    method: str
    scale: float
    psnr: float = math.nan
    ssim: float | None = None
    images: int = 0
    failed: int = 0

    @property
    def status(self) -> str:
        return "ok" if self.images > 0 else "failed"

    def as_csv(self) -> list[str]:
        return [
            self.method,
            repr(self.scale),
            repr(self.psnr),
            "" if self.ssim is None else repr(self.ssim),
            str(self.images),
            str(self.failed),
            self.status,
        ]


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def row(self, method: str, scale: float) -> EvalRow:
        for row in self.rows:
            if row.method == method and row.scale == scale:
                return row
        raise KeyError((method, scale))

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and all(row.status == "failed" for row in self.rows)

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(REPORT_COLUMNS)
            writer.writerows(row.as_csv() for row in self.rows)
        return path

    @classmethod
    def read_csv(cls, path: str | Path) -> EvalReport:
        with Path(path).open(newline="", encoding="utf-8") as handle:
            rows = [
                EvalRow(
                    method=entry["method"],
                    scale=float(entry["scale"]),
                    psnr=float(entry["psnr"]),
                    ssim=float(entry["ssim"]) if entry["ssim"] else None,
                    images=int(entry["images"]),
                    failed=int(entry["failed"]),
                )
                for entry in csv.DictReader(handle)
            ]
        return cls(rows)

    def format_table(self) -> str:
        """Aligned text table, one line per row."""
        header = ["method", "scale", "PSNR (dB)", "SSIM", "images", "failed", "status"]
        body = [
            [
                row.method,
                f"x{row.scale:g}",
                f"{row.psnr:.3f}" if row.status == "ok" else "-",
                f"{row.ssim:.4f}" if row.ssim is not None and row.status == "ok" else "-",
                str(row.images),
                str(row.failed),
                row.status,
            ]
            for row in self.rows
        ]
        widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
        lines = [
            "  ".join(cell.ljust(width) for cell, width in zip(line, widths, strict=True)) for line in [header, *body]
        ]
        return "\n".join(line.rstrip() for line in lines)


def load_eval_images(directory: str | Path) -> tuple[list[tuple[str, Image]], list[str]]:
    """(name, image) pairs that decoded, and names of files that did not."""
    images, failures = [], []
    for path in list_pngs(directory):
        try:
            images.append((path.stem, load_png(path)))
        except SuperResolutionError as exc:
            logger.warning("Skipping unreadable image %s: %s", path, exc)
            failures.append(path.stem)
    return images, failures


def score_method(
    upscaler: Upscaler,
    images: Sequence[tuple[str, Image]],
    scale: float,
    with_ssim: bool = False,
) -> tuple[list[float], list[float], int]:
    """Per-image PSNR (and SSIM) of one method at one scale; third item counts failures."""
    psnrs: list[float] = []
    ssims: list[float] = []
    failed = 0
    for name, hr in images:
        try:
            lr = bicubic_resize(hr, *lr_size(hr.height, hr.width, scale))
            sr = upscaler(lr, hr.height, hr.width)
            psnr_value = psnr(sr, hr)
            ssim_value = ssim(sr, hr) if with_ssim else None
        except SuperResolutionError as exc:
            logger.warning("Scoring %s at x%g failed: %s", name, scale, exc)
            failed += 1
            continue
        psnrs.append(psnr_value)
        if ssim_value is not None:
            ssims.append(ssim_value)
    return psnrs, ssims, failed


def evaluate(
    methods: dict[str, Upscaler],
    images: Sequence[tuple[str, Image]],
    scales: Sequence[float],
    with_ssim: bool = False,
    unreadable: int = 0,
) -> EvalReport:
    """Score every (method, scale) pair in method-major order."""
    report = EvalReport()
    for method, upscaler in methods.items():
        for scale in scales:
            psnrs, ssims, failed = score_method(upscaler, images, scale, with_ssim)
            row = EvalRow(method=method, scale=float(scale), images=len(psnrs), failed=failed + unreadable)
            if psnrs:
                row.psnr = float(np.mean(psnrs))
                row.ssim = float(np.mean(ssims)) if ssims else None
            logger.info(
                "%s x%g: PSNR %.3f dB over %d images (%d failed)", method, scale, row.psnr, row.images, row.failed
            )
            report.rows.append(row)
    return report


def method_names(checkpoints: Sequence[str | Path]) -> list[str]:
    """Report names of checkpoint files: their stems, made unique with a numeric suffix."""
    names: list[str] = []
    for checkpoint in checkpoints:
        stem = Path(checkpoint).stem
        name, suffix = stem, 2
        while name in names or name == BICUBIC:
            name, suffix = f"{stem}_{suffix}", suffix + 1
        names.append(name)
    return names
