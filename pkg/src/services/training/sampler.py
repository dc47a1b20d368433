"""
Random training batches: scale draw, HR crop, bicubic LR synthesis, pixel picks.

For each item a scale s is drawn, an HR crop of side round(patch_size * s) is
taken from a random image, the crop is bicubic-downsampled to
patch_size x patch_size, and pixels_per_patch HR pixel centres are picked
without replacement as decoder queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.config.experiment import TrainConfig
from src.services.exceptions import DatasetError
from src.services.imaging.models import Image
from src.services.imaging.resize import bicubic_resize
from src.services.training.dataset import ImageDataset
from src.utils.rng import derive_stream

MAX_RESAMPLE_ATTEMPTS = 1000


@dataclass
class SamplerStreams:
    """One independent generator per source of sampling randomness."""

    scale: np.random.Generator
    image: np.random.Generator
    crop: np.random.Generator
    pixels: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> SamplerStreams:
        return cls(
            scale=derive_stream(seed, "data/scale"),
            image=derive_stream(seed, "data/image"),
            crop=derive_stream(seed, "data/crop"),
            pixels=derive_stream(seed, "data/pixels"),
        )


@dataclass(frozen=True, eq=False)
class TrainingSample:
    lr: Image
    coords: np.ndarray  # [P, 2]
    cells: np.ndarray  # [P, 2]
    targets: np.ndarray  # [P, 3]
    scale: float


@dataclass(frozen=True, eq=False)
class TrainingBatch:
    samples: tuple[TrainingSample, ...]

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def targets(self) -> np.ndarray:
        """All targets stacked in sample order, [B * P, 3]."""
        return np.concatenate([sample.targets for sample in self.samples], axis=0)

    def digest(self) -> bytes:
        """Byte string identifying the batch contents (for determinism checks)."""
        parts = []
        for sample in self.samples:
            parts += [sample.lr.pixels.tobytes(), sample.coords.tobytes()]
            parts += [sample.cells.tobytes(), sample.targets.tobytes()]
        return b"".join(parts)


def pixel_centres(index: np.ndarray, side: int) -> np.ndarray:
    """Normalised [row, col] centres of flat pixel indices in a side x side image."""
    rows, cols = np.divmod(index, side)
    return np.stack([-1.0 + (2.0 * rows + 1.0) / side, -1.0 + (2.0 * cols + 1.0) / side], axis=1)


def draw_scale(cfg: TrainConfig, rng: np.random.Generator) -> float:
    if cfg.integer_scales:
        return float(rng.integers(math.ceil(cfg.scale_min), math.floor(cfg.scale_max) + 1))
    return float(rng.uniform(cfg.scale_min, cfg.scale_max))


def crop_side(cfg: TrainConfig, scale: float) -> int:
    return int(round(cfg.patch_size * scale))


def sample_item(dataset: ImageDataset, cfg: TrainConfig, streams: SamplerStreams) -> TrainingSample:
    """
    One (LR patch, queries, targets) item.

    Images too small for the drawn crop are skipped by redrawing scale and image.

    Raises:
        DatasetError: empty dataset, or no image fits even the smallest crop
    """
    if len(dataset) == 0:
        raise DatasetError("cannot sample from an empty dataset")
    smallest = crop_side(cfg, math.ceil(cfg.scale_min) if cfg.integer_scales else cfg.scale_min)
    if dataset.largest_square < smallest:
        raise DatasetError(f"no image is large enough for a {smallest}x{smallest} crop")

    for _ in range(MAX_RESAMPLE_ATTEMPTS):
        scale = draw_scale(cfg, streams.scale)
        side = crop_side(cfg, scale)
        image = dataset[int(streams.image.integers(len(dataset)))]
        if image.height >= side and image.width >= side:
            break
    else:
        raise DatasetError(f"no fitting image found after {MAX_RESAMPLE_ATTEMPTS} draws")

    top = int(streams.crop.integers(0, image.height - side + 1))
    left = int(streams.crop.integers(0, image.width - side + 1))
    hr = image.crop(top, left, side, side)
    lr = bicubic_resize(hr, cfg.patch_size, cfg.patch_size)

    picks = streams.pixels.choice(side * side, size=cfg.pixels_per_patch, replace=False)
    rows, cols = np.divmod(picks, side)
    return TrainingSample(
        lr=lr,
        coords=pixel_centres(picks, side),
        cells=np.full((cfg.pixels_per_patch, 2), 2.0 / side),
        targets=hr.pixels[rows, cols].copy(),
        scale=scale,
    )


def sample_batch(dataset: ImageDataset, cfg: TrainConfig, streams: SamplerStreams) -> TrainingBatch:
    return TrainingBatch(tuple(sample_item(dataset, cfg, streams) for _ in range(cfg.batch_size)))
