"""
Seeded synthetic texture set for smoke tests and desk-scale training runs.

Three texture families, cycled in order:
  - linear colour gradients at a random angle
  - two-colour checkerboards with a random cell size
  - sums of coloured Gaussian blobs on a dark background
Image sides are drawn from [32, 64].
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from src.config.logging_config import setup_logger
from src.services.imaging.models import Image
from src.services.imaging.png_io import save_png
from src.utils.rng import derive_stream

logger = setup_logger(__name__)

TEXTURE_KINDS = ("gradient", "checkerboard", "blobs")
MIN_SIDE = 32
MAX_SIDE = 64


def _grid(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    return np.meshgrid(np.linspace(0.0, 1.0, height), np.linspace(0.0, 1.0, width), indexing="ij")


def gradient_texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    rows, cols = _grid(height, width)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    t = np.cos(angle) * rows + np.sin(angle) * cols
    t = (t - t.min()) / max(float(np.ptp(t)), 1e-12)
    start, end = rng.uniform(0.0, 1.0, size=(2, 3))
    return start + t[:, :, None] * (end - start)


def checkerboard_texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    cell = int(rng.integers(3, 9))
    offset_r, offset_c = rng.integers(0, cell, size=2)
    rows = (np.arange(height)[:, None] + offset_r) // cell
    cols = (np.arange(width)[None, :] + offset_c) // cell
    mask = ((rows + cols) % 2).astype(np.float64)
    first, second = rng.uniform(0.0, 1.0, size=(2, 3))
    return first + mask[:, :, None] * (second - first)


def blobs_texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    rows, cols = _grid(height, width)
    pixels = np.full((height, width, 3), 0.05)
    for _ in range(int(rng.integers(3, 7))):
        centre_r, centre_c = rng.uniform(0.0, 1.0, size=2)
        sigma = rng.uniform(0.05, 0.2)
        colour = rng.uniform(0.2, 1.0, size=3)
        bump = np.exp(-((rows - centre_r) ** 2 + (cols - centre_c) ** 2) / (2.0 * sigma**2))
        pixels += bump[:, :, None] * colour
    return pixels


_GENERATORS = {
    "gradient": gradient_texture,
    "checkerboard": checkerboard_texture,
    "blobs": blobs_texture,
}


def make_texture(kind: str, rng: np.random.Generator) -> Image:
    if kind not in _GENERATORS:
        raise ValueError(f"unknown texture kind {kind!r}, expected one of {TEXTURE_KINDS}")
    height, width = (int(v) for v in rng.integers(MIN_SIDE, MAX_SIDE + 1, size=2))
    return Image.from_array(_GENERATORS[kind](height, width, rng))


def make_toy_set(count: int, seed: int, purpose: str = "data/toy") -> list[tuple[str, Image]]:
    """count named textures; identical for identical (count, seed, purpose)."""
    rng = derive_stream(seed, purpose)
    images = []
    for index in range(count):
        kind = TEXTURE_KINDS[index % len(TEXTURE_KINDS)]
        images.append((f"{kind}_{index:03d}", make_texture(kind, rng)))
    return images


def write_toy_set(directory: str | Path, count: int = 16, val_count: int = 4, seed: int = 0) -> tuple[Path, Path]:
    """
    Write a training split and a held-out split as PNGs.

    Returns:
        (train directory, val directory), i.e. directory/train and directory/val
    """
    directory = Path(directory)
    train_dir, val_dir = directory / "train", directory / "val"
    for split_dir, split_count, purpose in ((train_dir, count, "data/toy/train"), (val_dir, val_count, "data/toy/val")):
        split_dir.mkdir(parents=True, exist_ok=True)
        for name, image in make_toy_set(split_count, seed, purpose):
            save_png(image, split_dir / f"{name}.png")
    logger.info("Wrote %d training and %d held-out textures under %s", count, val_count, directory)
    return train_dir, val_dir
