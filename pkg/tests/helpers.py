"""
Shared test helpers. Used across unit tests to avoid duplication.
"""

from pathlib import Path

import numpy as np

from src.config.experiment import TrainConfig
from src.services.autodiff.tensor import Tensor
from src.services.imaging.models import Image
from src.services.network.encoder import FeatureMap
from src.services.network.model import ModelSpec


def make_image(height: int = 12, width: int = 10, seed: int = 0) -> Image:
    """Random RGB image with values in [0, 1]."""
    return Image(np.random.default_rng(seed).uniform(0.0, 1.0, size=(height, width, 3)).astype(np.float32))


def make_feature_map(channels: int = 2, height: int = 3, width: int = 4, seed: int = 0, **kwargs: object) -> FeatureMap:
    data = np.random.default_rng(seed).normal(size=(channels, height, width))
    return FeatureMap(Tensor(data, **kwargs))


def make_spec(**overrides: object) -> ModelSpec:
    """Tiny architecture that keeps forward/backward passes fast."""
    defaults: dict[str, object] = {
        "mode": "aliif",
        "k": 3,
        "feature_channels": 4,
        "num_blocks": 1,
        "basis_hidden": 8,
        "basis_layers": 3,
        "expansion_hidden": 8,
        "expansion_layers": 3,
    }
    defaults.update(overrides)
    return ModelSpec(**defaults)


def make_train_config(**overrides: object) -> TrainConfig:
    """Tiny training run: 8x8 LR patches, 16 queries, 1 epoch of 2 iterations."""
    defaults: dict[str, object] = {
        "k": 3,
        "feature_channels": 4,
        "num_blocks": 1,
        "basis_hidden": 8,
        "basis_layers": 3,
        "expansion_hidden": 8,
        "expansion_layers": 3,
        "patch_size": 8,
        "pixels_per_patch": 16,
        "scale_min": 1.0,
        "scale_max": 2.0,
        "epochs": 1,
        "iterations_per_epoch": 2,
        "lr_decay_every": 1,
        "lr": 1e-3,
        "seed": 0,
    }
    defaults.update(overrides)
    return TrainConfig(**defaults)


def write_config(path: Path, **values: object) -> Path:
    """Write an experiment file of key = value lines."""
    path.write_text("".join(f"{key} = {value}\n" for key, value in values.items()), encoding="utf-8")
    return path


def tiny_config_values(dataset_dir: Path, output_dir: Path, **overrides: object) -> dict[str, object]:
    """Experiment-file values matching make_train_config, for CLI tests."""
    values: dict[str, object] = {
        "k": 2,
        "feature_channels": 4,
        "num_blocks": 1,
        "basis_hidden": 8,
        "basis_layers": 3,
        "expansion_hidden": 8,
        "expansion_layers": 3,
        "patch_size": 8,
        "pixels_per_patch": 16,
        "scale_range": "1,2",
        "epochs": 1,
        "iterations_per_epoch": 2,
        "lr_decay_every": 1,
        "seed": 0,
        "dataset_dir": dataset_dir,
        "output_dir": output_dir,
    }
    values.update(overrides)
    return values
