"""
Experiment configuration files.

Flat ``key = value`` text with ``#`` comments, read with python-dotenv's
parser. A ``preset`` key (desk | full) fills defaults first; every other key
overrides it. Keys are case-insensitive; unknown keys are rejected by name.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from dotenv import dotenv_values

from src.config.logging_config import setup_logger
from src.config.settings import config
from src.services.exceptions import ConfigError
from src.services.network.model import ModelSpec

logger = setup_logger(__name__)

MAX_SCALE = 8.0

PRESETS: dict[str, dict[str, object]] = {
    "desk": {
        "k": 4,
        "feature_channels": 16,
        "num_blocks": 4,
        "epochs": 30,
        "iterations_per_epoch": 100,
        "lr_decay_every": 10,
        "batch_size": 1,
    },
    "full": {
        "k": 10,
        "feature_channels": 64,
        "num_blocks": 16,
        "epochs": 1000,
        "iterations_per_epoch": 1000,
        "lr_decay_every": 200,
        "batch_size": 16,
    },
}

_PATH_KEYS = ("dataset_dir", "val_dir", "output_dir")
_TRUE = ("true", "1", "yes", "on")
_FALSE = ("false", "0", "no", "off")


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run depends on besides the dataset contents."""

    preset: str = "desk"
    # model
    mode: str = "aliif"
    k: int = 4
    feature_channels: int = 16
    num_blocks: int = 4
    basis_hidden: int = 16
    basis_layers: int = 5
    expansion_hidden: int = 256
    expansion_layers: int = 5
    combine: str = "linear"
    share_expansion: bool = False
    # sampling
    patch_size: int = 48
    pixels_per_patch: int = 2304
    scale_min: float = 1.0
    scale_max: float = 4.0
    integer_scales: bool = False
    batch_size: int = 1
    # optimisation
    lr: float = 1e-4
    lr_decay_every: int = 10
    lr_decay_factor: float = 0.5
    epochs: int = 30
    iterations_per_epoch: int = 100
    seed: int = 0
    # io
    dataset_dir: str = ""
    val_dir: str = ""
    output_dir: str = ""
    eval_scale: float = 2.0

    def model_spec(self) -> ModelSpec:
        """Architecture of the model this config trains (liif always has K=1)."""
        return ModelSpec(
            mode=self.mode,
            k=1 if self.mode == "liif" else self.k,
            feature_channels=self.feature_channels,
            num_blocks=self.num_blocks,
            basis_hidden=self.basis_hidden,
            basis_layers=self.basis_layers,
            expansion_hidden=self.expansion_hidden,
            expansion_layers=self.expansion_layers,
            combine=self.combine,
            share_expansion=self.share_expansion,
        )

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir or config.CHECKPOINT_DIR)

    @property
    def validation_dir(self) -> str:
        return self.val_dir or self.dataset_dir

    def with_overrides(self, **changes: object) -> TrainConfig:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, object]:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(TrainConfig)}
_DEFAULTS = TrainConfig()


def _coerce(key: str, raw: str | None) -> object:
    """Convert a raw string to the type of the field's default value."""
    if raw is None:
        raise ConfigError(key, "missing value")
    value = raw.strip()
    default = getattr(_DEFAULTS, key)
    try:
        if isinstance(default, bool):
            lowered = value.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            number = float(value)
            if not math.isfinite(number):
                raise ValueError(value)
            return number
    except ValueError:
        raise ConfigError(key, f"cannot parse {value!r} as {type(default).__name__}") from None
    return value


def parse_train_config(values: dict[str, str | None], base_dir: Path | None = None) -> TrainConfig:
    """
    Build a TrainConfig from raw key/value pairs.

    Raises:
        ConfigError: unknown key, unknown preset, or a value of the wrong type
    """
    raw = {key.strip().lower(): value for key, value in values.items()}

    if "scale_range" in raw:
        bounds = (raw.pop("scale_range") or "").replace(" ", "").split(",")
        if len(bounds) != 2:
            raise ConfigError("scale_range", "expected 'min,max'")
        raw.setdefault("scale_min", bounds[0])
        raw.setdefault("scale_max", bounds[1])

    for key in raw:
        if key not in _FIELDS:
            raise ConfigError(key, "unknown config key")

    preset = (raw.get("preset") or "desk").strip().lower()
    if preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}, expected one of {', '.join(PRESETS)}")

    fields: dict[str, object] = dict(PRESETS[preset])
    fields["preset"] = preset
    for key, value in raw.items():
        if key != "preset":
            fields[key] = _coerce(key, value)

    if base_dir is not None:
        for key in _PATH_KEYS:
            path = str(fields.get(key) or "")
            if path and not Path(path).is_absolute():
                fields[key] = str(base_dir / path)

    if config.ALIIF_SEED is not None:
        logger.info("ALIIF_SEED=%d overrides the config seed", config.ALIIF_SEED)
        fields["seed"] = config.ALIIF_SEED

    return TrainConfig(**fields)


def load_train_config(path: str | Path) -> TrainConfig:
    """Read an experiment file; relative paths inside it resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config_file", f"{path} does not exist")
    return parse_train_config(dotenv_values(path), base_dir=path.parent)


def validate_train_config(cfg: TrainConfig) -> list[str]:
    """
    Check every constraint of a training config.
    Returns a list of human-readable error strings (empty = all OK).
    """
    errors: list[str] = []
    if cfg.k < 1:
        errors.append("K must be ≥ 1")
    errors += [error for error in cfg.model_spec().validate() if error not in errors]
    if cfg.patch_size < 8:
        errors.append(f"patch_size={cfg.patch_size} must be ≥ 8")
    if cfg.pixels_per_patch < 1:
        errors.append(f"pixels_per_patch={cfg.pixels_per_patch} must be ≥ 1")
    elif cfg.pixels_per_patch > cfg.patch_size**2:
        errors.append(f"pixels_per_patch={cfg.pixels_per_patch} exceeds patch_size² = {cfg.patch_size**2}")
    if not 1.0 <= cfg.scale_min <= cfg.scale_max <= MAX_SCALE:
        errors.append(f"scale range [{cfg.scale_min}, {cfg.scale_max}] must lie within [1, {MAX_SCALE:g}]")
    elif cfg.integer_scales and math.ceil(cfg.scale_min) > math.floor(cfg.scale_max):
        errors.append(f"no integer scale in [{cfg.scale_min}, {cfg.scale_max}]")
    if cfg.batch_size < 1:
        errors.append(f"batch_size={cfg.batch_size} must be ≥ 1")
    if cfg.lr <= 0:
        errors.append(f"lr={cfg.lr} must be > 0")
    if cfg.lr_decay_every < 1:
        errors.append(f"lr_decay_every={cfg.lr_decay_every} must be ≥ 1")
    if not 0.0 < cfg.lr_decay_factor <= 1.0:
        errors.append(f"lr_decay_factor={cfg.lr_decay_factor} must lie in (0, 1]")
    if cfg.epochs < 1 or cfg.iterations_per_epoch < 1:
        errors.append("epochs and iterations_per_epoch must be ≥ 1")
    if cfg.seed < 0:
        errors.append(f"seed={cfg.seed} must be ≥ 0")
    if cfg.eval_scale < 1.0:
        errors.append(f"eval_scale={cfg.eval_scale} must be ≥ 1")
    return errors
