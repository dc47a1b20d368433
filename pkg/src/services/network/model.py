"""
Full super-resolution model: residual encoder + implicit decoder.

The model owns every trainable tensor. named_parameters() returns them in a
fixed order (encoder, then decoder) which the optimizer and the checkpoint
format rely on.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from src.config.logging_config import setup_logger
from src.services.autodiff.tensor import Tensor
from src.services.exceptions import ContractError
from src.services.imaging.models import Image
from src.services.network.decoder import (
    COMBINE_MODES,
    MODES,
    BasisMlpBank,
    ImplicitDecoder,
    make_query_grid,
    render,
)
from src.services.network.encoder import FeatureMap, ResidualEncoder
from src.services.network.layers import MLP, NamedParameters
from src.utils.rng import derive_stream

logger = setup_logger(__name__)

RGB_CHANNELS = 3


@dataclass(frozen=True)
class ModelSpec:
    """Architecture of one model; everything a checkpoint header records."""

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

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.mode not in MODES:
            errors.append(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.k < 1:
            errors.append("K must be ≥ 1")
        if self.mode == "liif" and self.k != 1:
            errors.append(f"liif mode uses a single MLP, K must be 1 (got {self.k})")
        for name in ("feature_channels", "num_blocks", "basis_hidden", "basis_layers",
                     "expansion_hidden", "expansion_layers"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be ≥ 1")
        if self.combine not in COMBINE_MODES:
            errors.append(f"combine must be one of {', '.join(COMBINE_MODES)}, got {self.combine!r}")
        return errors

    @property
    def decoder_in_features(self) -> int:
        return 9 * self.feature_channels + 4

    @property
    def expansion_in_features(self) -> int:
        return 9 * self.feature_channels + 2

    def as_dict(self) -> dict[str, object]:
        return asdict(self)


def output_size(height: int, width: int, scale: float) -> tuple[int, int]:
    """Target size of an upscale by s: round(h*s) x round(w*s), at least 1x1."""
    if not math.isfinite(scale) or scale <= 0:
        raise ContractError(f"scale must be a positive number, got {scale}")
    return max(1, int(round(height * scale))), max(1, int(round(width * scale)))


class SuperResolutionModel:
    """Encoder and decoder with a shared query interface for both modes."""

    def __init__(self, spec: ModelSpec, encoder: ResidualEncoder, decoder: ImplicitDecoder) -> None:
        self.spec = spec
        self.encoder = encoder
        self.decoder = decoder

    @classmethod
    def initialise(cls, spec: ModelSpec, seed: int) -> SuperResolutionModel:
        """
        Fresh parameters from per-purpose seeded streams.

        Basis network k always draws from "init/basis/{k}" and the liif MLP from
        "init/basis/0", so an aliif model with K=1 starts from the same decoder
        weights as the liif model of the same seed.
        """
        errors = spec.validate()
        if errors:
            raise ContractError("; ".join(errors))

        encoder = ResidualEncoder.initialise(
            spec.feature_channels, spec.num_blocks, derive_stream(seed, "init/encoder")
        )

        def basis(k: int, name: str) -> MLP:
            return MLP.initialise(
                spec.decoder_in_features,
                spec.basis_hidden,
                RGB_CHANNELS,
                spec.basis_layers,
                derive_stream(seed, f"init/basis/{k}"),
                name,
            )

        if spec.mode == "liif":
            decoder = ImplicitDecoder("liif", mlp=basis(0, "decoder.mlp"), combine=spec.combine)
        else:
            expansion = MLP.initialise(
                spec.expansion_in_features,
                spec.expansion_hidden,
                spec.k,
                spec.expansion_layers,
                derive_stream(seed, "init/expansion"),
                "decoder.expansion",
            )
            bank = BasisMlpBank([basis(k, f"decoder.basis.{k}") for k in range(spec.k)])
            decoder = ImplicitDecoder(
                "aliif",
                expansion=expansion,
                bank=bank,
                combine=spec.combine,
                share_expansion=spec.share_expansion,
            )
        model = cls(spec, encoder, decoder)
        logger.debug("Initialised %s model with %d parameters (seed %d)", spec.mode, model.parameter_count, seed)
        return model

    def named_parameters(self) -> NamedParameters:
        return self.encoder.named_parameters() + self.decoder.named_parameters()

    def parameters(self) -> list[Tensor]:
        return [tensor for _, tensor in self.named_parameters()]

    @property
    def parameter_count(self) -> int:
        return sum(tensor.size for tensor in self.parameters())

    def encode(self, image: Image | Tensor) -> FeatureMap:
        return self.encoder(image)

    def query(self, fm: FeatureMap, coords: np.ndarray, cells: np.ndarray) -> Tensor:
        return self.decoder.query(fm, coords, cells)

    def render(self, lr: Image, out_h: int, out_w: int, batch_size: int | None = None) -> Image:
        """Decode the full out_h x out_w grid of an LR image."""
        return render(self.encode(lr), make_query_grid(out_h, out_w), self.decoder, batch_size)

    def upscale(self, lr: Image, scale: float | None = None, size: tuple[int, int] | None = None) -> Image:
        """Upscale by a real factor or to an explicit (height, width)."""
        if (scale is None) == (size is None):
            raise ContractError("upscale needs exactly one of scale or size")
        out_h, out_w = size if size is not None else output_size(lr.height, lr.width, scale)
        if out_h < 1 or out_w < 1:
            raise ContractError(f"output size must be >= 1x1, got {out_h}x{out_w}")
        return self.render(lr, out_h, out_w)

    def mixture_weights(self, lr: Image, out_h: int, out_w: int) -> np.ndarray:
        """omega [out_h, out_w, K] at the nearest feature of every output pixel."""
        grid = make_query_grid(out_h, out_w)
        omega = self.decoder.mixture_weights(self.encode(lr), grid.coords)
        return omega.reshape(out_h, out_w, -1)
