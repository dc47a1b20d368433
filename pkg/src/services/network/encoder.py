"""
Residual convolutional encoder producing the feature map of an LR image.

EDSR-style layout at desk scale: head conv (3 -> D), B residual blocks
(conv, ReLU, conv, skip add), tail conv (D -> D) and a global skip from
the head output. All convolutions are 3x3 with padding 1, so the feature
map keeps the LR image's spatial size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.services.autodiff import ops
from src.services.autodiff.tensor import Tensor
from src.services.exceptions import ContractError
from src.services.imaging.models import Image
from src.services.network.layers import Conv3x3, NamedParameters

IMAGE_CHANNELS = 3


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Encoder output, tensor of shape [D, H, W]."""

    tensor: Tensor

    def __post_init__(self) -> None:
        if self.tensor.ndim != 3:
            raise ContractError(f"FeatureMap needs a [D, H, W] tensor, got {self.tensor.shape}")

    @property
    def channels(self) -> int:
        return self.tensor.shape[0]

    @property
    def height(self) -> int:
        return self.tensor.shape[1]

    @property
    def width(self) -> int:
        return self.tensor.shape[2]


@dataclass
class ResidualBlock:
    first: Conv3x3
    second: Conv3x3

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(x, self.second(ops.relu(self.first(x))))

    def named_parameters(self) -> NamedParameters:
        return self.first.named_parameters() + self.second.named_parameters()


class ResidualEncoder:
    """Small residual conv net standing in for the EDSR-baseline backbone."""

    def __init__(self, head: Conv3x3, blocks: list[ResidualBlock], tail: Conv3x3) -> None:
        if not blocks:
            raise ContractError("ResidualEncoder needs at least one residual block")
        if head.in_channels != IMAGE_CHANNELS:
            raise ContractError(f"encoder head must take {IMAGE_CHANNELS} channels, got {head.in_channels}")
        self.head = head
        self.blocks = blocks
        self.tail = tail

    @classmethod
    def initialise(cls, feature_channels: int, num_blocks: int, rng: np.random.Generator) -> ResidualEncoder:
        if feature_channels < 1 or num_blocks < 1:
            raise ContractError(f"encoder needs D >= 1 and B >= 1, got D={feature_channels}, B={num_blocks}")
        head = Conv3x3.initialise(IMAGE_CHANNELS, feature_channels, rng, "encoder.head")
        blocks = [
            ResidualBlock(
                first=Conv3x3.initialise(feature_channels, feature_channels, rng, f"encoder.blocks.{i}.first"),
                second=Conv3x3.initialise(feature_channels, feature_channels, rng, f"encoder.blocks.{i}.second"),
            )
            for i in range(num_blocks)
        ]
        tail = Conv3x3.initialise(feature_channels, feature_channels, rng, "encoder.tail")
        return cls(head, blocks, tail)

    @property
    def feature_channels(self) -> int:
        return self.head.out_channels

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def __call__(self, image: Image | Tensor) -> FeatureMap:
        x = image if isinstance(image, Tensor) else Tensor(image.to_chw(), dtype=self.head.kernel.dtype)
        if x.ndim != 3 or x.shape[0] != IMAGE_CHANNELS:
            raise ContractError(f"encoder expects a [3, H, W] image, got {x.shape}")
        head = self.head(x)
        features = head
        for block in self.blocks:
            features = block(features)
        return FeatureMap(ops.add(self.tail(features), head))

    def named_parameters(self) -> NamedParameters:
        params = self.head.named_parameters()
        for block in self.blocks:
            params += block.named_parameters()
        return params + self.tail.named_parameters()


def encode(image: Image | Tensor, encoder: ResidualEncoder) -> FeatureMap:
    """Feature map of an LR image; same H x W as the input, deterministic."""
    return encoder(image)
