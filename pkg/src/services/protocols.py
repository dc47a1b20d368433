"""
Service Protocols (Interfaces)

Contracts between the encoder, the decoders and the harness so that the
trainer, checkpoint writer and evaluation code work with any conforming
implementation (real model, test stub, bicubic baseline).
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    import numpy as np

    from src.services.autodiff.tensor import Tensor
    from src.services.imaging.models import Image
    from src.services.network.encoder import FeatureMap


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------
@runtime_checkable
class ParameterSource(Protocol):
    """Anything owning trainable tensors in a fixed declaration order."""

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        """(name, tensor) pairs; the order is part of the checkpoint format."""
        ...


# ---------------------------------------------------------------------------
# Encoder / decoder
# ---------------------------------------------------------------------------
@runtime_checkable
class FeatureEncoder(Protocol):
    """Maps an LR image to a [D, H, W] feature map of the same spatial size."""

    def __call__(self, image: Image | Tensor) -> FeatureMap: ...


@runtime_checkable
class ImageFunction(Protocol):
    """Continuous image representation queried at normalised coordinates."""

    def query(self, fm: FeatureMap, coords: np.ndarray, cells: np.ndarray) -> Tensor:
        """Unclamped RGB [N, 3] for coordinates [N, 2] with cells [N, 2]."""
        ...


# ---------------------------------------------------------------------------
# Upscalers (evaluation methods)
# ---------------------------------------------------------------------------
@runtime_checkable
class Upscaler(Protocol):
    """An evaluation method: LR image + target size -> SR image."""

    def __call__(self, lr: Image, out_h: int, out_w: int) -> Image: ...
