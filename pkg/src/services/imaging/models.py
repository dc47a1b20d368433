"""
Image domain model.

Pure data structure shared by the resizer, metrics, training sampler and CLI.
"""

from dataclasses import dataclass

import numpy as np

from src.services.exceptions import ContractError


@dataclass(frozen=True, eq=False)
class Image:
    """RGB image, float32 values in [0, 1], stored row-major as [height, width, 3]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = self.pixels
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ContractError(f"Image needs shape [H, W, 3], got {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ContractError(f"Image needs positive height and width, got {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise ContractError("Image values must be finite")
        if pixels.size and (float(pixels.min()) < 0.0 or float(pixels.max()) > 1.0):
            raise ContractError("Image values must lie in [0, 1]")

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Image":
        """Build from any [H, W, 3] array, clamping into [0, 1]."""
        return cls(np.clip(np.asarray(array, dtype=np.float32), 0.0, 1.0))

    @classmethod
    def from_chw(cls, array: np.ndarray) -> "Image":
        """Build from a [3, H, W] array (network layout), clamping into [0, 1]."""
        return cls.from_array(np.transpose(np.asarray(array), (1, 2, 0)))

    @classmethod
    def constant(cls, height: int, width: int, rgb: tuple[float, float, float]) -> "Image":
        return cls.from_array(np.broadcast_to(np.asarray(rgb, dtype=np.float32), (height, width, 3)))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def size(self) -> tuple[int, int]:
        return self.height, self.width

    def to_chw(self) -> np.ndarray:
        """[3, H, W] copy for the encoder."""
        return np.ascontiguousarray(np.transpose(self.pixels, (2, 0, 1)))

    def crop(self, top: int, left: int, height: int, width: int) -> "Image":
        if top < 0 or left < 0 or top + height > self.height or left + width > self.width:
            raise ContractError(f"crop {height}x{width} at ({top}, {left}) outside {self.height}x{self.width} image")
        return Image(self.pixels[top : top + height, left : left + width].copy())
