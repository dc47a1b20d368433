"""
MATLAB-style bicubic resampling.

Separable cubic convolution with a = -0.5. When downscaling, the kernel is
stretched by 1/scale (antialiasing). Source coordinates outside the image
are clamped to the border. Used both to synthesise LR inputs and as the
"bicubic" baseline method in evaluation.
"""

import math

import numpy as np

from src.services.exceptions import ContractError
from src.services.imaging.models import Image

CUBIC_A = -0.5
KERNEL_SUPPORT = 4.0


def cubic_kernel(x: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    """Keys cubic convolution kernel, support [-2, 2]."""
    absx = np.abs(x)
    absx2 = absx * absx
    absx3 = absx2 * absx
    inner = (a + 2.0) * absx3 - (a + 3.0) * absx2 + 1.0
    outer = a * absx3 - 5.0 * a * absx2 + 8.0 * a * absx - 4.0 * a
    return np.where(absx <= 1.0, inner, np.where(absx < 2.0, outer, 0.0))


def resize_weights(in_length: int, out_length: int, antialias: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """
    Interpolation taps for one axis.

    Returns:
        (indices, weights), both [out_length, taps]; indices are clamped into
        [0, in_length - 1] and each weight row sums to 1.
    """
    scale = out_length / in_length
    kernel_width = KERNEL_SUPPORT
    stretch = 1.0
    if scale < 1.0 and antialias:
        kernel_width /= scale
        stretch = scale

    # Output pixel centres mapped into input coordinates (0-based, pixel centres at integers).
    centres = (np.arange(out_length, dtype=np.float64) + 0.5) / scale - 0.5
    left = np.floor(centres - kernel_width / 2.0).astype(np.int64)
    taps = int(math.ceil(kernel_width)) + 2
    indices = left[:, None] + np.arange(taps)[None, :]
    distances = centres[:, None] - indices
    weights = stretch * cubic_kernel(stretch * distances)
    weights = weights / weights.sum(axis=1, keepdims=True)
    return np.clip(indices, 0, in_length - 1), weights


def _resize_axis(pixels: np.ndarray, out_length: int, axis: int) -> np.ndarray:
    in_length = pixels.shape[axis]
    if in_length == out_length:
        return pixels
    indices, weights = resize_weights(in_length, out_length)
    if axis == 0:
        return np.einsum("op,opwc->owc", weights, pixels[indices])
    return np.einsum("op,hopc->hoc", weights, pixels[:, indices])


def bicubic_resize(image: Image, out_h: int, out_w: int) -> Image:
    """
    Resize to exactly out_h x out_w with bicubic (a = -0.5) interpolation.

    Raises:
        ContractError: a target dimension below 1
    """
    if int(out_h) < 1 or int(out_w) < 1:
        raise ContractError(f"bicubic_resize target size must be >= 1x1, got {out_h}x{out_w}")
    pixels = image.pixels.astype(np.float64)
    pixels = _resize_axis(pixels, int(out_h), axis=0)
    pixels = _resize_axis(pixels, int(out_w), axis=1)
    return Image.from_array(pixels)
