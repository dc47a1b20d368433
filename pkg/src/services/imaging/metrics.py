"""
Full-image RGB quality metrics (values in [0, 1], no border crop).
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.services.exceptions import ContractError
from src.services.imaging.models import Image

SSIM_WINDOW = 8
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def _require_same_size(metric: str, a: Image, b: Image) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise ContractError(f"{metric}: image shapes {a.pixels.shape} and {b.pixels.shape} differ")


def mse(a: Image, b: Image) -> float:
    _require_same_size("mse", a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(a: Image, b: Image) -> float:
    """10*log10(1/MSE) in dB over all channels; identical images give math.inf."""
    error = mse(a, b)
    if error == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / error)


def _ssim_channel(x: np.ndarray, y: np.ndarray) -> float:
    win_x = sliding_window_view(x, (SSIM_WINDOW, SSIM_WINDOW))
    win_y = sliding_window_view(y, (SSIM_WINDOW, SSIM_WINDOW))
    mu_x = win_x.mean(axis=(-2, -1))
    mu_y = win_y.mean(axis=(-2, -1))
    var_x = (win_x * win_x).mean(axis=(-2, -1)) - mu_x * mu_x
    var_y = (win_y * win_y).mean(axis=(-2, -1)) - mu_y * mu_y
    cov = (win_x * win_y).mean(axis=(-2, -1)) - mu_x * mu_y
    numerator = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov + SSIM_C2)
    denominator = (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return float(np.mean(numerator / denominator))


def ssim(a: Image, b: Image) -> float:
    """
    Single-scale SSIM with an 8x8 uniform window (stride 1, population statistics),
    computed per channel and averaged.

    Raises:
        ContractError: shape mismatch, or an image side below the window size
    """
    _require_same_size("ssim", a, b)
    if min(a.height, a.width) < SSIM_WINDOW:
        raise ContractError(f"ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.height}x{a.width}")
    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    return float(np.mean([_ssim_channel(x[:, :, c], y[:, :, c]) for c in range(3)]))
