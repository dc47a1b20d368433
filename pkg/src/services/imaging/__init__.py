"""
Image pipeline: PNG I/O, bicubic resampling and quality metrics.
"""

from .metrics import psnr, ssim
from .models import Image
from .png_io import load_png, save_png
from .resize import bicubic_resize

__all__ = ["Image", "bicubic_resize", "load_png", "psnr", "save_png", "ssim"]
