"""
PNG reading and writing (8-bit RGB only).
"""

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from src.config.logging_config import setup_logger
from src.services.exceptions import ImageIOError
from src.services.imaging.models import Image

logger = setup_logger(__name__)

# 8-bit palette/grey/colour modes; 16-bit ("I;16", "I") and float modes are rejected.
SUPPORTED_MODES = ("RGB", "RGBA", "L", "LA", "P")


def load_png(path: str | Path) -> Image:
    """
    Decode an 8-bit PNG into an Image with values scaled by 1/255.

    Raises:
        ImageIOError: missing file, malformed/truncated stream, non-PNG or non-8-bit data
    """
    path = Path(path)
    if not path.is_file():
        raise ImageIOError(path, "file not found")
    try:
        with PILImage.open(path) as img:
            if img.format != "PNG":
                raise ImageIOError(path, f"not a PNG file (detected {img.format})")
            if img.mode not in SUPPORTED_MODES:
                raise ImageIOError(path, f"unsupported PNG mode {img.mode} (8-bit RGB expected)")
            img.load()
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except ImageIOError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise ImageIOError(path, f"cannot decode PNG: {exc}") from exc
    return Image(rgb.astype(np.float32) / 255.0)


def save_png(image: Image, path: str | Path) -> Path:
    """Encode an Image as 8-bit RGB PNG (round to nearest level)."""
    path = Path(path)
    quantized = np.clip(np.rint(image.pixels * 255.0), 0, 255).astype(np.uint8)
    try:
        PILImage.fromarray(quantized).save(path, format="PNG")
    except (OSError, ValueError) as exc:
        raise ImageIOError(path, f"cannot write PNG: {exc}") from exc
    logger.debug("Wrote %sx%s PNG to %s", image.height, image.width, path)
    return path


def list_pngs(directory: str | Path) -> list[Path]:
    """Sorted *.png files of a directory (case-insensitive suffix)."""
    directory = Path(directory)
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() == ".png")
