"""
Training / evaluation image sets: every PNG of one directory, in sorted order.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

from src.config.logging_config import setup_logger
from src.services.exceptions import DatasetError
from src.services.imaging.models import Image
from src.services.imaging.png_io import list_pngs, load_png

logger = setup_logger(__name__)


@dataclass(frozen=True)
class ImageDataset:
    """Named HR images; order is the sorted file order and drives sampling."""

    names: tuple[str, ...]
    images: tuple[Image, ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(self.images):
            raise DatasetError(f"{len(self.names)} names for {len(self.images)} images")

    @classmethod
    def from_images(cls, images: list[Image], names: list[str] | None = None) -> ImageDataset:
        names = names or [f"image_{i:03d}" for i in range(len(images))]
        return cls(tuple(names), tuple(images))

    @classmethod
    def from_directory(cls, directory: str | Path) -> ImageDataset:
        """
        Load every PNG of a directory.

        Raises:
            DatasetError: directory missing or without PNG files
            ImageIOError: a PNG cannot be decoded
        """
        directory = Path(directory)
        if not directory.is_dir():
            raise DatasetError(f"dataset directory {directory} does not exist")
        paths = list_pngs(directory)
        if not paths:
            raise DatasetError(f"dataset directory {directory} contains no PNG images")
        images = [load_png(path) for path in paths]
        logger.info("Loaded %d images from %s", len(images), directory)
        return cls(tuple(path.stem for path in paths), tuple(images))

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, index: int) -> Image:
        return self.images[index]

    def __iter__(self) -> Iterator[Image]:
        return iter(self.images)

    @property
    def largest_square(self) -> int:
        """Largest square crop some image of the set can provide."""
        return max((min(image.height, image.width) for image in self.images), default=0)
