#!/usr/bin/env python3
"""
Write the seeded synthetic texture set (gradients, checkerboards, Gaussian blobs).

    python scripts/make_toy_dataset.py --out data/toy --count 16 --val-count 4 --seed 0
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config.logging_config import setup_logger
from src.services.training.synthetic import write_toy_set

logger = setup_logger(__name__)


def main(out: Path, count: int, val_count: int, seed: int) -> None:
    train_dir, val_dir = write_toy_set(out, count=count, val_count=val_count, seed=seed)
    logger.info("Training images: %s", train_dir)
    logger.info("Held-out images: %s", val_dir)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Generate the synthetic toy texture set")
    parser.add_argument("--out", type=Path, default=Path("data/toy"), help="Output directory")
    parser.add_argument("--count", type=int, default=16, help="Training images")
    parser.add_argument("--val-count", type=int, default=4, help="Held-out images")
    parser.add_argument("--seed", type=int, default=0, help="Texture seed")
    args = parser.parse_args()
    main(args.out, args.count, args.val_count, args.seed)
