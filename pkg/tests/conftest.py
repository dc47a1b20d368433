"""
Pytest configuration and shared fixtures.
Run from project root: python -m pytest tests/ -v
Skip the long toy-training runs with: python -m pytest tests/ -m "not slow"
"""

import os
import sys
from pathlib import Path

# Set env vars before any app imports (ensures deterministic test behavior)
os.environ["LOG_FORMAT"] = "simple"
os.environ.pop("ALIIF_SEED", None)
os.environ.pop("ALIIF_DEBUG_CHECKS", None)
os.environ.setdefault("ALIIF_QUERY_BATCH_SIZE", "4096")

# Ensure project root is on path when running tests
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

import pytest

from src.services.training.synthetic import write_toy_set


@pytest.fixture(scope="session")
def toy_dirs(tmp_path_factory: pytest.TempPathFactory) -> tuple[Path, Path]:
    """Small seeded texture set shared by the slower tests: (train dir, val dir)."""
    root = tmp_path_factory.mktemp("toy")
    return write_toy_set(root, count=4, val_count=2, seed=3)
