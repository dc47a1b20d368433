"""
Configuration settings for the A-LIIF super-resolution engine
"""

import os
from pathlib import Path

from dotenv import find_dotenv, load_dotenv

# Use find_dotenv() to locate .env regardless of the current working directory.
# Falls back to an explicit path relative to this file (project root) if not found.
_dotenv_path = find_dotenv(usecwd=True) or str(Path(__file__).resolve().parent.parent.parent / ".env")
load_dotenv(_dotenv_path)


def _env_bool(name: str, default: str) -> bool:
    return (os.getenv(name, default)).strip().lower() in ("true", "1", "yes")


def _env_optional_int(name: str) -> int | None:
    raw = (os.getenv(name) or "").strip()
    return int(raw) if raw else None


# ============================================
# Environment-based Configuration
# ============================================


class Config:
    """
    Process-level configuration loaded from environment variables.
    Experiment hyper-parameters live in config files (see src/config/experiment.py).
    """

    # Overrides the experiment file's seed when set (unset = use the file).
    ALIIF_SEED: int | None = _env_optional_int("ALIIF_SEED")

    # Queries decoded per chunk at inference. Output is identical for every chunk size.
    QUERY_BATCH_SIZE: int = int(os.getenv("ALIIF_QUERY_BATCH_SIZE", "4096"))

    # Threads decoding query chunks concurrently at inference (1 = sequential).
    RENDER_WORKERS: int = int(os.getenv("ALIIF_RENDER_WORKERS", "4"))

    # Assert mixture-weight invariants (non-negative, unit sum) on every decoder forward.
    DEBUG_CHECKS: bool = _env_bool("ALIIF_DEBUG_CHECKS", "false")

    # Where train / ablate-k write checkpoints when the experiment file names no output_dir.
    CHECKPOINT_DIR: str = (os.getenv("ALIIF_CHECKPOINT_DIR") or "runs").strip()

    # Tolerance used by debug checks on the mixture weights.
    MIXTURE_SUM_TOLERANCE: float = float(os.getenv("ALIIF_MIXTURE_SUM_TOLERANCE", "1e-6"))


# Singleton instance
config = Config()


def validate_config_dependencies() -> list[str]:
    """
    Validate numeric ranges of the process-level settings.
    Returns a list of human-readable error strings (empty = all OK).
    """
    errors: list[str] = []
    if config.QUERY_BATCH_SIZE <= 0:
        errors.append(f"ALIIF_QUERY_BATCH_SIZE={config.QUERY_BATCH_SIZE} must be > 0.")
    if config.RENDER_WORKERS < 1:
        errors.append(f"ALIIF_RENDER_WORKERS={config.RENDER_WORKERS} must be >= 1.")
    if config.ALIIF_SEED is not None and config.ALIIF_SEED < 0:
        errors.append(f"ALIIF_SEED={config.ALIIF_SEED} must be >= 0.")
    if not (0.0 < config.MIXTURE_SUM_TOLERANCE < 1.0):
        errors.append(f"ALIIF_MIXTURE_SUM_TOLERANCE={config.MIXTURE_SUM_TOLERANCE} is out of range (0, 1).")
    if not config.CHECKPOINT_DIR:
        errors.append("ALIIF_CHECKPOINT_DIR must not be empty.")
    return errors
