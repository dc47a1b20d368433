"""
Unit tests for process-level settings validation.

Verifies that validate_config_dependencies() catches misconfiguration
before a run starts, and that the ALIIF_* variables are read as documented.
"""

import importlib
import os
from collections.abc import Iterator
from unittest.mock import patch

import pytest

import src.config.settings as settings_mod


@pytest.fixture()
def reload_settings() -> Iterator[None]:
    """Reload the settings module after the test so env patches do not leak."""
    yield
    importlib.reload(settings_mod)


def _run_validation(monkeypatch: pytest.MonkeyPatch, **overrides: object) -> list[str]:
    """Run validate_config_dependencies with specific config attribute overrides."""
    for attr, value in overrides.items():
        monkeypatch.setattr(settings_mod.config, attr, value)
    return settings_mod.validate_config_dependencies()


class TestDefaults:
    def test_no_errors_with_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        errors = _run_validation(monkeypatch)
        assert errors == [], f"Expected no errors, got: {errors}"

    def test_env_values_are_read(self, reload_settings: None) -> None:
        env = {
            "ALIIF_SEED": "7",
            "ALIIF_QUERY_BATCH_SIZE": "128",
            "ALIIF_DEBUG_CHECKS": "true",
            "ALIIF_CHECKPOINT_DIR": "checkpoints",
        }
        with patch.dict(os.environ, env, clear=False):
            importlib.reload(settings_mod)
        assert settings_mod.config.ALIIF_SEED == 7
        assert settings_mod.config.QUERY_BATCH_SIZE == 128
        assert settings_mod.config.DEBUG_CHECKS is True
        assert settings_mod.config.CHECKPOINT_DIR == "checkpoints"

    def test_seed_unset_means_none(self, reload_settings: None) -> None:
        with patch.dict(os.environ, {"ALIIF_SEED": ""}, clear=False):
            importlib.reload(settings_mod)
        assert settings_mod.config.ALIIF_SEED is None


class TestNumericRanges:
    def test_query_batch_size_must_be_positive(self, monkeypatch: pytest.MonkeyPatch) -> None:
        errors = _run_validation(monkeypatch, QUERY_BATCH_SIZE=0)
        assert any("ALIIF_QUERY_BATCH_SIZE" in e for e in errors)

    def test_render_workers_must_be_positive(self, monkeypatch: pytest.MonkeyPatch) -> None:
        errors = _run_validation(monkeypatch, RENDER_WORKERS=0)
        assert any("ALIIF_RENDER_WORKERS" in e for e in errors)

    def test_negative_seed_is_an_error(self, monkeypatch: pytest.MonkeyPatch) -> None:
        errors = _run_validation(monkeypatch, ALIIF_SEED=-1)
        assert any("ALIIF_SEED" in e for e in errors)

    def test_tolerance_must_be_in_unit_interval(self, monkeypatch: pytest.MonkeyPatch) -> None:
        assert any("TOLERANCE" in e for e in _run_validation(monkeypatch, MIXTURE_SUM_TOLERANCE=0.0))
        assert any("TOLERANCE" in e for e in _run_validation(monkeypatch, MIXTURE_SUM_TOLERANCE=1.5))

    def test_valid_tolerance_produces_no_error(self, monkeypatch: pytest.MonkeyPatch) -> None:
        errors = _run_validation(monkeypatch, MIXTURE_SUM_TOLERANCE=1e-5)
        assert [e for e in errors if "TOLERANCE" in e] == []

    def test_empty_checkpoint_dir_is_an_error(self, monkeypatch: pytest.MonkeyPatch) -> None:
        errors = _run_validation(monkeypatch, CHECKPOINT_DIR="")
        assert any("ALIIF_CHECKPOINT_DIR" in e for e in errors)
