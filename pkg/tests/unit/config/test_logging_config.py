"""
Unit tests for logger setup.
"""

import logging
from collections.abc import Iterator

import pytest

from src.config.logging_config import setup_logger


@pytest.fixture()
def fresh_hierarchy() -> Iterator[str]:
    name = "aliif_logtest"
    yield name
    top = logging.getLogger(name)
    for handler in list(top.handlers):
        top.removeHandler(handler)
    top.setLevel(logging.NOTSET)
    top.propagate = True


class TestSetupLogger:
    def test_module_loggers_share_one_handler(self, fresh_hierarchy: str) -> None:
        first = setup_logger(f"{fresh_hierarchy}.a.b")
        second = setup_logger(f"{fresh_hierarchy}.c")
        top = logging.getLogger(fresh_hierarchy)
        assert first.name == f"{fresh_hierarchy}.a.b"
        assert not first.handlers and not second.handlers
        assert len(top.handlers) == 1

    def test_explicit_level_wins_over_env(self, fresh_hierarchy: str, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("LOG_LEVEL", "ERROR")
        logger = setup_logger(f"{fresh_hierarchy}.mod", level="debug")
        assert logger.getEffectiveLevel() == logging.DEBUG

    def test_unknown_level_falls_back_to_info(self, fresh_hierarchy: str, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("LOG_LEVEL", "chatty")
        assert setup_logger(fresh_hierarchy).getEffectiveLevel() == logging.INFO

    def test_simple_format_prints_bare_message(self, fresh_hierarchy: str) -> None:
        setup_logger(fresh_hierarchy)
        (handler,) = logging.getLogger(fresh_hierarchy).handlers
        record = logging.LogRecord(fresh_hierarchy, logging.INFO, __file__, 1, "epoch 3", None, None)
        assert handler.format(record) == "epoch 3"
