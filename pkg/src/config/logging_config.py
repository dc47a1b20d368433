"""
Logging configuration for the A-LIIF engine.

Module loggers are children of their package logger; one stdout handler is
attached to the top of each hierarchy ("src" for library code, "__main__"
for scripts). JSON lines by default, LOG_FORMAT=simple prints bare messages
for interactive training runs.
"""

import logging
import os
import sys

from pythonjsonlogger import jsonlogger

JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(message)s"


def _formatter() -> logging.Formatter:
    if os.getenv("LOG_FORMAT") == "simple":
        return logging.Formatter("%(message)s")
    return jsonlogger.JsonFormatter(JSON_FIELDS, datefmt="%Y-%m-%dT%H:%M:%S")


def setup_logger(name: str, level: str | None = None) -> logging.Logger:
    """
    Logger for a module, usually called with __name__.

    level defaults to the LOG_LEVEL env var (INFO when unset) and applies to
    the whole hierarchy the module belongs to.
    """
    top = logging.getLogger(name.split(".")[0])
    if not top.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(_formatter())
        top.addHandler(handler)
        top.propagate = False
    level_name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    top.setLevel(getattr(logging, level_name, logging.INFO))
    return logging.getLogger(name)
