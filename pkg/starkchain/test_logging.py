"""
Tests for the logging setup.
"""

import json
import logging

from starkchain.core.logging import setup_logging


def _console_formatter() -> logging.Formatter:
    handlers = logging.getLogger("starkchain").handlers
    assert len(handlers) == 1
    return handlers[0].formatter


def _record(message: str) -> logging.LogRecord:
    return logging.LogRecord("starkchain.test", logging.WARNING, __file__, 1, message, None, None)


def test_json_console_lines():
    try:
        setup_logging(log_level="INFO", json_format=True)
        line = json.loads(_console_formatter().format(_record("cell skipped")))
        assert line["level"] == "WARNING"
        assert line["logger"] == "starkchain.test"
        assert line["message"] == "cell skipped"
    finally:
        setup_logging(log_level="INFO", json_format=False)


def test_plain_console_lines_by_default():
    setup_logging(log_level="INFO")
    text = _console_formatter().format(_record("cell skipped"))
    assert text.endswith(" - starkchain.test - WARNING - cell skipped")
