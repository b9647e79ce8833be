import logging

import pytest

from spectriple.constants import disable_stdout_logs, enable_stdout_logs
from spectriple.logger import logger, set_handler_level



def _console():
    return next(h for h in logger.handlers if not isinstance(h, logging.FileHandler))


def test_single_console_and_file_handler():
    kinds = sorted(type(h).__name__ for h in logger.handlers)
    assert kinds == ["FileHandler", "StreamHandler"]


def test_stdout_toggle():
    """enable/disable only touch the console handler."""
    file_level = next(h for h in logger.handlers if isinstance(h, logging.FileHandler)).level
    enable_stdout_logs()
    assert _console().level == logging.DEBUG
    disable_stdout_logs()
    assert _console().level == logging.CRITICAL
    assert next(h for h in logger.handlers if isinstance(h, logging.FileHandler)).level == file_level


def test_unknown_handler():
    with pytest.raises(ValueError):
        set_handler_level("syslog", logging.INFO)
