import logging
import os
from datetime import datetime
from typing import Dict

from spectriple.constants import (LOG_LEVEL_CONSOLE, LOG_LEVEL_FILE,
                                  SPECTRIPLE_MAIN_FOLDER)

LOGGER_NAME = __name__.split(".")[0]
LOG_DIR = os.path.join(SPECTRIPLE_MAIN_FOLDER, "logs")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _build_handlers(log_dir: str) -> Dict[str, logging.Handler]:
    """Console and dated file handler, keyed by ``"console"`` and ``"file"``."""
    os.makedirs(log_dir, exist_ok=True)
    log_filepath = os.path.join(log_dir, datetime.now().strftime("%Y-%m-%d.log"))
    formatter = logging.Formatter(LOG_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(LOG_LEVEL_CONSOLE)
    file_handler = logging.FileHandler(log_filepath, mode="a")
    file_handler.setLevel(LOG_LEVEL_FILE)

    handlers = {"console": console_handler, "file": file_handler}
    for handler in handlers.values():
        handler.setFormatter(formatter)
    return handlers


logger = logging.getLogger(LOGGER_NAME)
logger.setLevel(logging.DEBUG)

# importing twice must not duplicate output
if not logger.hasHandlers():
    _HANDLERS = _build_handlers(LOG_DIR)
    logger.addHandler(_HANDLERS["console"])
    logger.addHandler(_HANDLERS["file"])
    logger.info("spectriple log file: %s", _HANDLERS["file"].baseFilename)
else:
    _HANDLERS = {
        ("file" if isinstance(h, logging.FileHandler) else "console"): h
        for h in logger.handlers
    }


def set_handler_level(kind: str, level: int) -> None:
    """
    Change the level of the ``"console"`` or ``"file"`` handler at runtime.

    Parameters
    ----------
    kind : str
        Which handler to change.
    level : int
        New logging level, e.g. ``logging.DEBUG``.
    """
    if kind not in _HANDLERS:
        raise ValueError("unknown handler %r, expected 'console' or 'file'" % kind)
    _HANDLERS[kind].setLevel(level)
    logger.info("%s log level changed to %s", kind, logging.getLevelName(level))


def change_console_logger_level(level: int) -> None:
    set_handler_level("console", level)


def change_file_logger_level(level: int) -> None:
    set_handler_level("file", level)
