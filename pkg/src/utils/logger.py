import os
import logging
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler

from src.config.config import LOGGING_CONFIG, LOGS_DIR

_loggers = {}


def get_logger(name="condbell"):
    """
    Get or create a logger instance

    Args:
        name (str): Name of the logger

    Returns:
        logging.Logger: Configured logger instance
    """
    if name in _loggers:
        return _loggers[name]

    # Create logger
    logger = logging.getLogger(name)

    # If logger already has handlers, return it
    if logger.handlers:
        _loggers[name] = logger
        return logger

    # Set log level
    logger.setLevel(logging.DEBUG)

    # Create formatters
    console_formatter = logging.Formatter(LOGGING_CONFIG['console_format'])
    file_formatter = logging.Formatter(LOGGING_CONFIG['format'])

    # Console handler; stdout is reserved for reports
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(LOGGING_CONFIG['console_level'])
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    # File handler with rotation
    os.makedirs(LOGS_DIR, exist_ok=True)

    log_file = os.path.join(LOGS_DIR, f'{name}_{datetime.now().strftime("%Y%m%d")}.log')
    file_handler = RotatingFileHandler(
        log_file,
        maxBytes=LOGGING_CONFIG['max_file_size'],
        backupCount=LOGGING_CONFIG['backup_count'],
        encoding='utf-8',
        delay=True
    )
    file_handler.setLevel(LOGGING_CONFIG['file_level'])
    file_handler.setFormatter(file_formatter)
    logger.addHandler(file_handler)

    # Module loggers (src.*) flow into the same handlers
    if name == "condbell":
        package_logger = logging.getLogger("src")
        package_logger.setLevel(logging.DEBUG)
        if not package_logger.handlers:
            package_logger.addHandler(console_handler)
            package_logger.addHandler(file_handler)
        package_logger.propagate = False

    # Prevent propagation to avoid duplicate logs
    logger.propagate = False

    # Cache the logger
    _loggers[name] = logger

    return logger


def set_console_level(level: int) -> None:
    """Adjust console verbosity of every logger created so far."""
    for logger in list(_loggers.values()) + [logging.getLogger("src")]:
        for handler in logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, RotatingFileHandler):
                handler.setLevel(level)
