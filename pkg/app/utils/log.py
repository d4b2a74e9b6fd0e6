import logging

from rich.logging import RichHandler


def get_logger(logger_name: str, level: str = "INFO") -> logging.Logger:
    # https://rich.readthedocs.io/en/latest/reference/logging.html#rich.logging.RichHandler
    _logger = logging.getLogger(logger_name)

    # Worker processes re-import this module; keep a single handler per logger
    if not any(isinstance(h, RichHandler) for h in _logger.handlers):
        rich_handler = RichHandler(
            show_time=False,
            rich_tracebacks=False,
            show_path=False,
            tracebacks_show_locals=False,
        )
        rich_handler.setFormatter(
            logging.Formatter(
                fmt="%(message)s",
                datefmt="[%X]",
            )
        )
        _logger.addHandler(rich_handler)

    _logger.setLevel(level.upper())
    _logger.propagate = False
    return _logger


def set_log_level(level: str) -> None:
    """Change the level of the shared application logger."""
    logger.setLevel(level.upper())


logger: logging.Logger = get_logger("uoco")
