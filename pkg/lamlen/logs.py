import logging

from rich.logging import RichHandler

LOGGER_NAME = "lamlen"


def setup_logging(verbose: bool = False) -> logging.Logger:
    """Attach a single RichHandler to the package logger"""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(show_path=False, markup=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        logger.addHandler(handler)
    logger.propagate = False
    return logger
