import logging

from rich.logging import RichHandler

LOGGER_NAME = "pltvsar"

log = logging.getLogger(LOGGER_NAME)


def setup_logging(level="INFO"):
    """Attach a rich handler to the package logger once and set its level.

    Args:
        level (Union[str, int]): logging level name or number

    Returns:
        logging.Logger: the package logger
    """
    if not any(isinstance(h, RichHandler) for h in log.handlers):
        handler = RichHandler(rich_tracebacks=True, show_path=False)
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        log.addHandler(handler)
        log.propagate = False
    log.setLevel(level if isinstance(level, int) else level.upper())
    return log
