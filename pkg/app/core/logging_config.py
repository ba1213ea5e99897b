import logging

from app.core.config import settings

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def configure_logging(level: str = None) -> None:
    """Root logging for both the CLI and the API."""
    logging.basicConfig(level=(level or settings.LOG_LEVEL).upper(), format=LOG_FORMAT)
    if not settings.DEBUG:
        logging.getLogger("matplotlib").setLevel(logging.WARNING)
