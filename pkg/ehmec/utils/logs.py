"""Logging setup shared by the CLI and library users."""
import logging
from typing import Optional

from ehmec.config import Settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(settings: Optional[Settings] = None, level: Optional[str] = None) -> None:
    """Configure the root logger from settings.

    ``level`` overrides ``settings.log_level``. Logs go to stderr, and also to
    ``settings.log_file`` when one is set.
    """
    settings = settings or Settings()
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
