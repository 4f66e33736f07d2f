"""
Structured JSON logging shared by every swarmq module
"""

import logging
import sys

import structlog

from swarmq.config import LOG_LEVEL

_configured = False


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Configure structlog once; later calls only adjust the root level."""
    global _configured
    if not _configured:
        logging.basicConfig(format="%(message)s", stream=sys.stderr)
        structlog.configure(
            processors=[
                structlog.stdlib.filter_by_level,
                structlog.stdlib.add_logger_name,
                structlog.stdlib.add_log_level,
                structlog.stdlib.PositionalArgumentsFormatter(),
                structlog.processors.TimeStamper(fmt="iso"),
                structlog.processors.StackInfoRenderer(),
                structlog.processors.format_exc_info,
                structlog.processors.UnicodeDecoder(),
                structlog.processors.JSONRenderer(),
            ],
            context_class=dict,
            logger_factory=structlog.stdlib.LoggerFactory(),
            wrapper_class=structlog.stdlib.BoundLogger,
            cache_logger_on_first_use=True,
        )
        _configured = True

    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))


def get_logger(name: str):
    configure_logging()
    return structlog.get_logger(name)
