"""Logging configuration for surit."""

import logging
import logging.config
from typing import Any

import structlog
from rich.console import Console

from surit.config import settings


def setup_logging(level: str | None = None) -> None:
    """Set up structured logging with rich console output."""

    if settings.log_to_file:
        settings.log_dir.mkdir(parents=True, exist_ok=True)

    # Configure structlog
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

    logging.config.dictConfig(get_logging_config())

    resolved = (level or settings.log_level).upper()
    if settings.app_env == "development" and level is None:
        resolved = "DEBUG"
    logging.getLogger("surit").setLevel(resolved)


def get_logging_config() -> dict[str, Any]:
    """Get logging configuration dictionary."""

    handlers: dict[str, dict[str, Any]] = {
        "console": {
            "class": "rich.logging.RichHandler",
            "level": "DEBUG" if settings.app_env == "development" else "INFO",
            "formatter": "rich",
            "console": Console(stderr=True),
            "show_time": True,
            "show_level": True,
            "show_path": False,
            "rich_tracebacks": True,
        },
    }
    surit_handlers = ["console"]

    if settings.log_to_file:
        handlers["file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "INFO",
            "formatter": "json",
            "filename": str(settings.log_dir / "surit.log"),
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
        }
        handlers["error_file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "ERROR",
            "formatter": "json",
            "filename": str(settings.log_dir / "errors.log"),
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
        }
        surit_handlers += ["file", "error_file"]

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "json": {
                "()": structlog.stdlib.ProcessorFormatter,
                "processor": structlog.processors.JSONRenderer(),
            },
            "rich": {
                "format": "%(message)s",
                "datefmt": "[%X]",
            },
        },
        "handlers": handlers,
        "loggers": {
            "surit": {
                "level": "DEBUG",
                "handlers": surit_handlers,
                "propagate": False,
            },
        },
        "root": {
            "level": "WARNING",
            "handlers": ["console"],
        },
    }


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


# Performance monitoring logger
perf_logger = get_logger("surit.performance")

# Training loop logger
train_logger = get_logger("surit.training")

# Corpus generation logger
data_logger = get_logger("surit.data")

# Oracle suite logger
verify_logger = get_logger("surit.verify")

# Decoding and scoring logger
eval_logger = get_logger("surit.eval")
