"""
Configuration management using Pydantic Settings
"""

import logging
import sys
from typing import List, Optional

import structlog
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    # Service Configuration
    PORT: int = 8000
    DEBUG: bool = False
    ALLOWED_ORIGINS: List[str] = ["*"]

    # Authentication (empty secret disables the bearer check)
    SERVICE_SECRET: str = ""

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = False

    # State classification
    XTYPE_TOLERANCE: float = 1e-10

    # Numeric oracle
    ORACLE_METHOD: str = "nelder-mead"  # "nelder-mead" or "coordinate"
    ORACLE_RESTARTS: int = 32
    ORACLE_MAX_ITERATIONS: int = 3000
    ORACLE_STEP_TOLERANCE: float = 1e-9
    ORACLE_VALUE_TOLERANCE: float = 1e-12
    ORACLE_SEED: int = 0

    # Overrides every --seed / config-file seed when set
    SVET_SEED: Optional[int] = None

    # Sweeps
    SWEEP_WORKERS: int = 1
    AUDIT_GAP_TOLERANCE: float = 1e-3
    NONLOCALITY_THRESHOLD: float = 8.0

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


# Singleton instance
settings = Settings()


def configure_logging(level: Optional[str] = None, json_output: Optional[bool] = None):
    """
    Install the structlog pipeline used by the CLI and the service

    Args:
        level: Log level name, defaults to settings.LOG_LEVEL
        json_output: Render JSON lines instead of console output
    """
    level_name = (level or settings.LOG_LEVEL).upper()
    use_json = settings.LOG_JSON if json_output is None else json_output

    renderer = (
        structlog.processors.JSONRenderer()
        if use_json
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level_name, logging.INFO)
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
