"""Environment configuration.

Settings come from environment variables only and are loaded once, on first
use, through get_config().
"""

import logging
import os
from pathlib import Path

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "CFRIT_PRIME_CACHE_DIR"
THREADS_ENV = "CFRIT_THREADS"
LOG_LEVEL_ENV = "CFRIT_LOG_LEVEL"

CACHE_DISABLED = "off"
DEFAULT_CACHE_DIR = Path("~/.cache/mcp-cfrit-crunchtools/primes")


class Config:
    """Runtime configuration read from the environment."""

    def __init__(self) -> None:
        """Initialize configuration from environment variables.

        Raises:
            ConfigurationError: If a variable is set to an unusable value.
        """
        raw_cache = os.environ.get(CACHE_DIR_ENV, "").strip()
        if raw_cache.lower() == CACHE_DISABLED:
            self._cache_dir: Path | None = None
        else:
            self._cache_dir = Path(raw_cache or DEFAULT_CACHE_DIR).expanduser()
            if self._cache_dir.exists() and not self._cache_dir.is_dir():
                raise ConfigurationError(
                    f"{CACHE_DIR_ENV} must name a directory, got a file: {self._cache_dir}"
                )

        raw_threads = os.environ.get(THREADS_ENV, "").strip()
        if raw_threads:
            try:
                self._threads = int(raw_threads)
            except ValueError as e:
                raise ConfigurationError(f"{THREADS_ENV} must be an integer") from e
            if self._threads < 1:
                raise ConfigurationError(f"{THREADS_ENV} must be at least 1")
        else:
            self._threads = os.cpu_count() or 1

        self._log_level = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
        logger.debug("Configuration loaded: %s", self)

    @property
    def cache_dir(self) -> Path | None:
        """Safe-prime cache directory, or None when the disk cache is disabled."""
        return self._cache_dir

    @property
    def threads(self) -> int:
        """Default number of worker processes."""
        return self._threads

    @property
    def log_level(self) -> str:
        return self._log_level

    def __repr__(self) -> str:
        return f"Config(cache_dir={self._cache_dir}, threads={self._threads})"


_config: Config | None = None


def get_config() -> Config:
    """Get the global configuration instance.

    This function lazily initializes the configuration on first call.
    Subsequent calls return the same instance.

    Raises:
        ConfigurationError: If configuration is invalid.
    """
    global _config
    if _config is None:
        _config = Config()
    return _config
