"""Safe-prime cache keyed by bit length.

Entries live in memory for the process and, unless disabled, on disk as
decimal text: first line q, second line p. Disk writes go through a temporary
file and os.replace, so concurrent writers are last-writer-wins with identical
content.
"""

import logging
import os
import tempfile
import threading
from pathlib import Path

from .config import get_config

logger = logging.getLogger(__name__)


class PrimeCache:
    """Two-level (memory, disk) cache of (q, p) pairs."""

    def __init__(self, directory: Path | None = None) -> None:
        self._directory = directory
        self._memory: dict[int, tuple[int, int]] = {}
        self._lock = threading.Lock()

    @property
    def directory(self) -> Path | None:
        return self._directory

    def _path(self, kappa: int) -> Path | None:
        if self._directory is None:
            return None
        return self._directory / f"safe_q_{kappa}.txt"

    def lookup(self, kappa: int) -> tuple[int, int] | None:
        """Return the cached (q, p) for kappa, or None."""
        with self._lock:
            hit = self._memory.get(kappa)
        if hit is not None:
            return hit

        path = self._path(kappa)
        if path is None or not path.is_file():
            return None
        try:
            lines = path.read_text(encoding="ascii").split()
            q, p = int(lines[0]), int(lines[1])
        except (OSError, ValueError, IndexError):
            logger.warning("Ignoring unreadable prime cache entry %s", path)
            return None

        logger.debug("Prime cache hit for kappa=%d at %s", kappa, path)
        with self._lock:
            self._memory[kappa] = (q, p)
        return q, p

    def store(self, kappa: int, q: int, p: int) -> None:
        """Record (q, p) for kappa in memory and, if enabled, on disk."""
        with self._lock:
            self._memory[kappa] = (q, p)

        path = self._path(kappa)
        if path is None:
            return
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="ascii") as fh:
                fh.write(f"{q}\n{p}\n")
            os.replace(tmp, path)
        except OSError as e:
            logger.warning("Could not write prime cache entry %s: %s", path, e)

    def forget(self, kappa: int) -> None:
        """Drop a memory entry (the disk entry is left for other processes)."""
        with self._lock:
            self._memory.pop(kappa, None)


_cache: PrimeCache | None = None


def get_prime_cache() -> PrimeCache:
    """Get the global prime cache, rooted at the configured directory."""
    global _cache
    if _cache is None:
        _cache = PrimeCache(get_config().cache_dir)
    return _cache
