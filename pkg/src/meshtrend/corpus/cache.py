"""On-disk cache of live yearly counts, keyed by (ui, year)."""

import logging
import os
import tempfile
import threading
from pathlib import Path

import pandas as pd

logger = logging.getLogger(__name__)

CACHE_COLUMNS = ["ui", "year", "count"]


class CountCache:
    """CSV-backed map of (ui, year) to a major-topic article count."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._counts: dict[tuple[str, int], int] = {}
        self._dirty = False
        self._lock = threading.Lock()

        if self.path.exists() and self.path.stat().st_size > 0:
            frame = pd.read_csv(self.path, dtype={"ui": str, "year": int, "count": int})
            for ui, year, count in frame[CACHE_COLUMNS].itertuples(index=False):
                self._counts[(ui, int(year))] = int(count)
            logger.info(f"Loaded {len(self._counts)} cached counts from {self.path}")

    def __len__(self) -> int:
        return len(self._counts)

    def get(self, ui: str, year: int) -> int | None:
        with self._lock:
            return self._counts.get((ui, year))

    def put(self, ui: str, year: int, count: int) -> None:
        with self._lock:
            self._counts[(ui, year)] = int(count)
            self._dirty = True

    def save(self) -> None:
        """Write the cache atomically if anything changed."""
        with self._lock:
            if not self._dirty:
                return
            rows = [(ui, year, count) for (ui, year), count in sorted(self._counts.items())]
            self._dirty = False

        frame = pd.DataFrame(rows, columns=CACHE_COLUMNS)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, suffix=".tmp")
        os.close(fd)
        frame.to_csv(tmp, index=False)
        os.replace(tmp, self.path)
        logger.debug(f"Saved {len(rows)} cached counts to {self.path}")
