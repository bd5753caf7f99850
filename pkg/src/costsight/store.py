"""Durable answer storage.

The default store is a single append-only JSON-lines file with fsync on every
append: simple, auditable, and replayable at any point. Appends are
serialized through a lock; anything matching the small protocol below (append
and replay) can be plugged into the service instead.
"""

import json
import os
import threading

from .costmatrix import AnswerRecord


class JsonlAnswerStore:
    """Append-only JSON-lines store for answer records."""

    def __init__(self, path, fsync=True):
        self.path = str(path)
        self.fsync = fsync
        self._lock = threading.Lock()
        self._count = 0
        if os.path.exists(self.path):
            with open(self.path, encoding="utf-8") as f:
                self._count = sum(1 for line in f if line.strip())

    def __len__(self):
        return self._count

    def append(self, record):
        """Durably append one record; returns the stored id."""
        line = json.dumps(record.to_dict(), separators=(",", ":"))
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line)
                f.write("\n")
                f.flush()
                if self.fsync:
                    os.fsync(f.fileno())
            self._count += 1
            return f"a{self._count:06d}"

    def replay(self):
        """All stored records in append order."""
        if not os.path.exists(self.path):
            return []
        out = []
        with open(self.path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    out.append(AnswerRecord.from_dict(json.loads(line)))
        return out

    def __iter__(self):
        return iter(self.replay())
