"""On-disk cache of moment blocks, moment records and zero tables.

Entries live in one JSON store per namespace; each entry carries the
SHA-256 of its canonical value and is dropped on load if that does not
match. Writers take an exclusive file lock, merge with what is on disk and
replace the store atomically.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time

import numpy as np
from filelock import FileLock

from . import __version__
from .zeros import ZeroTable

log = logging.getLogger(__name__)


def _canonical(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _checksum(value) -> str:
    return hashlib.sha256(_canonical(value).encode()).hexdigest()


def _round12(v):
    if isinstance(v, float):
        return float(f"{v:.12g}")
    if isinstance(v, (list, tuple)):
        return [_round12(u) for u in v]
    if isinstance(v, dict):
        return {k: _round12(u) for k, u in v.items()}
    return v


def digest(kind: str, params: dict, policy_fields: dict | None = None) -> str:
    """Cache key from the operation kind, parameters at 12 significant digits, policy and code version."""
    payload = {"kind": kind, "params": _round12(params), "policy": policy_fields or {}, "version": __version__}
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


class DiskStore:
    """Dict-like persistent store; pending writes go to disk on :meth:`flush`."""

    def __init__(self, root: str, namespace: str):
        self.root = root
        self.path = os.path.join(root, f"{namespace}.json")
        self._lock = FileLock(os.path.join(root, f".{namespace}.lock"))
        self._entries: dict = {}
        self._pending: dict = {}
        self.hits = 0
        os.makedirs(root, exist_ok=True)
        self._entries = self._load()

    def _load(self) -> dict:
        if not os.path.exists(self.path):
            return {}
        try:
            with open(self.path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, ValueError):
            log.warning("cache store %s unreadable, ignoring it", self.path)
            return {}
        good = {}
        for key, entry in raw.items():
            if isinstance(entry, dict) and entry.get("checksum") == _checksum(entry.get("value")):
                good[key] = entry
            else:
                log.warning("dropping cache entry %s: checksum mismatch", key[:12])
        return good

    @staticmethod
    def _key(key) -> str:
        return hashlib.sha256(f"{__version__}|{key}".encode()).hexdigest()

    def get(self, key, default=None):
        entry = self._pending.get(self._key(key)) or self._entries.get(self._key(key))
        if entry is None:
            return default
        self.hits += 1
        return entry["value"]

    def __setitem__(self, key, value):
        self._pending[self._key(key)] = {"value": value, "checksum": _checksum(value), "created_at": time.time()}

    def __contains__(self, key):
        k = self._key(key)
        return k in self._pending or k in self._entries

    def flush(self) -> None:
        if not self._pending:
            return
        with self._lock:
            current = self._load()
            current.update(self._pending)
            tmp = self.path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(current, fh, sort_keys=True)
            os.replace(tmp, self.path)
        self._entries = current
        self._pending = {}


class ZeroTableStore:
    """Zero tables saved as .npy files with a checksum in the index store."""

    GRANULE = 5000.0

    def __init__(self, root: str):
        self.root = root
        self.index = DiskStore(root, "zero_tables")

    def _name(self, t_max: float, key: str) -> str:
        return f"zeros-{int(t_max)}-{key[:12]}.npy"

    @classmethod
    def covering(cls, t: float) -> float:
        """Table size actually built for a request up to t (rounded up so tables get reused)."""
        return float(max(1, int(np.ceil(t / cls.GRANULE))) * cls.GRANULE)

    def load(self, t: float, policy) -> ZeroTable | None:
        t_max = self.covering(t)
        key = digest("zero_table", {"T_max": t_max}, policy.digest_fields())
        meta = self.index.get(key)
        if meta is None:
            return None
        path = os.path.join(self.root, meta["file"])
        try:
            arr = np.load(path, allow_pickle=False)
        except (OSError, ValueError):
            return None
        if hashlib.sha256(arr.tobytes()).hexdigest() != meta["sha256"]:
            log.warning("zero table %s failed its checksum, rebuilding", path)
            return None
        return ZeroTable(zeros=arr, upper_bound=t_max)

    def save(self, table: ZeroTable, policy) -> None:
        key = digest("zero_table", {"T_max": table.upper_bound}, policy.digest_fields())
        name = self._name(table.upper_bound, key)
        tmp = os.path.join(self.root, name + ".tmp.npy")
        np.save(tmp, table.zeros, allow_pickle=False)
        os.replace(tmp, os.path.join(self.root, name))
        self.index[key] = {"file": name, "sha256": hashlib.sha256(table.zeros.tobytes()).hexdigest()}
        self.index.flush()
