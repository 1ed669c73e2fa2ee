"""Content-addressed JSON cache for exact stage results.

Each entry is one file named by the sha256 of (stage, parameters, code
version).  The payload carries its own checksum; a file that fails to parse
or to verify is treated as a miss and overwritten.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import __version__

CACHE_ENV = "ONSAGERKIT_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "onsagerkit"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cache_key(stage: str, params: dict, version: str = __version__) -> str:
    text = canonical_json({"stage": stage, "params": params, "version": version})
    return hashlib.sha256(text.encode()).hexdigest()


def _checksum(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


@dataclass
class ResultCache:
    root: Path | None
    version: str = __version__
    hits: int = 0
    misses: int = 0
    corrupted: int = 0

    def path_for(self, stage: str, params: dict) -> Path:
        assert self.root is not None
        return self.root / f"{stage}-{cache_key(stage, params, self.version)[:24]}.json"

    def load(self, stage: str, params: dict):
        """Payload for (stage, params), or None on miss, stale version or corruption."""
        if self.root is None:
            return None
        path = self.path_for(stage, params)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
            ok = (
                entry["key"] == cache_key(stage, params, self.version)
                and entry["version"] == self.version
                and entry["checksum"] == _checksum(entry["payload"])
            )
        except (ValueError, KeyError, TypeError, UnicodeDecodeError):
            ok = False
        if not ok:
            self.corrupted += 1
            print(f"warning: cache entry {path.name} failed verification; recomputing",
                  file=sys.stderr)
            return None
        return entry["payload"]

    def store(self, stage: str, params: dict, payload) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        entry = {
            "key": cache_key(stage, params, self.version),
            "stage": stage,
            "params": params,
            "version": self.version,
            "checksum": _checksum(payload),
            "payload": payload,
        }
        path = self.path_for(stage, params)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(entry, fh, sort_keys=True, indent=1)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def get_or_compute(self, stage: str, params: dict, compute: Callable[[], object]):
        payload = self.load(stage, params)
        if payload is not None:
            self.hits += 1
            return payload
        self.misses += 1
        payload = compute()
        self.store(stage, params, payload)
        return payload
