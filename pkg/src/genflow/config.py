"""Plain key-value configuration.

Config files are lines of ``key = value``; blank lines and ``#`` comments
are ignored. All keys used by the engine have defaults, so a missing file
is a valid (default) configuration. The file path comes from the
``GENFLOW_CONFIG`` env var unless given explicitly.
"""

from __future__ import annotations

import os
from pathlib import Path

DEFAULTS: dict[str, str] = {
    "embed.provider": "local",
    "embed.dimension": "256",
    "embed.remote.endpoint": "",
    "embed.remote.timeout_s": "5",
    "embed.remote.retries": "2",
    "search.threshold": "0.30",
    "search.k": "5",
    "pilot.alpha": "0.7",
    "pilot.k": "5",
    "pilot.snippet_chars": "240",
    "merge.tau": "0.5",
    "ingest.stopwords_path": "",
    "fetch.mode": "simulated",
    "fetch.simulated.latency_ms": "0",
    "jobs.workers": "4",
}


class Config:
    def __init__(self, values: dict[str, str] | None = None):
        self._values = dict(DEFAULTS)
        if values:
            self._values.update(values)
        self._validate()

    def _validate(self) -> None:
        threshold = self.get_float("search.threshold")
        if not 0.0 <= threshold <= 1.0:
            raise ValueError(f"search.threshold must be in [0,1], got {threshold}")
        tau = self.get_float("merge.tau")
        if tau < 0.0:
            raise ValueError(f"merge.tau must be non-negative, got {tau}")
        if self.get("embed.provider") not in ("local", "remote"):
            raise ValueError("embed.provider must be 'local' or 'remote'")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Config":
        if path is None:
            path = os.environ.get("GENFLOW_CONFIG", "")
        values: dict[str, str] = {}
        if path and Path(path).exists():
            for raw in Path(path).read_text(encoding="utf-8").splitlines():
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ValueError(f"bad config line: {raw!r}")
                values[key.strip()] = value.strip()
        return cls(values)

    def get(self, key: str, default: str | None = None) -> str:
        if key in self._values:
            return self._values[key]
        if default is not None:
            return default
        raise KeyError(key)

    def get_int(self, key: str) -> int:
        return int(self.get(key))

    def get_float(self, key: str) -> float:
        return float(self.get(key))
