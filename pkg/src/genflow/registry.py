"""Local asset registry and installer for node packs and model checkpoints.

The registry is an append-only JSON-lines file; each line carries a CRC32
of its own payload so single-byte corruption is detected at load. The
managed root mirrors the folder conventions the execution backend
expects: ``models/`` for checkpoints, ``custom_nodes/`` for node packs.
Installs are atomic (temp file + rename) so a failed checksum never
leaves a partial file behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

from .errors import ChecksumMismatch, FetchFailure, PathEscape, RegistryCorrupt

KIND_NODE_PACK = "node_pack"
KIND_MODEL = "model"

MODEL_EXTENSIONS = (".safetensors", ".ckpt", ".pt")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class AssetDescriptor:
    name: str
    kind: str  # node_pack | model
    url: str
    save_path: str  # relative, forward slashes
    size_bytes: int
    checksum: str  # sha256 hex

    def __post_init__(self):
        if self.kind not in (KIND_NODE_PACK, KIND_MODEL):
            raise ValueError(f"unknown asset kind {self.kind!r}")
        if self.size_bytes < 0:
            raise ValueError("size_bytes must be non-negative")
        path = PurePosixPath(self.save_path)
        if path.is_absolute() or ".." in path.parts:
            raise PathEscape(self.save_path)
        prefix = "models" if self.kind == KIND_MODEL else "custom_nodes"
        if not path.parts or path.parts[0] != prefix:
            raise ValueError(f"{self.kind} save path must live under {prefix}/")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "url": self.url,
            "save_path": self.save_path,
            "size_bytes": self.size_bytes,
            "checksum": self.checksum,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AssetDescriptor":
        return cls(
            name=obj["name"],
            kind=obj["kind"],
            url=obj["url"],
            save_path=obj["save_path"],
            size_bytes=int(obj["size_bytes"]),
            checksum=obj["checksum"],
        )


def _line_crc(payload: dict) -> int:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return zlib.crc32(canonical.encode("utf-8"))


class AssetRegistry:
    """Append-only JSONL store keyed by (name, kind); last write wins."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[tuple[str, str], AssetDescriptor] = {}
        self._lock = threading.RLock()
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        for lineno, raw in enumerate(
            self.path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
                crc = obj.pop("line_crc")
            except (json.JSONDecodeError, KeyError) as exc:
                raise RegistryCorrupt(f"{self.path}:{lineno}: {exc}") from exc
            if _line_crc(obj) != crc:
                raise RegistryCorrupt(f"{self.path}:{lineno}: CRC mismatch")
            descriptor = AssetDescriptor.from_json(obj)
            self._entries[(descriptor.name, descriptor.kind)] = descriptor

    def lookup(self, name: str, kind: str) -> AssetDescriptor | None:
        """Exact-name lookup; None means 'not found, try exploration'."""
        with self._lock:
            return self._entries.get((name, kind))

    def upsert(self, descriptor: AssetDescriptor) -> None:
        payload = descriptor.to_json()
        payload["line_crc"] = _line_crc(descriptor.to_json())
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(payload) + "\n")
            self._entries[(descriptor.name, descriptor.kind)] = descriptor

    def descriptors(self) -> list[AssetDescriptor]:
        with self._lock:
            return sorted(self._entries.values(), key=lambda d: (d.kind, d.name))


# -- fetchers ---------------------------------------------------------------


class SimulatedFetcher:
    """Serves bytes from an in-memory map, with optional injected latency.

    Call count is exposed so locality contracts can be asserted.
    """

    def __init__(self, contents: dict[str, bytes] | None = None, latency_ms: float = 0.0):
        self.contents = dict(contents or {})
        self.latency_ms = latency_ms
        self.calls = 0

    def fetch(self, descriptor: AssetDescriptor) -> bytes:
        self.calls += 1
        if self.latency_ms > 0:
            time.sleep(self.latency_ms / 1000.0)
        if descriptor.url not in self.contents:
            raise FetchFailure(f"no simulated content for {descriptor.url}")
        return self.contents[descriptor.url]


class HttpFetcher:
    def __init__(self, timeout_s: float = 30.0):
        self.timeout_s = timeout_s
        self.calls = 0

    def fetch(self, descriptor: AssetDescriptor) -> bytes:
        import requests

        self.calls += 1
        try:
            resp = requests.get(descriptor.url, timeout=self.timeout_s)
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise FetchFailure(str(exc)) from exc
        return resp.content


class CacheFetcher:
    """Reads asset bytes from the local blob cache next to the registry.

    This is the local-database path: using it involves no outbound fetch.
    """

    def __init__(self, cache_dir: str | Path):
        self.cache_dir = Path(cache_dir)

    def blob_path(self, checksum: str) -> Path:
        return self.cache_dir / checksum

    def store(self, data: bytes) -> str:
        checksum = sha256_hex(data)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.blob_path(checksum).write_bytes(data)
        return checksum

    def fetch(self, descriptor: AssetDescriptor) -> bytes:
        path = self.blob_path(descriptor.checksum)
        if not path.exists():
            raise FetchFailure(f"blob {descriptor.checksum} not in local cache")
        return path.read_bytes()


# -- install ----------------------------------------------------------------


@dataclass
class AssetInstallStatus:
    descriptor: AssetDescriptor
    installed: bool
    elapsed_ms: float
    error: str = ""


@dataclass
class InstallResult:
    statuses: list[AssetInstallStatus] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.installed for s in self.statuses)


_install_locks: dict[str, threading.Lock] = {}
_install_locks_guard = threading.Lock()


def _lock_for(name: str) -> threading.Lock:
    with _install_locks_guard:
        return _install_locks.setdefault(name, threading.Lock())


def resolve_save_path(root: Path, save_path: str) -> Path:
    dest = (root / save_path).resolve()
    if not str(dest).startswith(str(root.resolve()) + os.sep):
        raise PathEscape(save_path)
    return dest


def install(
    plan: list[AssetDescriptor],
    fetcher,
    root: str | Path,
    registry: AssetRegistry | None = None,
) -> InstallResult:
    """Fetch, verify, and atomically write each asset under the root."""
    root = Path(root)
    result = InstallResult()
    for descriptor in plan:
        started = time.perf_counter()
        status = AssetInstallStatus(descriptor, installed=False, elapsed_ms=0.0)
        with _lock_for(descriptor.name):
            try:
                dest = resolve_save_path(root, descriptor.save_path)
                data = fetcher.fetch(descriptor)
                digest = sha256_hex(data)
                if digest != descriptor.checksum:
                    raise ChecksumMismatch(
                        f"{descriptor.name}: expected {descriptor.checksum}, got {digest}"
                    )
                dest.parent.mkdir(parents=True, exist_ok=True)
                tmp = dest.with_name(dest.name + ".part")
                tmp.write_bytes(data)
                tmp.replace(dest)
                if registry is not None:
                    registry.upsert(descriptor)
                status.installed = True
            except (ChecksumMismatch, FetchFailure, PathEscape) as exc:
                status.error = f"{type(exc).__name__}: {exc}"
        status.elapsed_ms = (time.perf_counter() - started) * 1000.0
        result.statuses.append(status)
    return result
