"""In-process vector store with exact cosine search and file persistence.

On-disk layout (little-endian throughout): header ``GFIX`` magic, u32
version, u32 dimension, u32 record count; then per record the
length-prefixed strings id, clean text, source, name, description, a u32
likes field, and dimension float32 embedding values.

Concurrency contract: many readers or one writer. A coarse RLock keeps
search from observing a partially applied upsert.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .embedding import EmbeddingVector, cosine, normalize

MAGIC = b"GFIX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class WorkflowRecord:
    workflow_id: str
    clean_text: str
    embedding: EmbeddingVector
    likes: int
    source: str
    name: str
    description: str


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u32(self) -> int:
        (value,) = struct.unpack_from("<I", self.data, self.pos)
        self.pos += 4
        return value

    def string(self) -> str:
        length = self.u32()
        raw = self.data[self.pos : self.pos + length]
        self.pos += length
        return raw.decode("utf-8")

    def floats(self, n: int) -> tuple[float, ...]:
        values = struct.unpack_from(f"<{n}f", self.data, self.pos)
        self.pos += 4 * n
        return values


class VectorIndex:
    def __init__(self, dimension: int, path: str | Path | None = None):
        self.dimension = dimension
        self.path = Path(path) if path else None
        self._records: dict[str, WorkflowRecord] = {}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._records)

    def upsert(
        self,
        workflow_id: str,
        clean_text: str,
        embedding: EmbeddingVector,
        likes: int = 0,
        source: str = "",
        name: str = "",
        description: str = "",
    ) -> None:
        if embedding.dimension != self.dimension:
            from .errors import DimensionMismatch

            raise DimensionMismatch(
                f"record dimension {embedding.dimension}, index {self.dimension}"
            )
        record = WorkflowRecord(
            workflow_id, clean_text, embedding, likes, source, name, description
        )
        with self._lock:
            self._records[workflow_id] = record

    def get(self, workflow_id: str) -> WorkflowRecord | None:
        with self._lock:
            return self._records.get(workflow_id)

    def records(self) -> list[WorkflowRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda r: r.workflow_id)

    def search(
        self,
        query: EmbeddingVector,
        sim_threshold: float,
        k: int,
        metadata_filter: Callable[[WorkflowRecord], bool] | None = None,
    ) -> list[tuple[WorkflowRecord, float]]:
        """Exhaustive scan: every record with similarity >= threshold and
        passing the filter, descending similarity, ties by ascending id,
        truncated to k."""
        if not 0.0 <= sim_threshold <= 1.0:
            raise ValueError("sim_threshold must be in [0,1]")
        if k <= 0:
            raise ValueError("k must be positive")
        hits: list[tuple[WorkflowRecord, float]] = []
        with self._lock:
            for record in self._records.values():
                if not record.embedding.normalizable:
                    continue
                if metadata_filter is not None and not metadata_filter(record):
                    continue
                sim = cosine(query, record.embedding)
                if sim >= sim_threshold:
                    hits.append((record, sim))
        hits.sort(key=lambda pair: (-pair[1], pair[0].workflow_id))
        return hits[:k]

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path | None = None) -> None:
        path = Path(path) if path else self.path
        if path is None:
            raise ValueError("no path configured")
        with self._lock:
            records = self.records()
            blob = bytearray()
            blob += MAGIC
            blob += struct.pack("<III", FORMAT_VERSION, self.dimension, len(records))
            for r in records:
                blob += _pack_str(r.workflow_id)
                blob += _pack_str(r.clean_text)
                blob += _pack_str(r.source)
                blob += _pack_str(r.name)
                blob += _pack_str(r.description)
                blob += struct.pack("<I", r.likes)
                blob += struct.pack(f"<{self.dimension}f", *r.embedding.values)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(bytes(blob))
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        data = Path(path).read_bytes()
        if data[:4] != MAGIC:
            raise ValueError("not a GFIX index file")
        reader = _Reader(data)
        reader.pos = 4
        version = reader.u32()
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported index version {version}")
        dimension = reader.u32()
        count = reader.u32()
        index = cls(dimension, path)
        for _ in range(count):
            workflow_id = reader.string()
            clean_text = reader.string()
            source = reader.string()
            name = reader.string()
            description = reader.string()
            likes = reader.u32()
            values = reader.floats(dimension)
            # float32 storage loses a little precision; renormalize so
            # self-similarity stays 1 within 1e-6.
            if any(values):
                embedding = normalize(values)
            else:
                embedding = EmbeddingVector(values, normalizable=False)
            index._records[workflow_id] = WorkflowRecord(
                workflow_id, clean_text, embedding, likes, source, name, description
            )
        return index

    @classmethod
    def open_or_create(cls, path: str | Path, dimension: int) -> "VectorIndex":
        path = Path(path)
        if path.exists():
            index = cls.load(path)
            if index.dimension != dimension:
                from .errors import DimensionMismatch

                raise DimensionMismatch(
                    f"index file dimension {index.dimension}, configured {dimension}"
                )
            return index
        return cls(dimension, path)
