"""Corpus ingestion: noise removal over crawled workflow descriptions.

The cleaning pipeline runs in a fixed stage order (tags, URLs, emails,
social tokens, non-ASCII, case folding, punctuation, tokenize, stopwords)
so that, e.g., a host name buried in a URL never survives as tokens.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

_HTML_TAG = re.compile(r"<[^>]*>")
# Whole-token removal: anything that looks URL-ish is noise, including
# bare "http..."/"www." fragments left behind by sloppy markup.
_URLISH = re.compile(r"(?<!\S)\S*(?:://|http|www\.)\S*")
_EMAIL = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
_SOCIAL = re.compile(r"(?<!\S)[#@]\S+")
_NON_ASCII = re.compile(r"[^\x00-\x7f]+")
_NON_ALNUM = re.compile(r"[^a-z0-9\s]")


@dataclass(frozen=True)
class RawDocument:
    workflow_id: str
    description: str
    likes: int = 0
    source: str = ""
    name: str = ""

    def __post_init__(self):
        if not self.workflow_id:
            raise ValueError("workflow id must be non-empty")
        if self.likes < 0:
            raise ValueError("likes must be non-negative")


@dataclass(frozen=True)
class CleanText:
    tokens: tuple[str, ...]

    @property
    def joined(self) -> str:
        return " ".join(self.tokens)


@lru_cache(maxsize=4)
def load_stopwords(path: str = "") -> frozenset[str]:
    """Stopword list; the shipped file unless a path is configured."""
    if path:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            resources.files("genflow").joinpath("data/stopwords.txt").read_text("utf-8")
        )
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def preprocess_text(raw: str, stopwords_path: str = "") -> CleanText:
    stopwords = load_stopwords(stopwords_path)
    text = _HTML_TAG.sub(" ", raw)
    text = _URLISH.sub(" ", text)
    text = _EMAIL.sub(" ", text)
    text = _SOCIAL.sub(" ", text)
    text = _NON_ASCII.sub(" ", text)
    text = text.lower()
    text = _NON_ALNUM.sub(" ", text)
    tokens = tuple(t for t in text.split() if t not in stopwords)
    return CleanText(tokens)


def load_corpus_document(path: str | Path) -> RawDocument:
    """One document per file: JSON with id, description, likes, source."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return RawDocument(
        workflow_id=doc["id"],
        description=doc.get("description", ""),
        likes=int(doc.get("likes", 0)),
        source=doc.get("source", str(path)),
        name=doc.get("name", doc["id"]),
    )


def ingest_record(doc: RawDocument, embedder, index, stopwords_path: str = "") -> str:
    """Clean, embed, and upsert one document; returns the workflow id."""
    clean = preprocess_text(doc.description, stopwords_path)
    vector = embedder.embed(clean.joined)
    index.upsert(
        workflow_id=doc.workflow_id,
        clean_text=clean.joined,
        embedding=vector,
        likes=doc.likes,
        source=doc.source,
        name=doc.name,
        description=doc.description,
    )
    return doc.workflow_id
