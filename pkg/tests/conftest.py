from __future__ import annotations

import json
from pathlib import Path

import pytest

from genflow.catalog import builtin_catalog
from genflow.embedding import LocalEmbedder
from genflow.index import VectorIndex
from genflow.ingest import ingest_record, load_corpus_document

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def catalog():
    return builtin_catalog()


@pytest.fixture(scope="session")
def embedder():
    return LocalEmbedder(256)


@pytest.fixture(scope="session")
def corpus_docs():
    return [
        load_corpus_document(path)
        for path in sorted((FIXTURES / "corpus").glob("*.json"))
    ]


@pytest.fixture()
def corpus_index(embedder, corpus_docs) -> VectorIndex:
    index = VectorIndex(256)
    for doc in corpus_docs:
        ingest_record(doc, embedder, index)
    return index


def load_fixture_json(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))
