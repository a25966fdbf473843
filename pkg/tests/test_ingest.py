from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genflow.embedding import LocalEmbedder
from genflow.index import VectorIndex
from genflow.ingest import RawDocument, ingest_record, load_stopwords, preprocess_text

OUTPUT_SHAPE = re.compile(r"^([a-z0-9]+( [a-z0-9]+)*)?$")


def test_empty_input_fixpoint():
    assert preprocess_text("").joined == ""


def test_worked_example_social_noise():
    raw = "Amazing SDXL workflow!!! Visit https://x.co #sdxl @bob \U0001f600"
    assert preprocess_text(raw).joined == "amazing sdxl workflow visit"


def test_worked_example_html_and_stopwords():
    assert preprocess_text("<b>Img2Img</b> the best of the art").joined == "img2img best art"


def test_stopword_list_is_alnum_tokens():
    for word in load_stopwords():
        assert re.fullmatch(r"[a-z0-9]+", word)


def test_url_inside_text_never_leaks_host_tokens():
    # URL removal happens before punctuation-stripping, so the host never
    # splits into surviving tokens.
    out = preprocess_text("click https://x.co now").joined
    assert "x" not in out.split() and "co" not in out.split()
    assert out == "click"


def test_www_form_url_removed():
    assert preprocess_text("see www.example.com today").joined == "see today"


def test_email_removed():
    assert preprocess_text("mail me at bob@example.com please").joined == "mail please"


def test_social_tokens_removed_whole():
    assert preprocess_text("#img2img @artist rocks").joined == "rocks"
    # bare platform names are kept
    assert "twitter" in preprocess_text("posted on twitter").joined.split()


noise_strategy = st.text(
    alphabet=st.characters(codec="utf-8"), max_size=200
)


@settings(max_examples=300, deadline=None)
@given(noise_strategy)
def test_idempotence_and_alphabet(raw):
    clean = preprocess_text(raw)
    assert OUTPUT_SHAPE.fullmatch(clean.joined)
    assert preprocess_text(clean.joined).joined == clean.joined


@settings(max_examples=300, deadline=None)
@given(noise_strategy)
def test_noise_elimination(raw):
    out = preprocess_text(raw).joined
    for needle in ("http", "www.", "@", "#", "<", ">"):
        assert needle not in out


ADVERSARIAL = [
    "https://deep.link/path?q=a#frag",
    "prefixhttp://evil.example stays-gone",
    "x.www.y.z mid-token",
    "<div><a href='https://a.b'>text</a></div>",
    "email+tag@sub.domain.org trailing",
]


@pytest.mark.parametrize("raw", ADVERSARIAL)
def test_adversarial_noise(raw):
    out = preprocess_text(raw).joined
    for needle in ("http", "www.", "@", "#", "<", ">"):
        assert needle not in out
    assert OUTPUT_SHAPE.fullmatch(out)


def test_ingest_stores_clean_text():
    index = VectorIndex(64)
    embedder = LocalEmbedder(64)
    doc = RawDocument("wf1", "The BEST upscaler!!", likes=3, source="s")
    ingest_record(doc, embedder, index)
    record = index.get("wf1")
    assert record.clean_text == preprocess_text(doc.description).joined
    assert record.likes == 3


def test_ingest_upsert_replaces():
    index = VectorIndex(64)
    embedder = LocalEmbedder(64)
    ingest_record(RawDocument("wf1", "first text"), embedder, index)
    ingest_record(RawDocument("wf1", "second text entirely"), embedder, index)
    assert len(index) == 1
    assert "second" in index.get("wf1").clean_text


def test_ingest_three_docs_self_retrieval():
    index = VectorIndex(256)
    embedder = LocalEmbedder(256)
    docs = [
        RawDocument("a", "portrait upscaling workflow"),
        RawDocument("b", "landscape inpainting graph"),
        RawDocument("c", "cartoon style transfer pipeline"),
    ]
    for doc in docs:
        ingest_record(doc, embedder, index)
    assert len(index) == 3
    for doc in docs:
        clean = preprocess_text(doc.description).joined
        hits = index.search(embedder.embed(clean), 0.0, 1)
        assert hits[0][0].workflow_id == doc.workflow_id


def test_raw_document_requires_id():
    with pytest.raises(ValueError):
        RawDocument("", "text")
