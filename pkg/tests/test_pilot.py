from __future__ import annotations

import math

import pytest

from genflow.embedding import LocalEmbedder, cosine
from genflow.errors import EmptyQueryAfterCleaning
from genflow.index import VectorIndex, WorkflowRecord
from genflow.ingest import RawDocument, ingest_record, preprocess_text
from genflow.pilot import (
    DefaultCurator,
    FallbackSignal,
    PilotQuery,
    RankedResult,
    curate,
    pilot_search,
    rank_results,
    truncate_snippet,
)


def record(wid, likes=0, text="t", vec=None):
    return WorkflowRecord(wid, text, vec, likes, "s", wid, text)


def test_rank_single_hit_any_alpha():
    hit = (record("only", likes=5), 0.8)
    for alpha in (0.0, 0.3, 0.7, 1.0):
        assert rank_results([hit], alpha)[0][0].workflow_id == "only"


def test_rank_equal_similarity_popularity_decides():
    hits = [(record("low", likes=3), 0.8), (record("high", likes=100), 0.8)]
    for alpha in (0.0, 0.25, 0.5, 0.99):
        ordered = rank_results(hits, alpha)
        assert ordered[0][0].workflow_id == "high"


def test_rank_worked_example_063_vs_086():
    hits = [(record("a", likes=0), 0.9), (record("b", likes=1000), 0.8)]
    ordered = rank_results(hits, alpha=0.7)
    scores = {r.workflow_id: score for r, _sim, score in ordered}
    assert math.isclose(scores["a"], 0.63, abs_tol=1e-12)
    assert math.isclose(scores["b"], 0.86, abs_tol=1e-12)
    assert [r.workflow_id for r, _, _ in ordered] == ["b", "a"]


def test_rank_alpha_extremes():
    hits = [
        (record("a", likes=1), 0.9),
        (record("b", likes=500), 0.6),
        (record("c", likes=50), 0.75),
    ]
    by_sim = [r.workflow_id for r, _, _ in rank_results(hits, alpha=1.0)]
    assert by_sim == ["a", "c", "b"]
    by_pop = [r.workflow_id for r, _, _ in rank_results(hits, alpha=0.0)]
    assert by_pop == ["b", "c", "a"]


def test_rank_all_zero_likes_popularity_zero():
    hits = [(record("a", likes=0), 0.9), (record("b", likes=0), 0.5)]
    ordered = rank_results(hits, alpha=0.7)
    assert [round(score, 12) for _, _, score in ordered] == [0.63, 0.35]


def test_truncate_word_boundary():
    text = "word " * 100  # 500 chars
    snippet = truncate_snippet(text.strip(), 240)
    assert len(snippet) <= 240
    assert not snippet.endswith("wor")
    assert all(piece == "word" for piece in snippet.split())


def test_curate_keeps_overlap_drops_disjoint():
    results = [
        RankedResult("keep", "k", "city lights", 0.9, 0, 0.9, clean_text="city lights"),
        RankedResult("drop", "d", "other", 0.8, 0, 0.8, clean_text="other words"),
    ]
    curated = curate("city skyline", results)
    assert [r.workflow_id for r in curated] == ["keep"]
    assert curated[0].rank == 1


def test_curator_failure_degrades_to_default():
    class Exploding:
        def curate(self, clean_query, results):
            raise RuntimeError("llm down")

    results = [RankedResult("a", "a", "city", 0.9, 0, 0.9, clean_text="city")]
    curated = curate("city", results, Exploding())
    assert [r.workflow_id for r in curated] == ["a"]


def test_hash_collision_dropped_by_validation():
    # At dimension 4 "alpha" and "bravo" land in the same signed bucket,
    # so their embeddings are identical while sharing zero tokens.
    embedder = LocalEmbedder(4)
    assert cosine(embedder.embed("alpha"), embedder.embed("bravo")) == pytest.approx(1.0)
    index = VectorIndex(4)
    ingest_record(RawDocument("collide", "bravo"), embedder, index)
    outcome = pilot_search(PilotQuery("alpha"), index, embedder, sim_threshold=0.3)
    assert outcome == []


def build_index(embedder, docs):
    index = VectorIndex(256)
    for doc in docs:
        ingest_record(doc, embedder, index)
    return index


def test_pilot_self_query_rank_one(embedder):
    docs = [
        RawDocument("a", "portrait upscaling workflow", likes=1),
        RawDocument("b", "landscape inpainting graph", likes=900),
    ]
    index = build_index(embedder, docs)
    results = pilot_search(PilotQuery("portrait upscaling workflow"), index, embedder)
    assert results[0].workflow_id == "a"
    assert results[0].rank == 1


def test_pilot_fallback_on_no_hits(embedder):
    index = build_index(embedder, [RawDocument("a", "portrait upscaling workflow")])
    outcome = pilot_search(
        PilotQuery("quantum chromodynamics lattice"), index, embedder, sim_threshold=0.3
    )
    assert isinstance(outcome, FallbackSignal)
    assert "quantum" in outcome.clean_query


def test_pilot_empty_query_rejected(embedder):
    index = VectorIndex(256)
    with pytest.raises(EmptyQueryAfterCleaning):
        pilot_search(PilotQuery("the of and !!!"), index, embedder)


def test_pilot_img2img_fixture_query(embedder, corpus_index):
    results = pilot_search(
        PilotQuery("Give me basic workflows used to convert image to image"),
        corpus_index,
        embedder,
        sim_threshold=0.3,
    )
    assert not isinstance(results, FallbackSignal)
    top3 = [r.workflow_id for r in results[:3]]
    assert "wf_img2img_basic" in top3


def test_pipeline_consistency_manual_composition(embedder, corpus_index):
    query = "style transfer for fashion model images"
    outcome = pilot_search(
        PilotQuery(query, k=5), corpus_index, embedder, sim_threshold=0.3, alpha=0.7
    )
    assert not isinstance(outcome, FallbackSignal)

    clean = preprocess_text(query)
    hits = corpus_index.search(embedder.embed(clean.joined), 0.3, 5)
    ranked = [
        RankedResult(r.workflow_id, r.name, r.description, sim, r.likes, score,
                     clean_text=r.clean_text)
        for r, sim, score in rank_results(hits, 0.7)
    ]
    manual = curate(clean.joined, ranked, DefaultCurator())
    assert [(r.workflow_id, r.final_score) for r in outcome] == [
        (r.workflow_id, r.final_score) for r in manual
    ]
