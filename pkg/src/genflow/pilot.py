"""Flow Pilot: query -> clean -> embed -> threshold search -> rank -> curate.

Final score blends similarity with log-scaled popularity:
``alpha * sim + (1 - alpha) * log(1 + likes) / log(1 + max_likes)``.
When nothing clears the similarity threshold a FallbackSignal is returned
so the caller can hand the query to the exploration agents.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import EmptyQueryAfterCleaning
from .index import VectorIndex, WorkflowRecord
from .ingest import preprocess_text

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.7
DEFAULT_SNIPPET_CHARS = 240


@dataclass(frozen=True)
class PilotQuery:
    raw_text: str
    k: int = 5


@dataclass(frozen=True)
class FallbackSignal:
    query: str
    clean_query: str


@dataclass
class RankedResult:
    workflow_id: str
    name: str
    snippet: str
    similarity: float
    likes: int
    final_score: float
    rank: int = 0
    clean_text: str = field(default="", repr=False)

    def to_json(self) -> dict:
        return {
            "workflow_id": self.workflow_id,
            "name": self.name,
            "snippet": self.snippet,
            "similarity": self.similarity,
            "likes": self.likes,
            "final_score": self.final_score,
            "rank": self.rank,
        }


def rank_results(
    hits: list[tuple[WorkflowRecord, float]], alpha: float = DEFAULT_ALPHA
) -> list[tuple[WorkflowRecord, float, float]]:
    """Order hits by blended score; ties by likes desc, then id asc.

    Returns (record, similarity, final_score) tuples, best first.
    """
    if not hits:
        return []
    max_likes = max(record.likes for record, _ in hits)
    scored = []
    for record, sim in hits:
        if max_likes > 0:
            popularity = math.log(1 + record.likes) / math.log(1 + max_likes)
        else:
            popularity = 0.0
        score = alpha * sim + (1.0 - alpha) * popularity
        scored.append((record, sim, score))
    scored.sort(key=lambda t: (-t[2], -t[0].likes, t[0].workflow_id))
    return scored


def truncate_snippet(text: str, limit: int = DEFAULT_SNIPPET_CHARS) -> str:
    """Word-boundary truncation; never ends mid-word."""
    if len(text) <= limit:
        return text
    cut = text[:limit]
    if text[limit] != " " and " " in cut:
        cut = cut[: cut.rindex(" ")]
    return cut.rstrip()


class DefaultCurator:
    """Deterministic curation: token-overlap validation + snippet formatting.

    Order-preserving; drops results whose clean text shares no token with
    the cleaned query.
    """

    def __init__(self, snippet_chars: int = DEFAULT_SNIPPET_CHARS):
        self.snippet_chars = snippet_chars

    def curate(self, clean_query: str, results: list[RankedResult]) -> list[RankedResult]:
        query_tokens = set(clean_query.split())
        kept = []
        for result in results:
            if query_tokens.isdisjoint(result.clean_text.split()):
                continue
            result.snippet = truncate_snippet(result.snippet, self.snippet_chars)
            kept.append(result)
        return kept


def curate(
    clean_query: str, ranked: list[RankedResult], curator=None
) -> list[RankedResult]:
    """Apply the curator, falling back to the default one on failure."""
    if curator is None:
        curator = DefaultCurator()
    try:
        results = curator.curate(clean_query, ranked)
    except Exception:
        logger.exception("curator failed; degrading to default curator")
        results = DefaultCurator().curate(clean_query, ranked)
    for i, result in enumerate(results, start=1):
        result.rank = i
    return results


def pilot_search(
    query: PilotQuery,
    index: VectorIndex,
    embedder,
    sim_threshold: float = 0.30,
    alpha: float = DEFAULT_ALPHA,
    curator=None,
    stopwords_path: str = "",
) -> list[RankedResult] | FallbackSignal:
    clean = preprocess_text(query.raw_text, stopwords_path)
    if not clean.tokens:
        raise EmptyQueryAfterCleaning(query.raw_text)

    vector = embedder.embed(clean.joined)
    hits = index.search(vector, sim_threshold, query.k)
    if not hits:
        return FallbackSignal(query=query.raw_text, clean_query=clean.joined)

    ranked = [
        RankedResult(
            workflow_id=record.workflow_id,
            name=record.name,
            snippet=record.description,
            similarity=sim,
            likes=record.likes,
            final_score=score,
            clean_text=record.clean_text,
        )
        for record, sim, score in rank_results(hits, alpha)
    ]
    return curate(clean.joined, ranked, curator)
