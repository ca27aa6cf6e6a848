"""Second-phase scoring of a retrieved candidate set.

Three independent signals each produce a full ranking of the candidates:
cosine similarity in a larger embedding space, token-level soft alignment,
and LLM pairwise comparison aggregated round-robin into Copeland scores.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .corpus import FusedDocument
from .embedding import TokenEmbeddings, cosine
from .errors import DataValidationError
from .llm_gateway import LlmRequest, build_compare_prompt

log = logging.getLogger(__name__)

RANK_METHODS = ("embed2", "soft_align", "llm_pairwise", "phase1", "ensemble")


class RankEntry(NamedTuple):
    posting_id: str
    raw_score: float
    rank: int


@dataclass(frozen=True)
class RankList:
    """Full ranking of one candidate set by one method.

    Entries are ordered by rank 1..n; raw_score is non-increasing along that
    order (ascending-better methods store a negated score to keep this).
    """

    method: str
    entries: tuple[RankEntry, ...]

    def __post_init__(self):
        if self.method not in RANK_METHODS:
            raise DataValidationError(f"unknown rank method: {self.method}")
        if not self.entries:
            raise DataValidationError("empty rank list")
        ids = [e.posting_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DataValidationError("duplicate candidate in rank list")
        for i, entry in enumerate(self.entries):
            if entry.rank != i + 1:
                raise DataValidationError("ranks must be consecutive from 1")
            if i and self.entries[i - 1].raw_score < entry.raw_score - 1e-12:
                raise DataValidationError("raw scores must be non-increasing by rank")

    def ids(self) -> list[str]:
        return [e.posting_id for e in self.entries]

    def rank_of(self, posting_id: str) -> int:
        for entry in self.entries:
            if entry.posting_id == posting_id:
                return entry.rank
        raise DataValidationError(f"candidate not in rank list: {posting_id}")

    def score_of(self, posting_id: str) -> float:
        for entry in self.entries:
            if entry.posting_id == posting_id:
                return entry.raw_score
        raise DataValidationError(f"candidate not in rank list: {posting_id}")


@dataclass(frozen=True)
class PairwiseChoice:
    winner: str  # "A", "B", or "tie"

    def __post_init__(self):
        if self.winner not in ("A", "B", "tie"):
            raise DataValidationError(f"invalid pairwise winner: {self.winner}")


def make_rank_list(method: str, scores: dict[str, float],
                   tie_breaks: dict[str, tuple] | None = None) -> RankList:
    """Order by score descending; ties by the per-id tie_breaks tuple, then id."""
    tie_breaks = tie_breaks or {}
    order = sorted(scores, key=lambda pid: (-scores[pid],) + tie_breaks.get(pid, ()) + (pid,))
    entries = tuple(
        RankEntry(posting_id=pid, raw_score=float(scores[pid]), rank=i + 1)
        for i, pid in enumerate(order)
    )
    return RankList(method=method, entries=entries)


def score_embed2(resume: FusedDocument, candidates: list[FusedDocument],
                 provider2) -> RankList:
    """Cosine similarity in the larger reranking space."""
    if not candidates:
        raise DataValidationError("no candidates to rerank")
    resume_vec = provider2.embed_document(resume.text)
    scores = {}
    for doc in candidates:
        scores[doc.doc_id] = cosine(resume_vec, provider2.embed_document(doc.text))
    return make_rank_list("embed2", scores)


def score_soft_alignment(resume_tokens: TokenEmbeddings,
                         posting_tokens: TokenEmbeddings) -> float:
    """Symmetric mean-of-max token similarity; exactly symmetric in X, Y."""
    if not resume_tokens.tokens or not posting_tokens.tokens:
        raise DataValidationError("empty token set")
    sims = resume_tokens.matrix @ posting_tokens.matrix.T
    return 0.5 * (float(np.mean(sims.max(axis=1))) + float(np.mean(sims.max(axis=0))))


def soft_align_rank(resume: FusedDocument, candidates: list[FusedDocument],
                    provider2) -> RankList:
    if not candidates:
        raise DataValidationError("no candidates to rerank")
    resume_tokens = provider2.embed_tokens(resume.text)
    scores = {}
    for doc in candidates:
        scores[doc.doc_id] = score_soft_alignment(resume_tokens,
                                                  provider2.embed_tokens(doc.text))
    return make_rank_list("soft_align", scores)


def parse_choice(text: str) -> str | None:
    """First standalone A or B token in the reply, or None."""
    for token in text.split():
        stripped = token.strip(".,:;!?\"'()[]*")
        if stripped in ("A", "B"):
            return stripped
    return None


def choose_with_retry(gateway, prompt: str, label: str = "") -> str:
    """Issue a compare request; on unparseable output retry once, then tie."""
    request = LlmRequest(purpose="compare", prompt=prompt, temperature=0.0, max_tokens=8)
    for attempt in range(2):
        choice = parse_choice(gateway.complete(request).text)
        if choice is not None:
            return choice
        if attempt == 0:
            log.warning("unparseable comparison %s; retrying", label)
    log.warning("comparison %s unparseable after retry; recording tie", label)
    return "tie"


def llm_pairwise_compare(resume: FusedDocument, posting_a: FusedDocument,
                         posting_b: FusedDocument, gateway) -> PairwiseChoice:
    """Ask the gateway which posting fits better; unparseable twice -> tie."""
    if posting_a.doc_id == posting_b.doc_id:
        raise DataValidationError("pairwise comparison needs two distinct postings")
    prompt = build_compare_prompt(resume.text, posting_a.text, posting_b.text)
    winner = choose_with_retry(gateway, prompt,
                               label=f"({posting_a.doc_id}, {posting_b.doc_id})")
    return PairwiseChoice(winner=winner)


def llm_rank(resume: FusedDocument, candidates: list[FusedDocument], gateway,
             phase1_similarity: dict[str, float] | None = None) -> RankList:
    """Round-robin pairwise tournament aggregated by Copeland score.

    Exactly n(n-1)/2 comparisons; Copeland = wins + 0.5 * ties. Equal scores
    are broken by Phase-I similarity descending, then ascending id.
    """
    if not candidates:
        raise DataValidationError("no candidates to rerank")
    phase1_similarity = phase1_similarity or {}
    copeland = {doc.doc_id: 0.0 for doc in candidates}
    if len(set(copeland)) != len(candidates):
        raise DataValidationError("duplicate candidate in rank list")
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            a, b = candidates[i], candidates[j]
            choice = llm_pairwise_compare(resume, a, b, gateway)
            if choice.winner == "A":
                copeland[a.doc_id] += 1.0
            elif choice.winner == "B":
                copeland[b.doc_id] += 1.0
            else:
                copeland[a.doc_id] += 0.5
                copeland[b.doc_id] += 0.5
    tie_breaks = {pid: (-phase1_similarity.get(pid, 0.0),) for pid in copeland}
    return make_rank_list("llm_pairwise", copeland, tie_breaks)
