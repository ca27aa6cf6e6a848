"""Evidence-grounded match explanations.

Evidence passages are sentences selected from the resume and the posting by
cosine similarity against the other document's vector. The generation prompt
contains only those passages; bracketed citations like [#2] in the reply are
parsed and every cited id must exist in the evidence set, otherwise the
response is rejected (one retry, then an error).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .corpus import FusedDocument
from .embedding import cosine, tokenize
from .errors import DataValidationError, GroundingError
from .llm_gateway import LlmRequest, build_explain_prompt
from .textops import split_sentences

log = logging.getLogger(__name__)

DEFAULT_PASSAGES_PER_SOURCE = 3

_CITATION_RE = re.compile(r"\[#(\d+)\]")


@dataclass(frozen=True)
class EvidencePassage:
    source: str  # "resume" or "posting"
    passage_id: int
    text: str
    similarity: float

    def __post_init__(self):
        if self.source not in ("resume", "posting"):
            raise DataValidationError(f"unknown evidence source: {self.source}")
        if not self.text:
            raise DataValidationError("empty evidence passage")


@dataclass(frozen=True)
class EvidenceSet:
    resume_id: str
    posting_id: str
    passages: tuple[EvidencePassage, ...]

    def __post_init__(self):
        if not self.passages:
            raise DataValidationError("empty evidence set")
        sims = [p.similarity for p in self.passages]
        if sims != sorted(sims, reverse=True):
            raise DataValidationError("evidence passages must be sorted by similarity")
        ids = [p.passage_id for p in self.passages]
        if ids != list(range(1, len(ids) + 1)):
            raise DataValidationError("passage ids must be consecutive from 1")

    def passage_ids(self) -> set[int]:
        return {p.passage_id for p in self.passages}


@dataclass(frozen=True)
class Explanation:
    posting_id: str
    text: str
    cited_passage_ids: tuple[int, ...]

    def __post_init__(self):
        if not self.text:
            raise DataValidationError("empty explanation text")

    def to_dict(self) -> dict:
        return {
            "posting_id": self.posting_id,
            "text": self.text,
            "citations": list(self.cited_passage_ids),
        }


def _scored_sentences(text: str, against_vector, provider, source: str,
                      m: int) -> list[tuple[float, str, int, str]]:
    sentences = split_sentences(text)
    if not sentences:
        raise DataValidationError(f"{source} document has zero sentences")
    scored = []
    for position, sentence in enumerate(sentences):
        if not tokenize(sentence):
            continue
        sim = cosine(provider.embed_document(sentence), against_vector)
        scored.append((-sim, source, position, sentence))
    if not scored:
        raise DataValidationError(f"{source} document has zero sentences")
    scored.sort()
    return scored[:m]


def retrieve_evidence(resume: FusedDocument, posting: FusedDocument, provider,
                      m: int = DEFAULT_PASSAGES_PER_SOURCE) -> EvidenceSet:
    """Top-m sentences per source, each scored against the other document."""
    if m < 1:
        raise DataValidationError("m must be >= 1")
    resume_vec = provider.embed_document(resume.text)
    posting_vec = provider.embed_document(posting.text)
    picked = _scored_sentences(resume.text, posting_vec, provider, "resume", m)
    picked += _scored_sentences(posting.text, resume_vec, provider, "posting", m)
    picked.sort()
    passages = tuple(
        EvidencePassage(source=source, passage_id=i + 1, text=sentence,
                        similarity=-neg_sim)
        for i, (neg_sim, source, _position, sentence) in enumerate(picked)
    )
    return EvidenceSet(resume_id=resume.doc_id, posting_id=posting.doc_id,
                       passages=passages)


def generate_explanation(evidence: EvidenceSet, gateway) -> Explanation:
    """Generate a justification citing only the given passages."""
    lines = [f"[#{p.passage_id}] ({p.source}) {p.text}" for p in evidence.passages]
    request = LlmRequest(
        purpose="explain",
        prompt=build_explain_prompt(lines),
        temperature=0.2,
        max_tokens=1024,
    )
    known = evidence.passage_ids()
    last_bad: list[int] = []
    for attempt in range(2):
        text = gateway.complete(request).text
        cited = [int(n) for n in _CITATION_RE.findall(text)]
        bad = sorted(set(cited) - known)
        if not bad:
            deduped = tuple(dict.fromkeys(cited))
            return Explanation(posting_id=evidence.posting_id, text=text,
                               cited_passage_ids=deduped)
        last_bad = bad
        if attempt == 0:
            log.warning("explanation cited unknown passages %s; retrying", bad)
    raise GroundingError(f"ungrounded citation: passage ids {last_bad} do not exist")
