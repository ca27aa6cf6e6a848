"""Deterministic text augmentation operators.

These are the local mutation primitives (token masking, sentence shuffling,
sentence dropout, span deletion, synonym substitution, keyword injection)
used both by the mock LLM provider and as offline fallbacks when a remote
provider fails. All randomness comes from an injected ``random.Random``.
"""

from __future__ import annotations

import random
import re

MASK_SYMBOL = "▁"

_SENTENCE_SPLIT_RE = re.compile(r"[.!?\n]+")

SYNONYM_TABLE = {
    "experienced": "seasoned",
    "skilled": "proficient",
    "developed": "built",
    "managed": "led",
    "created": "designed",
    "improved": "enhanced",
    "maintained": "supported",
    "strong": "solid",
    "knowledge": "expertise",
    "team": "group",
    "project": "initiative",
    "responsible": "accountable",
    "fast": "rapid",
    "large": "sizable",
    "worked": "collaborated",
}

_SYNONYM_RE = re.compile(
    r"\b(" + "|".join(sorted(SYNONYM_TABLE, key=len, reverse=True)) + r")\b",
    re.IGNORECASE,
)


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!', '?' and newlines; trim; drop empties."""
    return [s.strip() for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]


def join_sentences(sentences: list[str]) -> str:
    return ". ".join(sentences) + "." if sentences else ""


def mask_tokens(text: str, rng: random.Random, fraction: float = 0.1) -> str:
    """Replace a random ``fraction`` of whitespace tokens (at least one)."""
    tokens = text.split()
    if not tokens:
        return text
    count = max(1, round(fraction * len(tokens)))
    count = min(count, len(tokens))
    for i in sorted(rng.sample(range(len(tokens)), count)):
        tokens[i] = MASK_SYMBOL
    return " ".join(tokens)


def shuffle_sentences(text: str, rng: random.Random) -> str:
    sentences = split_sentences(text)
    if not sentences:
        return text
    rng.shuffle(sentences)
    return join_sentences(sentences)


def drop_sentence(text: str, rng: random.Random) -> str:
    """Remove one random sentence, never the last remaining one."""
    sentences = split_sentences(text)
    if len(sentences) <= 1:
        return join_sentences(sentences) if sentences else text
    del sentences[rng.randrange(len(sentences))]
    return join_sentences(sentences)


def delete_span(text: str, rng: random.Random, low: float = 0.10, high: float = 0.20) -> str:
    """Delete a contiguous span covering ``low``..``high`` of the tokens."""
    tokens = text.split()
    if len(tokens) <= 1:
        return text
    span = max(1, round(rng.uniform(low, high) * len(tokens)))
    span = min(span, len(tokens) - 1)
    start = rng.randrange(len(tokens) - span + 1)
    return " ".join(tokens[:start] + tokens[start + span:])


def synonym_substitute(text: str) -> str:
    """One-pass substitution from a fixed table, preserving capitalization."""

    def repl(match: re.Match) -> str:
        word = match.group(0)
        replacement = SYNONYM_TABLE[word.lower()]
        if word[0].isupper():
            return replacement[0].upper() + replacement[1:]
        return replacement

    return _SYNONYM_RE.sub(repl, text)


def interleave_merge(text_a: str, text_b: str) -> str:
    """Interleave the sentences of both texts, keeping first occurrences only."""
    a = split_sentences(text_a)
    b = split_sentences(text_b)
    merged: list[str] = []
    seen: set[str] = set()
    for i in range(max(len(a), len(b))):
        for side in (a, b):
            if i < len(side) and side[i] not in seen:
                seen.add(side[i])
                merged.append(side[i])
    return join_sentences(merged)


def light_rewrite(text: str, rng: random.Random) -> str:
    """Synonym substitution plus light token masking."""
    return mask_tokens(synonym_substitute(text), rng, fraction=0.1)


def aggressive_rewrite(text: str, rng: random.Random, keywords: list[str]) -> str:
    """Span deletion plus injection of up to five absent keywords."""
    return inject_keywords(delete_span(text, rng), keywords, limit=5)


def inject_keywords(text: str, keywords: list[str], limit: int = 5) -> str:
    """Append up to ``limit`` keywords not already present, as a Skills line."""
    present = set(re.findall(r"[0-9a-z]+", text.lower()))
    missing = []
    for kw in keywords:
        kw = kw.strip()
        if not kw:
            continue
        parts = re.findall(r"[0-9a-z]+", kw.lower())
        if parts and not all(p in present for p in parts):
            missing.append(kw)
        if len(missing) == limit:
            break
    if not missing:
        return text
    return text + "\nSkills: " + ", ".join(missing) + "."
