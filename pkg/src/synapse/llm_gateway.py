"""Single point of contact for all LLM calls.

Every language-model interaction (pairwise comparison, mutation, crossover,
explanation) flows through a gateway object with a ``complete`` method. Two
providers are available: a remote chat-completions HTTP service with
retries, timeouts and bounded concurrency, and a deterministic mock whose
output is a pure function of (purpose, prompt, seed). Prompt templates live
as text files under ``prompts/`` and are loaded at import time of first use.

Prompts embed their inputs between markers ``[[CONTEXT]]``, ``[[A]]``,
``[[B]]``, ``[[KEYWORDS]]``, each closed by ``[[END]]``, so the mock can
recover the payloads without any side channel.
"""

from __future__ import annotations

import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable

import requests

from . import textops
from ._http import post_json
from .embedding import stable_hash64, tokenize
from .errors import DataValidationError, ProviderError

PURPOSES = ("compare", "mutate", "crossover", "explain")

LLM_BASE_URL_ENV = "SYNAPSE_LLM_BASE_URL"
LLM_API_KEY_ENV = "SYNAPSE_LLM_API_KEY"
LLM_MODEL_ENV = "SYNAPSE_LLM_MODEL"

LIGHT_TEMPERATURE = 0.3
AGGRESSIVE_TEMPERATURE = 0.9


@dataclass(frozen=True)
class LlmRequest:
    purpose: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if self.purpose not in PURPOSES:
            raise DataValidationError(f"unknown purpose: {self.purpose}")
        if not self.prompt:
            raise DataValidationError("empty prompt")
        if not (0.0 <= self.temperature <= 2.0):
            raise DataValidationError("temperature must be in [0, 2]")
        if self.max_tokens < 1:
            raise DataValidationError("max_tokens must be >= 1")


@dataclass(frozen=True)
class LlmResponse:
    text: str
    latency: float
    provider: str

    def __post_init__(self):
        if self.latency < 0:
            raise DataValidationError("negative latency")


@lru_cache(maxsize=None)
def load_prompt(name: str) -> str:
    return (resources.files("synapse") / "prompts" / f"{name}.txt").read_text("utf-8")


def extract_segment(prompt: str, marker: str) -> str:
    """Text between ``[[marker]]`` and the next ``[[END]]``, trimmed."""
    open_tag = f"[[{marker}]]"
    start = prompt.find(open_tag)
    if start == -1:
        return ""
    start += len(open_tag)
    end = prompt.find("[[END]]", start)
    if end == -1:
        return prompt[start:].strip()
    return prompt[start:end].strip()


def build_compare_prompt(resume_text: str, posting_a: str, posting_b: str) -> str:
    return load_prompt("compare").format(
        resume=resume_text, posting_a=posting_a, posting_b=posting_b
    )


def build_mutate_prompt(resume_text: str, tier: str, keywords: list[str],
                        nonce: int) -> str:
    if tier == "aggressive":
        return load_prompt("mutate_aggressive").format(
            resume=resume_text, keywords=", ".join(keywords), nonce=nonce
        )
    return load_prompt("mutate_light").format(resume=resume_text, nonce=nonce)


def build_resume_compare_prompt(posting_text: str, resume_a: str, resume_b: str) -> str:
    return load_prompt("compare_resumes").format(
        posting=posting_text, resume_a=resume_a, resume_b=resume_b
    )


def build_crossover_prompt(parent_a: str, parent_b: str) -> str:
    return load_prompt("crossover").format(parent_a=parent_a, parent_b=parent_b)


def build_explain_prompt(evidence_lines: list[str]) -> str:
    return load_prompt("explain").format(evidence="\n".join(evidence_lines))


class MockLlm:
    """Deterministic offline provider.

    The reply is a pure function of (purpose, prompt, seed); an internal RNG
    is re-derived from a stable hash of those three for every call, so call
    order and threading never influence any output. Calls are recorded for
    inspection. ``overrides`` maps a purpose to ``fn(prompt, rng) -> text``
    and replaces the built-in rule for that purpose.
    """

    name = "mock"

    def __init__(self, seed: int = 0,
                 overrides: dict[str, Callable[[str, random.Random], str]] | None = None):
        self.seed = seed
        self.overrides = overrides or {}
        self.calls: list[LlmRequest] = []
        self._lock = threading.Lock()

    def reset_calls(self) -> None:
        with self._lock:
            self.calls.clear()

    def call_count(self, purpose: str | None = None) -> int:
        with self._lock:
            if purpose is None:
                return len(self.calls)
            return sum(1 for c in self.calls if c.purpose == purpose)

    def complete(self, request: LlmRequest) -> LlmResponse:
        with self._lock:
            self.calls.append(request)
        rng = random.Random(stable_hash64(f"{request.purpose}|{self.seed}|{request.prompt}"))
        rule = self.overrides.get(request.purpose)
        if rule is not None:
            text = rule(request.prompt, rng)
        elif request.purpose == "compare":
            text = self._compare(request.prompt)
        elif request.purpose == "mutate":
            text = self._mutate(request.prompt, request.temperature, rng)
        elif request.purpose == "crossover":
            text = self._crossover(request.prompt)
        else:
            text = self._explain(request.prompt)
        return LlmResponse(text=text, latency=0.0, provider=self.name)

    def _compare(self, prompt: str) -> str:
        context = set(tokenize(extract_segment(prompt, "CONTEXT")))
        a_text = extract_segment(prompt, "A")
        b_text = extract_segment(prompt, "B")
        overlap_a = len(set(tokenize(a_text)) & context)
        overlap_b = len(set(tokenize(b_text)) & context)
        if overlap_a != overlap_b:
            return "A" if overlap_a > overlap_b else "B"
        # Tie rule is position-independent: the lexicographically smaller
        # posting text wins no matter which slot it occupies.
        return "A" if a_text <= b_text else "B"

    def _mutate(self, prompt: str, temperature: float, rng: random.Random) -> str:
        text = extract_segment(prompt, "A") or prompt.strip()
        if temperature <= 0.5:
            return textops.light_rewrite(text, rng)
        keywords = [k.strip() for k in
                    re.split(r"[,\n]", extract_segment(prompt, "KEYWORDS")) if k.strip()]
        return textops.aggressive_rewrite(text, rng, keywords)

    def _crossover(self, prompt: str) -> str:
        return textops.interleave_merge(extract_segment(prompt, "A"),
                                        extract_segment(prompt, "B"))

    def _explain(self, prompt: str) -> str:
        evidence = extract_segment(prompt, "CONTEXT")
        parts = []
        for line in evidence.splitlines():
            m = re.match(r"\[#(\d+)\]\s*(?:\((\w+)\)\s*)?(.*)", line.strip())
            if not m:
                continue
            pid, source, text = m.group(1), m.group(2) or "document", m.group(3)
            parts.append(f'The {source} states "{text}" [#{pid}].')
        if not parts:
            return "No evidence passages were provided."
        return "This posting matches the candidate. " + " ".join(parts)


class RemoteLlm:
    """Chat-completions HTTP provider with retries and bounded concurrency."""

    name = "remote"

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        timeout: float = 30.0,
        retries: int = 2,
        backoff_base: float = 0.5,
        backoff_factor: float = 2.0,
        max_in_flight: int = 8,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = (base_url or os.environ.get(LLM_BASE_URL_ENV, "")).rstrip("/")
        if not self.base_url:
            raise ProviderError(f"remote LLM needs a base URL ({LLM_BASE_URL_ENV})")
        self.api_key = api_key if api_key is not None else os.environ.get(LLM_API_KEY_ENV, "")
        self.model = model or os.environ.get(LLM_MODEL_ENV, "default")
        self.timeout = timeout
        self.retries = retries
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.session = session or requests.Session()
        self.sleep = sleep
        self._semaphore = threading.BoundedSemaphore(max_in_flight)

    def complete(self, request: LlmRequest) -> LlmResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        start = time.perf_counter()
        with self._semaphore:
            body = post_json(
                self.session,
                f"{self.base_url}/chat/completions",
                payload,
                headers,
                timeout=self.timeout,
                retries=self.retries,
                backoff_base=self.backoff_base,
                backoff_factor=self.backoff_factor,
                sleep=self.sleep,
            )
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed response body: {exc}") from exc
        if not isinstance(text, str):
            raise ProviderError("malformed response body: content is not text")
        return LlmResponse(text=text, latency=time.perf_counter() - start,
                           provider=self.name)


def create_gateway(kind: str, seed: int = 0, **kwargs):
    if kind == "mock":
        return MockLlm(seed=seed)
    if kind == "remote":
        return RemoteLlm(**kwargs)
    raise DataValidationError(f"unknown LLM provider: {kind}")
