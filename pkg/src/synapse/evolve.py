"""Evolutionary resume optimization against a set of target postings.

A population of resume variants is evolved with adaptive mutation, semantic
crossover, tournament selection and elitism. Fitness is a weighted sum of
three normalized signals: retrieval-space embedding similarity, token soft
alignment, and LLM pairwise wins against the fixed original resume. Keeping
the original as the comparison baseline makes fitness stationary, so the
best score per generation can never decrease once elites are preserved.

Every random draw comes from a stream derived from (seed, generation, slot),
so concurrent fitness evaluation cannot perturb reproducibility.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import NamedTuple

from . import textops
from .corpus import JobPosting, fuse
from .embedding import cosine, stable_hash64
from .errors import DataValidationError, EvolutionError, ProviderError
from .llm_gateway import (
    AGGRESSIVE_TEMPERATURE,
    LIGHT_TEMPERATURE,
    LlmRequest,
    build_crossover_prompt,
    build_mutate_prompt,
    build_resume_compare_prompt,
)
from .rerank import choose_with_retry, score_soft_alignment

log = logging.getLogger(__name__)

LINEAGES = ("base", "mutant", "child")


@dataclass(frozen=True)
class FitnessWeights:
    """Weights over (embedding, soft-alignment, LLM) fitness components."""

    w_embed: float = 0.7
    w_softalign: float = 0.15
    w_llm: float = 0.15

    def __post_init__(self):
        for w in (self.w_embed, self.w_softalign, self.w_llm):
            if w < 0:
                raise DataValidationError("fitness weights must be non-negative")
        total = self.w_embed + self.w_softalign + self.w_llm
        if abs(total - 1.0) > 1e-9:
            raise DataValidationError(f"fitness weights must sum to 1, got {total}")


@dataclass(frozen=True)
class EvolutionConfig:
    population: int = 8
    generations: int = 5
    elitism: int = 2
    mutation_rate: float = 0.7
    tournament_size: int = 3
    aggressive_prob_start: float = 0.2
    aggressive_prob_end: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.population < 1:
            raise DataValidationError("population must be >= 1")
        if self.generations < 0:
            raise DataValidationError("generations must be >= 0")
        if not (1 <= self.elitism < self.population):
            raise DataValidationError("elitism must satisfy 1 <= k < population")
        if not (1 <= self.tournament_size <= self.population):
            raise DataValidationError("tournament_size must be in 1..population")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise DataValidationError("mutation_rate must be in [0, 1]")
        for p in (self.aggressive_prob_start, self.aggressive_prob_end):
            if not (0.0 <= p <= 1.0):
                raise DataValidationError("aggressive probabilities must be in [0, 1]")


@dataclass
class Individual:
    ident: str
    resume_text: str
    lineage: str
    parents: tuple[str, ...]
    generation_born: int
    slot: int
    fitness: float | None = None

    def __post_init__(self):
        if not self.resume_text.strip():
            raise DataValidationError("empty resume text")
        if self.lineage not in LINEAGES:
            raise DataValidationError(f"unknown lineage: {self.lineage}")


@dataclass(frozen=True)
class TargetSet:
    postings: tuple[JobPosting, ...]

    def __post_init__(self):
        if not self.postings:
            raise DataValidationError("target set is empty")
        ids = [p.id for p in self.postings]
        if len(set(ids)) != len(ids):
            raise DataValidationError("duplicate posting id in target set")

    def keywords(self) -> list[str]:
        """Target skills across all postings, first occurrence order."""
        out: list[str] = []
        seen: set[str] = set()
        for posting in self.postings:
            for skill in posting.skills:
                key = skill.strip().lower()
                if key and key not in seen:
                    seen.add(key)
                    out.append(skill.strip())
        return out


class GenerationRecord(NamedTuple):
    gen: int
    best: float
    mean: float
    fitnesses: tuple[float, ...]


@dataclass(frozen=True)
class FitnessTrace:
    records: tuple[GenerationRecord, ...]
    relative_improvement: float

    def __post_init__(self):
        if not self.records:
            raise DataValidationError("empty fitness trace")
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.best < prev.best:
                raise DataValidationError(
                    f"best fitness decreased from gen {prev.gen} to {cur.gen}"
                )

    def to_dict(self) -> dict:
        return {
            "generations": [
                {"gen": r.gen, "best": r.best, "mean": r.mean,
                 "fitnesses": list(r.fitnesses)}
                for r in self.records
            ],
            "relative_improvement": self.relative_improvement,
        }


def rng_for(seed: int, generation: int, slot: int) -> random.Random:
    """Independent, platform-stable random stream per individual slot."""
    return random.Random(stable_hash64(f"{seed}|{generation}|{slot}"))


def aggressive_prob(generation: int, config: EvolutionConfig) -> float:
    """Linear ramp from start to end across the configured generations."""
    if config.generations <= 1:
        return config.aggressive_prob_end
    frac = generation / (config.generations - 1)
    return (config.aggressive_prob_start
            + (config.aggressive_prob_end - config.aggressive_prob_start) * frac)


class FitnessEvaluator:
    """Computes and caches fitness; identical texts are never re-evaluated."""

    def __init__(self, base_resume_text: str, targets: TargetSet,
                 weights: FitnessWeights, embedder1, embedder2, gateway):
        if not base_resume_text.strip():
            raise DataValidationError("empty resume text")
        self.base_text = base_resume_text
        self.weights = weights
        self.embedder1 = embedder1
        self.embedder2 = embedder2
        self.gateway = gateway
        self._posting_texts = [fuse(p).text for p in targets.postings]
        self._posting_vecs = [embedder1.embed_document(t) for t in self._posting_texts]
        self._posting_tokens = [embedder2.embed_tokens(t) for t in self._posting_texts]
        self._cache: dict[str, float] = {}

    def evaluate(self, resume_text: str) -> float:
        if resume_text in self._cache:
            return self._cache[resume_text]
        resume_vec = self.embedder1.embed_document(resume_text)
        e_bar = sum((cosine(resume_vec, pv) + 1.0) / 2.0
                    for pv in self._posting_vecs) / len(self._posting_vecs)
        resume_tokens = self.embedder2.embed_tokens(resume_text)
        s_bar = sum((score_soft_alignment(resume_tokens, pt) + 1.0) / 2.0
                    for pt in self._posting_tokens) / len(self._posting_tokens)
        p_bar = self._llm_component(resume_text)
        fitness = (self.weights.w_embed * e_bar
                   + self.weights.w_softalign * s_bar
                   + self.weights.w_llm * p_bar)
        self._cache[resume_text] = fitness
        return fitness

    def _llm_component(self, resume_text: str) -> float:
        # Comparing the base resume against itself is a tie by definition;
        # no gateway calls are spent on it.
        if resume_text == self.base_text:
            return 0.5
        total = 0.0
        for posting_text in self._posting_texts:
            prompt = build_resume_compare_prompt(posting_text, resume_text, self.base_text)
            winner = choose_with_retry(self.gateway, prompt, label="(candidate, base)")
            total += 1.0 if winner == "A" else 0.0 if winner == "B" else 0.5
        return total / len(self._posting_texts)


def mutate(resume_text: str, generation: int, config: EvolutionConfig, gateway,
           rng: random.Random, keywords: list[str] | None = None) -> str:
    """One mutation: aggressive with the scheduled probability, else a coin
    flip between a light LLM rephrase and a local medium operator."""
    keywords = keywords or []
    if rng.random() < aggressive_prob(generation, config):
        tier = "aggressive"
    elif rng.random() < 0.5:
        tier = "light"
    else:
        tier = "medium"

    if tier == "medium":
        if rng.random() < 0.5:
            out = textops.shuffle_sentences(resume_text, rng)
        else:
            out = textops.drop_sentence(resume_text, rng)
        return out if out.strip() else resume_text

    nonce = rng.getrandbits(32)
    temperature = LIGHT_TEMPERATURE if tier == "light" else AGGRESSIVE_TEMPERATURE
    request = LlmRequest(
        purpose="mutate",
        prompt=build_mutate_prompt(resume_text, tier, keywords, nonce),
        temperature=temperature,
        max_tokens=2048,
    )
    try:
        out = gateway.complete(request).text
    except ProviderError as exc:
        log.warning("mutate gateway failure (%s); falling back to local %s operator",
                    exc, tier)
        out = ""
    if not out.strip():
        out = (textops.light_rewrite(resume_text, rng) if tier == "light"
               else textops.aggressive_rewrite(resume_text, rng, keywords))
    return out


def crossover(parent_a: str, parent_b: str, gateway) -> str:
    """Semantic merge of two parents; falls back to a local sentence merge."""
    if not parent_a.strip() or not parent_b.strip():
        raise DataValidationError("crossover parents must be non-empty")
    request = LlmRequest(
        purpose="crossover",
        prompt=build_crossover_prompt(parent_a, parent_b),
        temperature=0.7,
        max_tokens=2048,
    )
    try:
        out = gateway.complete(request).text
    except ProviderError as exc:
        log.warning("crossover gateway failure (%s); falling back to local merge", exc)
        out = ""
    if not out.strip():
        out = textops.interleave_merge(parent_a, parent_b)
    return out


def _selection_key(ind: Individual):
    return (-ind.fitness, ind.generation_born, ind.slot)


def _tournament(population: list[Individual], config: EvolutionConfig,
                rng: random.Random) -> Individual:
    picks = [population[rng.randrange(len(population))]
             for _ in range(config.tournament_size)]
    return min(picks, key=_selection_key)


def select_next_generation(population: list[Individual], config: EvolutionConfig,
                           generation: int, gateway,
                           keywords: list[str] | None = None) -> list[Individual]:
    """Elites survive unchanged; remaining slots are tournament offspring."""
    if len(population) != config.population:
        raise DataValidationError("population size does not match config")
    if any(ind.fitness is None for ind in population):
        raise DataValidationError("selection requires fully evaluated population")
    elites = sorted(population, key=_selection_key)[:config.elitism]
    next_population = list(elites)
    for slot in range(config.elitism, config.population):
        rng = rng_for(config.seed, generation, slot)
        parent = _tournament(population, config, rng)
        if rng.random() < config.mutation_rate:
            text = mutate(parent.resume_text, generation - 1, config, gateway,
                          rng, keywords)
            child = Individual(
                ident=f"g{generation}s{slot}", resume_text=text, lineage="mutant",
                parents=(parent.ident,), generation_born=generation, slot=slot,
            )
        else:
            mate = _tournament(population, config, rng)
            text = crossover(parent.resume_text, mate.resume_text, gateway)
            child = Individual(
                ident=f"g{generation}s{slot}", resume_text=text, lineage="child",
                parents=(parent.ident, mate.ident), generation_born=generation,
                slot=slot,
            )
        next_population.append(child)
    return next_population


def _record(gen: int, population: list[Individual]) -> GenerationRecord:
    fitnesses = tuple(ind.fitness for ind in population)
    return GenerationRecord(gen=gen, best=max(fitnesses),
                            mean=sum(fitnesses) / len(fitnesses),
                            fitnesses=fitnesses)


def _build_trace(records: list[GenerationRecord]) -> FitnessTrace:
    best_initial = records[0].best
    best_final = records[-1].best
    improvement = ((best_final - best_initial) / best_initial
                   if best_initial > 0 else 0.0)
    return FitnessTrace(records=tuple(records), relative_improvement=improvement)


def run_evolution(base_resume: str, targets: TargetSet, config: EvolutionConfig,
                  weights: FitnessWeights, embedder1, embedder2,
                  gateway) -> tuple[Individual, FitnessTrace]:
    """Full evolution loop; returns the best individual and the trace."""
    evaluator = FitnessEvaluator(base_resume, targets, weights,
                                 embedder1, embedder2, gateway)
    keywords = targets.keywords()

    population = [Individual(ident="g0s0", resume_text=base_resume, lineage="base",
                             parents=(), generation_born=0, slot=0)]
    records: list[GenerationRecord] = []
    try:
        for slot in range(1, config.population):
            rng = rng_for(config.seed, 0, slot)
            text = mutate(base_resume, 0, config, gateway, rng, keywords)
            population.append(Individual(
                ident=f"g0s{slot}", resume_text=text, lineage="mutant",
                parents=("g0s0",), generation_born=0, slot=slot,
            ))
        for ind in population:
            ind.fitness = evaluator.evaluate(ind.resume_text)
        records.append(_record(0, population))
        for gen in range(1, config.generations + 1):
            population = select_next_generation(population, config, gen,
                                                gateway, keywords)
            for ind in population:
                ind.fitness = evaluator.evaluate(ind.resume_text)
            records.append(_record(gen, population))
    except ProviderError as exc:
        partial = _build_trace(records) if records else None
        raise EvolutionError(f"provider failure during evolution: {exc}",
                             partial_trace=partial) from exc
    best = min(population, key=_selection_key)
    return best, _build_trace(records)
