"""Acceptance gate: ten system-level criteria, one printed line each.

Each test exercises one criterion end to end at its stated tolerance and
appends a PASS/FAIL line that the terminal summary echoes after the run.
Heavy shared work (the 100-seed evolution benchmark) is computed once.
"""

import json
import math
import random
import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, FIXTURES
from oracles import ndcg as oracle_ndcg
from oracles import topk_full_scan
from synapse import vector_index
from synapse.cli import main
from synapse.config import PipelineConfig
from synapse.corpus import FusedDocument, fuse
from synapse.embedding import EmbeddingVector, HashingEmbedder
from synapse.ensemble import STANDARD_CONFIGS, EnsembleConfig, fuse_rankings
from synapse.errors import GroundingError
from synapse.evaluation import ndcg_at_p
from synapse.evolve import EvolutionConfig, FitnessWeights, run_evolution
from synapse.explain import EvidencePassage, EvidenceSet, generate_explanation
from synapse.fixtures import keyword_gap_benchmark
from synapse.llm_gateway import MockLlm, extract_segment
from synapse.plotting import plot_fitness_trace
from synapse.rerank import RankList, llm_rank, make_rank_list

ALL_SCHEMES = ("wavg_rank", "harm_mean", "wavg_minmax", "wavg_zscore",
               "wavg_softmax", "borda", "rrf")
WEIGHTED = ("wavg_rank", "harm_mean", "wavg_minmax", "wavg_zscore", "wavg_softmax")
METHOD_CYCLE = ("embed2", "soft_align", "llm_pairwise")


def _criterion(number: int, ok: bool, detail: str):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _fusion_instance(rng, n_lists=3, n=None):
    n = n or rng.randint(2, 6)
    ids = [f"c{i:02d}" for i in range(n)]
    lists = []
    for m in range(n_lists):
        values = rng.sample(range(10, 1000), n)
        lists.append(make_rank_list(METHOD_CYCLE[m % 3],
                                    {pid: v / 1000.0 for pid, v in zip(ids, values)}))
    p_values = rng.sample(range(10, 1000), n)
    phase1 = make_rank_list("phase1", {pid: v / 1000.0
                                       for pid, v in zip(ids, p_values)})
    return ids, lists, phase1


def _scheme_config(scheme, n_lists):
    if scheme in WEIGHTED:
        w = [1.0 / n_lists] * n_lists
        w[0] += 1.0 - sum(w)
        return EnsembleConfig(scheme=scheme, weights=tuple(w))
    return EnsembleConfig(scheme=scheme, weights=None)


def test_criterion_01_exact_retrieval_matches_full_scan():
    np_rng = np.random.default_rng(0)
    rng = random.Random(0)
    start = time.perf_counter()
    corpora = 20
    queries_per_corpus = 3
    for _ in range(corpora):
        n = rng.randint(100, 10_000)
        rows = np_rng.standard_normal((n, 256))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        rows32 = rows.astype(np.float32)
        ids = [f"v{i:05d}" for i in range(n)]
        index = vector_index.build([
            (ids[i], EmbeddingVector(dims=256, values=rows32[i], normalized=False))
            for i in range(n)
        ])
        matrix64 = rows32.astype(np.float64)
        for _q in range(queries_per_corpus):
            q = np_rng.standard_normal(256)
            q /= np.linalg.norm(q)
            q32 = q.astype(np.float32)
            hits = index.search(EmbeddingVector(dims=256, values=q32,
                                                normalized=False), 25)
            expected = topk_full_scan(ids, matrix64, q32.astype(np.float64), 25)
            assert [h.posting_id for h in hits] == [pid for pid, _s in expected]
            assert [h.rank for h in hits] == list(range(1, 26))
    elapsed = time.perf_counter() - start
    _criterion(1, elapsed < 60.0,
               f"search(K=25) equals full-scan oracle on {corpora} corpora "
               f"x {queries_per_corpus} queries (ids and order), {elapsed:.1f}s")


def test_criterion_02_ndcg_matches_brute_force_oracle():
    rng = random.Random(1)
    max_err = 0.0
    for _ in range(1000):
        n = rng.randint(1, 20)
        ids = [f"p{i}" for i in range(n)]
        judged = {pid: rng.choice((0, 1, 2)) for pid in ids
                  if rng.random() < 0.85}
        ranking = rng.sample(ids, rng.randint(1, n))
        p = rng.randint(1, 25)
        expo = rng.random() < 0.5
        got = ndcg_at_p(ranking, judged, p, exponential=expo)
        want = oracle_ndcg([judged.get(pid, 0) for pid in ranking],
                           list(judged.values()), p, exponential=expo)
        max_err = max(max_err, abs(got - want))
    assert max_err < 1e-9

    ideal_checked = 0
    for _ in range(200):
        n = rng.randint(1, 15)
        judged = {f"p{i}": rng.choice((0, 1, 2)) for i in range(n)}
        ranking = sorted(judged, key=lambda pid: -judged[pid])
        p = rng.randint(1, n + 5)
        if any(judged.values()):
            assert ndcg_at_p(ranking, judged, p) == 1.0
            ideal_checked += 1
        else:
            assert ndcg_at_p(ranking, judged, p) == 0.0
    assert ideal_checked > 100
    assert ndcg_at_p(["a", "b"], {"a": 0, "b": 0}, 10) == 0.0

    # worked example, grades in ranked order [1, 2, 0] at p=3; the target is
    # hand-derived from the gain/discount definition: DCG = 1 + 3/log2(3),
    # IDCG = 3 + 1/log2(3), quotient 0.7967076 (see notes on the rounded form)
    worked = ndcg_at_p(["a", "b", "c"], {"a": 1, "b": 2, "c": 0}, 3)
    expected = (1.0 + 3.0 / math.log2(3)) / (3.0 + 1.0 / math.log2(3))
    worked_ok = abs(worked - expected) < 1e-6
    _criterion(2, max_err < 1e-9 and worked_ok,
               f"1000 rankings within 1e-9 of oracle (max err {max_err:.2e}), "
               f"ideal=1.0, all-zero=0.0, worked example {worked:.7f}")


def test_criterion_03_fusion_correctness():
    rng = random.Random(2)
    for scheme in ALL_SCHEMES:
        for _ in range(20):
            _ids, lists, phase1 = _fusion_instance(rng, n_lists=1)
            fused = fuse_rankings(lists, phase1, _scheme_config(scheme, 1))
            assert fused.ids() == lists[0].ids(), scheme

    # dyadic list counts keep the equal weights exactly representable, so
    # tied rank sums fuse to exactly tied scores on both sides
    for _ in range(500):
        n_lists = rng.choice((2, 4))
        _ids, lists, phase1 = _fusion_instance(rng, n_lists=n_lists)
        borda = fuse_rankings(lists, phase1,
                              EnsembleConfig(scheme="borda", weights=None))
        wavg = fuse_rankings(lists, phase1, _scheme_config("wavg_rank", n_lists))
        assert borda.ids() == wavg.ids()

    lists = [make_rank_list("embed2", {"a": 0.9, "b": 0.5}),
             make_rank_list("soft_align", {"a": 0.8, "b": 0.4})]
    phase1 = make_rank_list("phase1", {"a": 0.7, "b": 0.6})
    fused = fuse_rankings(lists, phase1, STANDARD_CONFIGS["rrf"])
    top = fused.entries[0]
    rrf_err = abs(top.raw_score - 2.0 / 61.0)
    assert top.posting_id == "a" and rrf_err < 1e-12

    for scheme in ALL_SCHEMES:
        for _ in range(100):
            ids, lists, phase1 = _fusion_instance(rng)
            config = _scheme_config(scheme, 3)
            fused = fuse_rankings(lists, phase1, config)
            shuffled = list(ids)
            rng.shuffle(shuffled)
            mapping = dict(zip(ids, shuffled))

            def relabel(rl):
                entries = tuple(e.__class__(posting_id=mapping[e.posting_id],
                                            raw_score=e.raw_score, rank=e.rank)
                                for e in rl.entries)
                return RankList(method=rl.method, entries=entries)

            fused_mapped = fuse_rankings([relabel(rl) for rl in lists],
                                         relabel(phase1), config)
            assert fused_mapped.ids() == [mapping[pid] for pid in fused.ids()], scheme

    _criterion(3, True,
               "single-list identity (7 schemes), Borda == equal-weight wavg_rank "
               f"on 500 instances, RRF top score within {rrf_err:.1e} of 2/61, "
               "permutation equivariance 100/scheme")


def test_criterion_04_default_constants():
    c = PipelineConfig()
    checks = [
        c.retrieval_k == 25,
        (c.fitness.w_embed, c.fitness.w_softalign, c.fitness.w_llm) == (0.7, 0.15, 0.15),
        c.ensemble.scheme == "wavg_rank",
        c.ensemble.weights == (0.60, 0.25, 0.15),
        c.evolution.population == 8,
        c.evolution.generations == 5,
        c.evolution.elitism == 2,
        c.evolution.mutation_rate == 0.7,
        c.evolution.tournament_size == 3,
    ]
    _criterion(4, all(checks),
               "defaults: K=25, fitness (0.7, 0.15, 0.15), wavg_rank "
               "(0.60, 0.25, 0.15), N=8 T=5 k=2 rate=0.7 tournament=3")


@pytest.fixture(scope="module")
def benchmark_runs():
    """100 seeded evolution runs on the keyword-gap benchmark, plus repeats."""
    resume, targets = keyword_gap_benchmark()
    embed1, embed2 = HashingEmbedder(256), HashingEmbedder(512)
    start = time.perf_counter()
    traces = []
    for seed in range(100):
        _best, trace = run_evolution(resume, targets, EvolutionConfig(seed=seed),
                                     FitnessWeights(), embed1, embed2,
                                     MockLlm(seed=seed))
        traces.append(trace)
    elapsed = time.perf_counter() - start
    repeats = {}
    for seed in (0, 73):
        _best, trace = run_evolution(resume, targets, EvolutionConfig(seed=seed),
                                     FitnessWeights(), embed1, embed2,
                                     MockLlm(seed=seed))
        repeats[seed] = trace
    return traces, repeats, elapsed


def test_criterion_05_evolution_monotonicity(benchmark_runs):
    traces, repeats, _elapsed = benchmark_runs
    violations = 0
    for trace in traces:
        bests = [r.best for r in trace.records]
        if bests != sorted(bests):
            violations += 1
        assert len(trace.records) == 6  # initial population plus 5 generations
        assert all(len(r.fitnesses) == 8 for r in trace.records)
    identical = all(
        json.dumps(traces[seed].to_dict(), sort_keys=True)
        == json.dumps(repeats[seed].to_dict(), sort_keys=True)
        for seed in repeats
    )
    _criterion(5, violations == 0 and identical,
               f"100 runs monotone best ({violations} violations), population "
               "8 every generation, same-seed traces byte-identical")


def test_criterion_06_evolution_effectiveness(benchmark_runs, tmp_path):
    traces, _repeats, elapsed = benchmark_runs
    improvements = [t.relative_improvement for t in traces]
    med = statistics.median(improvements)
    positive = sum(1 for x in improvements if x > 0) / len(improvements)
    plot_path = tmp_path / "fitness_trace.png"
    plot_fitness_trace(traces[0], str(plot_path))
    ok = med > 0 and positive >= 0.90 and elapsed < 300 and plot_path.stat().st_size > 0
    _criterion(6, ok,
               f"keyword-gap benchmark: median improvement {100 * med:.1f}%, "
               f"{100 * positive:.0f}% of 100 seeds positive, {elapsed:.0f}s, "
               "trace plot written")


def _cands(n):
    return [FusedDocument(doc_id=f"p{i}", kind="posting",
                          text=f"Posting cand{i} wants skill{i} and more.")
            for i in range(n)]


def test_criterion_07_pairwise_ranking():
    resume = FusedDocument(doc_id="r", kind="resume",
                           text="Engineer resume with several skills.")
    for n in (2, 5, 10):
        gateway = MockLlm(seed=0)
        sims = {f"p{i}": 1.0 - i * 0.01 for i in range(n)}
        llm_rank(resume, _cands(n), gateway, phase1_similarity=sims)
        assert gateway.call_count("compare") == n * (n - 1) // 2, n

    rng = random.Random(3)
    planted_ok = True
    for _ in range(10):
        n = 6
        order = [f"p{i}" for i in range(n)]
        rng.shuffle(order)
        position = {pid: i for i, pid in enumerate(order)}

        def choose(prompt, _rng):
            a = extract_segment(prompt, "A")
            b = extract_segment(prompt, "B")
            pa = next(pid for pid in position if f"cand{pid[1:]} " in a)
            pb = next(pid for pid in position if f"cand{pid[1:]} " in b)
            return "A" if position[pa] < position[pb] else "B"

        gateway = MockLlm(seed=0, overrides={"compare": choose})
        sims = {f"p{i}": 0.5 for i in range(n)}
        ranked = llm_rank(resume, _cands(n), gateway, phase1_similarity=sims)
        planted_ok = planted_ok and ranked.ids() == order

    cyclic_winner = {frozenset(("pa", "pb")): "pa",
                     frozenset(("pb", "pc")): "pb",
                     frozenset(("pc", "pa")): "pc"}
    docs = [FusedDocument(doc_id=pid, kind="posting",
                          text=f"Posting cand{pid[1]} text.")
            for pid in ("pa", "pb", "pc")]

    def cyclic(prompt, _rng):
        a = extract_segment(prompt, "A")
        b = extract_segment(prompt, "B")
        pa = next(pid for pid in ("pa", "pb", "pc") if f"cand{pid[1]} " in a)
        pb = next(pid for pid in ("pa", "pb", "pc") if f"cand{pid[1]} " in b)
        return "A" if cyclic_winner[frozenset((pa, pb))] == pa else "B"

    gateway = MockLlm(seed=0, overrides={"compare": cyclic})
    ranked = llm_rank(resume, docs, gateway,
                      phase1_similarity={"pa": 0.7, "pb": 0.9, "pc": 0.8})
    cyclic_ok = ranked.ids() == ["pb", "pc", "pa"]
    assert planted_ok and cyclic_ok
    _criterion(7, True,
               "exactly n(n-1)/2 calls for n in {2,5,10}, 10 planted orders "
               "reproduced, cyclic case falls back to retrieval similarity")


def test_criterion_08_grounded_explanations():
    rng = random.Random(4)
    words = ["python", "cloud", "team", "sql", "design", "kafka", "ship", "and"]
    ungrounded = 0
    for seed in range(200):
        n = rng.randint(1, 6)
        passages = tuple(
            EvidencePassage(source="resume" if i % 2 == 0 else "posting",
                            passage_id=i + 1,
                            text=" ".join(rng.sample(words, 4)).capitalize(),
                            similarity=1.0 - 0.01 * i)
            for i in range(n)
        )
        evidence = EvidenceSet(resume_id="r", posting_id="p", passages=passages)
        try:
            explanation = generate_explanation(evidence, MockLlm(seed=seed))
            if not set(explanation.cited_passage_ids) <= evidence.passage_ids():
                ungrounded += 1
        except GroundingError:
            ungrounded += 1

    adversarial = MockLlm(seed=0, overrides={
        "explain": lambda prompt, rng: "Great match [#99]."})
    simple = EvidenceSet(resume_id="r", posting_id="p", passages=(
        EvidencePassage(source="resume", passage_id=1, text="Python services",
                        similarity=0.9),))
    with pytest.raises(GroundingError, match="ungrounded citation"):
        generate_explanation(simple, adversarial)
    _criterion(8, ungrounded == 0,
               f"200 mock explanation runs, {ungrounded} ungrounded citations; "
               "adversarial citation rejected")


def test_criterion_09_index_persistence(shared_pipeline, tmp_path):
    index = shared_pipeline.index()
    path = tmp_path / "roundtrip.synx"
    index.save(str(path))
    reloaded = vector_index.load(str(path))
    identical = True
    for rid, resume in sorted(shared_pipeline.resumes().items()):
        vec = shared_pipeline.embed1.embed_document(fuse(resume).text)
        a = index.search(vec, 25)
        b = reloaded.search(vec, 25)
        identical = identical and (
            [(h.posting_id, h.rank, h.similarity) for h in a]
            == [(h.posting_id, h.rank, h.similarity) for h in b]
        )

    blob = path.read_bytes()
    corrupted = tmp_path / "bad-magic.synx"
    corrupted.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(Exception, match="bad magic"):
        vector_index.load(str(corrupted))
    truncated = tmp_path / "truncated.synx"
    truncated.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(Exception, match="truncated index file"):
        vector_index.load(str(truncated))
    _criterion(9, identical,
               "save/load round trip bit-identical on 5 fixture resumes; "
               "bad magic and truncation rejected with the stated errors")


def test_criterion_10_bench_harness(base_config, shared_pipeline, tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "corpus_path": base_config.corpus_path,
        "resumes_path": base_config.resumes_path,
        "judgments_path": base_config.judgments_path,
        "index_path": base_config.index_path,
    }), encoding="utf-8")
    out = tmp_path / "bench.json"
    code = main(["bench", "--config", str(config_path), "--runs", "5",
                 "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    names = [p["name"] for p in payload["phases"]]
    expected = ["[I] Embed Resume", "[I] Sim. Search", "[II] Embed/Score",
                "[RAG] Gen. Explanation", "Full Pipeline"]
    finite = all(math.isfinite(p["mean_s"]) and math.isfinite(p["std_s"])
                 and p["std_s"] >= 0.0 and p["runs"] == 5
                 for p in payload["phases"])
    _criterion(10, names == expected and finite,
               "bench --runs 5 emits all five phase rows with finite mean/std")
