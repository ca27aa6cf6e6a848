"""End-to-end orchestration: retrieval, reranking, fusion, explanation,
evolution targets, evaluation rankers, and the benchmark phase list.

A Pipeline wires providers from a PipelineConfig and caches corpus data,
fused documents, and per-resume stage results so evaluation over many
methods never recomputes a stage. All reports are plain dicts with
deterministic content (no timestamps, no absolute paths) so they can be
compared byte-for-byte across runs.
"""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

from . import vector_index
from .config import PipelineConfig
from .corpus import FusedDocument, JobPosting, Resume, fuse, ingest_postings, ingest_resumes
from .embedding import HashingEmbedder, RemoteEmbedder
from .ensemble import STANDARD_CONFIGS, fuse_rankings
from .errors import DataValidationError, MissingArtifactError
from .evaluation import EvalReport, bench, evaluate_methods, load_judgments
from .evolve import TargetSet, run_evolution
from .explain import generate_explanation, retrieve_evidence
from .llm_gateway import MockLlm, RemoteLlm
from .rerank import RankEntry, RankList, llm_rank, score_embed2, soft_align_rank
from .vector_index import VectorIndex

log = logging.getLogger(__name__)

EVAL_METHOD_ORDER = ["phase1", "embed2", "soft_align", "llm_pairwise",
                     "ensemble:wavg_rank", "ensemble:harm_mean",
                     "ensemble:wavg_minmax", "ensemble:wavg_zscore",
                     "ensemble:wavg_softmax", "ensemble:borda", "ensemble:rrf"]

BENCH_PHASE_NAMES = ["[I] Embed Resume", "[I] Sim. Search", "[II] Embed/Score",
                     "[RAG] Gen. Explanation", "Full Pipeline"]


def build_embedders(config: PipelineConfig):
    if config.embed_provider == "hash":
        return HashingEmbedder(config.dims_phase1), HashingEmbedder(config.dims_phase2)
    return (RemoteEmbedder(model=config.embed_model_phase1),
            RemoteEmbedder(model=config.embed_model_phase2))


def build_gateway(config: PipelineConfig, seed: int):
    if config.llm_provider == "mock":
        return MockLlm(seed=seed)
    return RemoteLlm(model=config.llm_model or None)


class Pipeline:
    def __init__(self, config: PipelineConfig, seed: int = 0):
        self.config = config
        self.seed = seed
        self.embed1, self.embed2 = build_embedders(config)
        self.gateway = build_gateway(config, seed)
        self._postings: dict[str, JobPosting] | None = None
        self._resumes: dict[str, Resume] | None = None
        self._fused: dict[str, FusedDocument] = {}
        self._index: VectorIndex | None = None
        self._stage_cache: dict[tuple[str, str], object] = {}

    # ---- corpus ----------------------------------------------------------

    def postings(self) -> dict[str, JobPosting]:
        if self._postings is None:
            accepted, report = ingest_postings(self.config.corpus_path,
                                               self.config.corpus_format)
            if report.rejected:
                log.warning("ingest rejected %d posting rows", report.rejected_count)
            if not accepted:
                raise DataValidationError(
                    f"no valid postings in {self.config.corpus_path}")
            self._postings = {p.id: p for p in accepted}
        return self._postings

    def resumes(self) -> dict[str, Resume]:
        if self._resumes is None:
            accepted, report = ingest_resumes(self.config.resumes_path,
                                              self.config.resumes_format)
            if report.rejected:
                log.warning("ingest rejected %d resumes", report.rejected_count)
            if not accepted:
                raise DataValidationError(
                    f"no valid resumes in {self.config.resumes_path}")
            self._resumes = {r.id: r for r in accepted}
        return self._resumes

    def fused_posting(self, posting_id: str) -> FusedDocument:
        if posting_id not in self._fused:
            postings = self.postings()
            if posting_id not in postings:
                raise DataValidationError(f"unknown posting id: {posting_id}")
            self._fused[posting_id] = fuse(postings[posting_id])
        return self._fused[posting_id]

    # ---- index -----------------------------------------------------------

    def build_index(self, out_path: str | None = None) -> tuple[VectorIndex, str]:
        path = out_path or self.config.index_path
        postings = self.postings()
        pairs = []
        for pid in sorted(postings):
            pairs.append((pid, self.embed1.embed_document(self.fused_posting(pid).text)))
        index = vector_index.build(pairs, mode=self.config.index_mode,
                                   num_clusters=self.config.index_clusters,
                                   nprobe=self.config.index_nprobe)
        parent = Path(path).parent
        if str(parent) not in ("", "."):
            parent.mkdir(parents=True, exist_ok=True)
        index.save(path)
        self._index = index
        return index, path

    def index(self) -> VectorIndex:
        if self._index is None:
            path = self.config.index_path
            if not Path(path).is_file():
                raise MissingArtifactError(
                    f"index file not found: {path}; build it first with `synapse index`")
            self._index = vector_index.load(path, mode=self.config.index_mode,
                                            num_clusters=self.config.index_clusters,
                                            nprobe=self.config.index_nprobe)
        return self._index

    # ---- stages ----------------------------------------------------------

    def _stage(self, resume: Resume, name: str, compute):
        key = (resume.id, name)
        if key not in self._stage_cache:
            self._stage_cache[key] = compute()
        return self._stage_cache[key]

    def phase1_hits(self, resume: Resume, k: int | None = None):
        k = k or self.config.retrieval_k
        doc = fuse(resume)

        def compute():
            vec = self.embed1.embed_document(doc.text)
            return self.index().search(vec, k)

        return self._stage(resume, f"phase1:{k}", compute)

    def phase1_list(self, resume: Resume, k: int | None = None) -> RankList:
        hits = self.phase1_hits(resume, k)
        entries = tuple(RankEntry(posting_id=h.posting_id, raw_score=h.similarity,
                                  rank=h.rank) for h in hits)
        return RankList(method="phase1", entries=entries)

    def candidates(self, resume: Resume, k: int | None = None) -> list[FusedDocument]:
        return [self.fused_posting(h.posting_id) for h in self.phase1_hits(resume, k)]

    def embed2_list(self, resume: Resume, k: int | None = None) -> RankList:
        k = k or self.config.retrieval_k
        return self._stage(resume, f"embed2:{k}",
                           lambda: score_embed2(fuse(resume), self.candidates(resume, k),
                                                self.embed2))

    def soft_align_list(self, resume: Resume, k: int | None = None) -> RankList:
        k = k or self.config.retrieval_k
        return self._stage(resume, f"soft_align:{k}",
                           lambda: soft_align_rank(fuse(resume),
                                                   self.candidates(resume, k),
                                                   self.embed2))

    def llm_list(self, resume: Resume, k: int | None = None) -> RankList:
        k = k or self.config.retrieval_k

        def compute():
            sims = {h.posting_id: h.similarity for h in self.phase1_hits(resume, k)}
            return llm_rank(fuse(resume), self.candidates(resume, k), self.gateway,
                            phase1_similarity=sims)

        return self._stage(resume, f"llm_pairwise:{k}", compute)

    def fused_list(self, resume: Resume, ensemble_config=None,
                   k: int | None = None) -> RankList:
        cfg = ensemble_config or self.config.ensemble
        lists = [self.embed2_list(resume, k), self.soft_align_list(resume, k),
                 self.llm_list(resume, k)]
        return fuse_rankings(lists, self.phase1_list(resume, k), cfg)

    # ---- recommend -------------------------------------------------------

    def recommend(self, resume: Resume, k: int | None = None) -> dict:
        k = k or self.config.retrieval_k
        phase1 = self.phase1_list(resume, k)
        methods = {
            "embed2": self.embed2_list(resume, k),
            "soft_align": self.soft_align_list(resume, k),
            "llm_pairwise": self.llm_list(resume, k),
        }
        final = fuse_rankings(list(methods.values()), phase1, self.config.ensemble)
        postings = self.postings()
        report = {
            "resume_id": resume.id,
            "k": k,
            "providers": {"embed": self.config.embed_provider,
                          "llm": self.config.llm_provider},
            "phase1": [
                {"posting_id": e.posting_id, "rank": e.rank, "similarity": e.raw_score}
                for e in phase1.entries
            ],
            "phase2": {
                name: [
                    {"posting_id": e.posting_id, "rank": e.rank, "score": e.raw_score}
                    for e in rl.entries
                ]
                for name, rl in methods.items()
            },
            "final": {
                "scheme": self.config.ensemble.scheme,
                "weights": (list(self.config.ensemble.weights)
                            if self.config.ensemble.weights else None),
                "ranking": [
                    {"posting_id": e.posting_id, "rank": e.rank, "score": e.raw_score,
                     "title": postings[e.posting_id].title}
                    for e in final.entries
                ],
            },
        }
        return report

    # ---- explain ---------------------------------------------------------

    def explain(self, resume: Resume, posting_id: str, m: int | None = None):
        evidence = retrieve_evidence(fuse(resume), self.fused_posting(posting_id),
                                     self.embed2, m or self.config.evidence_per_source)
        explanation = generate_explanation(evidence, self.gateway)
        return evidence, explanation

    # ---- evolve ----------------------------------------------------------

    def resolve_targets(self, resume: Resume, spec: str) -> TargetSet:
        """'auto:N' takes the top-N recommendations; otherwise comma ids."""
        postings = self.postings()
        if spec.startswith("auto:"):
            try:
                n = int(spec.split(":", 1)[1])
            except ValueError:
                raise DataValidationError(f"bad target spec: {spec!r}") from None
            if n < 1:
                raise DataValidationError("target count must be >= 1")
            final = self.fused_list(resume)
            ids = [e.posting_id for e in final.entries[:n]]
        else:
            ids = [s.strip() for s in spec.split(",") if s.strip()]
            if not ids:
                raise DataValidationError(f"bad target spec: {spec!r}")
            missing = [pid for pid in ids if pid not in postings]
            if missing:
                raise DataValidationError(f"unknown target posting ids: {missing}")
        return TargetSet(postings=tuple(postings[pid] for pid in ids))

    def evolve_resume(self, resume: Resume, targets: TargetSet,
                      evolution_config=None, weights=None):
        cfg = evolution_config or dataclasses.replace(self.config.evolution,
                                                      seed=self.seed)
        return run_evolution(fuse(resume).text, targets, cfg,
                             weights or self.config.fitness,
                             self.embed1, self.embed2, self.gateway)

    # ---- evaluation ------------------------------------------------------

    def method_ranker(self, method: str):
        resumes = self.resumes()

        def ranking(resume_id: str) -> list[str]:
            if resume_id not in resumes:
                raise DataValidationError(f"unknown resume id: {resume_id}")
            resume = resumes[resume_id]
            if method == "phase1":
                return self.phase1_list(resume).ids()
            if method == "embed2":
                return self.embed2_list(resume).ids()
            if method == "soft_align":
                return self.soft_align_list(resume).ids()
            if method == "llm_pairwise":
                return self.llm_list(resume).ids()
            if method.startswith("ensemble:"):
                scheme = method.split(":", 1)[1]
                if scheme not in STANDARD_CONFIGS:
                    raise DataValidationError(f"unknown ensemble scheme: {scheme}")
                return self.fused_list(resume, STANDARD_CONFIGS[scheme]).ids()
            raise DataValidationError(f"unknown method: {method}")

        return ranking

    def evaluate(self, methods: list[str] | None = None,
                 p_values=(10, 20)) -> EvalReport:
        methods = methods or EVAL_METHOD_ORDER
        judgments = load_judgments(self.config.judgments_path)
        resume_ids = sorted(self.resumes())
        rankers = {m: self.method_ranker(m) for m in methods}
        return evaluate_methods(rankers, resume_ids, judgments, p_values)

    # ---- bench -----------------------------------------------------------

    def bench_phases(self, resume: Resume):
        doc = fuse(resume)
        index = self.index()
        k = self.config.retrieval_k
        vec = self.embed1.embed_document(doc.text)
        hits = index.search(vec, k)
        cands = [self.fused_posting(h.posting_id) for h in hits]
        sims = {h.posting_id: h.similarity for h in hits}
        phase1_entries = tuple(RankEntry(h.posting_id, h.similarity, h.rank)
                               for h in hits)
        phase1 = RankList(method="phase1", entries=phase1_entries)
        top_doc = cands[0]
        m = self.config.evidence_per_source

        def phase2():
            lists = [score_embed2(doc, cands, self.embed2),
                     soft_align_rank(doc, cands, self.embed2),
                     llm_rank(doc, cands, self.gateway, phase1_similarity=sims)]
            fuse_rankings(lists, phase1, self.config.ensemble)

        def rag():
            generate_explanation(retrieve_evidence(doc, top_doc, self.embed2, m),
                                 self.gateway)

        def full():
            q = self.embed1.embed_document(doc.text)
            full_hits = index.search(q, k)
            full_cands = [self.fused_posting(h.posting_id) for h in full_hits]
            full_sims = {h.posting_id: h.similarity for h in full_hits}
            p1 = RankList(method="phase1", entries=tuple(
                RankEntry(h.posting_id, h.similarity, h.rank) for h in full_hits))
            lists = [score_embed2(doc, full_cands, self.embed2),
                     soft_align_rank(doc, full_cands, self.embed2),
                     llm_rank(doc, full_cands, self.gateway, phase1_similarity=full_sims)]
            fused = fuse_rankings(lists, p1, self.config.ensemble)
            best = self.fused_posting(fused.entries[0].posting_id)
            generate_explanation(retrieve_evidence(doc, best, self.embed2, m),
                                 self.gateway)

        return [
            ("[I] Embed Resume", lambda: self.embed1.embed_document(doc.text)),
            ("[I] Sim. Search", lambda: index.search(vec, k)),
            ("[II] Embed/Score", phase2),
            ("[RAG] Gen. Explanation", rag),
            ("Full Pipeline", full),
        ]

    def run_bench(self, resume: Resume, runs: int):
        return bench(self.bench_phases(resume), runs)


def render_recommend_table(report: dict) -> str:
    """Human-readable view of the same report dict the JSON output uses."""
    lines = [f"Recommendations for {report['resume_id']} "
             f"(scheme {report['final']['scheme']}, K={report['k']})"]
    p1_rank = {e["posting_id"]: e["rank"] for e in report["phase1"]}
    p1_sim = {e["posting_id"]: e["similarity"] for e in report["phase1"]}
    headers = ["Rank", "Posting", "Title", "Score", "P1 rank", "P1 sim"]
    rows = []
    for e in report["final"]["ranking"]:
        rows.append([str(e["rank"]), e["posting_id"], e["title"],
                     f"{e['score']:.4f}", str(p1_rank[e["posting_id"]]),
                     f"{p1_sim[e['posting_id']]:.4f}"])
    widths = [max(len(r[i]) for r in [headers] + rows) for i in range(len(headers))]
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
