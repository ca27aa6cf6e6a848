"""Graded-relevance ranking evaluation and phase latency benchmarking.

nDCG@p uses exponential gain (2^grade - 1) by default, with linear gain
behind a flag. The ideal DCG is computed over ALL judged postings for the
resume (not only retrieved ones), so a ranking that misses relevant items
is penalized. Unjudged postings count as grade 0; IDCG of 0 defines nDCG 0.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .errors import DataValidationError, MissingArtifactError, SynapseError

VALID_GRADES = (0, 1, 2)
JUDGMENTS_CSV_HEADER = ["resume_id", "posting_id", "grade"]


@dataclass(frozen=True)
class RelevanceJudgment:
    resume_id: str
    posting_id: str
    grade: int

    def __post_init__(self):
        if self.grade not in VALID_GRADES:
            raise DataValidationError(f"grade must be one of {VALID_GRADES}, got {self.grade}")
        if not self.resume_id or not self.posting_id:
            raise DataValidationError("judgment ids must be non-empty")


def load_judgments(path: str | Path) -> list[RelevanceJudgment]:
    """Read a resume_id,posting_id,grade CSV with exact header."""
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"judgments file not found: {path}")
    judgments: list[RelevanceJudgment] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != JUDGMENTS_CSV_HEADER:
            raise DataValidationError(f"malformed header: expected {JUDGMENTS_CSV_HEADER}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataValidationError(f"line {line_no}: expected 3 columns")
            try:
                grade = int(row[2])
            except ValueError:
                raise DataValidationError(f"line {line_no}: grade is not an integer")
            key = (row[0], row[1])
            if key in seen:
                raise DataValidationError(f"line {line_no}: duplicate judgment for {key}")
            seen.add(key)
            judgments.append(RelevanceJudgment(resume_id=row[0], posting_id=row[1],
                                               grade=grade))
    return judgments


def judgments_for(judgments: Sequence[RelevanceJudgment],
                  resume_id: str) -> dict[str, int]:
    return {j.posting_id: j.grade for j in judgments if j.resume_id == resume_id}


def _dcg(grades: Sequence[int], p: int, exponential: bool) -> float:
    total = 0.0
    for i, grade in enumerate(grades[:p], start=1):
        gain = (2.0 ** grade - 1.0) if exponential else float(grade)
        total += gain / math.log2(i + 1)
    return total


def ndcg_at_p(ranking: Sequence[str], judged: dict[str, int], p: int,
              exponential: bool = True) -> float:
    """nDCG of a ranked id list against per-posting grades."""
    if not ranking:
        raise DataValidationError("empty ranking")
    if p < 1:
        raise DataValidationError("p must be >= 1")
    gains = [judged.get(pid, 0) for pid in ranking]
    ideal = sorted(judged.values(), reverse=True)
    idcg = _dcg(ideal, p, exponential)
    if idcg == 0.0:
        return 0.0
    return _dcg(gains, p, exponential) / idcg


@dataclass(frozen=True)
class MethodResult:
    """One row of the evaluation table."""

    method: str
    ndcg: dict[int, float]  # p -> mean nDCG over resumes
    delta_pct: float | None  # vs the baseline row at the first p; None on error
    error: str | None = None


@dataclass(frozen=True)
class EvalReport:
    p_values: tuple[int, ...]
    rows: tuple[MethodResult, ...]
    baseline: str

    def to_dict(self) -> dict:
        return {
            "p_values": list(self.p_values),
            "baseline": self.baseline,
            "rows": [
                {
                    "method": r.method,
                    "ndcg": {str(p): v for p, v in r.ndcg.items()},
                    "delta_pct": r.delta_pct,
                    "error": r.error,
                }
                for r in self.rows
            ],
        }

    def render_table(self) -> str:
        headers = ["Method"] + [f"nDCG@{p}" for p in self.p_values] + [f"d% vs {self.baseline}"]
        lines = []
        for row in self.rows:
            if row.error is not None:
                lines.append([row.method, *["error"] * len(self.p_values), row.error])
                continue
            cells = [row.method] + [f"{row.ndcg[p]:.4f}" for p in self.p_values]
            cells.append("baseline" if row.method == self.baseline
                         else f"{row.delta_pct:+.1f}%")
            lines.append(cells)
        widths = [max(len(str(r[i])) for r in [headers] + lines) for i in range(len(headers))]
        out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        out.append("  ".join("-" * w for w in widths))
        for cells in lines:
            out.append("  ".join(str(c).ljust(w) for c, w in zip(cells, widths)))
        return "\n".join(out)


def evaluate_methods(method_rankers: dict[str, Callable[[str], Sequence[str]]],
                     resume_ids: Sequence[str],
                     judgments: Sequence[RelevanceJudgment],
                     p_values: Sequence[int] = (10, 20),
                     exponential: bool = True) -> EvalReport:
    """Mean nDCG@p per method over all resumes; failures become error rows.

    The first method in ``method_rankers`` is the baseline for the delta
    column (delta computed at the first p value).
    """
    if not method_rankers:
        raise DataValidationError("no methods to evaluate")
    if not resume_ids:
        raise DataValidationError("no resumes to evaluate")
    judged_ids = {j.resume_id for j in judgments}
    missing = [rid for rid in resume_ids if rid not in judged_ids]
    if missing:
        raise DataValidationError(f"no judgments for resumes: {missing}")

    baseline = next(iter(method_rankers))
    first_p = p_values[0]
    means: dict[str, dict[int, float]] = {}
    errors: dict[str, str] = {}
    for method, ranker in method_rankers.items():
        try:
            per_p: dict[int, list[float]] = {p: [] for p in p_values}
            for rid in resume_ids:
                ranking = list(ranker(rid))
                judged = judgments_for(judgments, rid)
                for p in p_values:
                    per_p[p].append(ndcg_at_p(ranking, judged, p, exponential))
            means[method] = {p: statistics.fmean(vals) for p, vals in per_p.items()}
        except SynapseError as exc:
            errors[method] = str(exc)

    if baseline in errors:
        raise DataValidationError(f"baseline method failed: {errors[baseline]}")
    base_score = means[baseline][first_p]
    rows = []
    for method in method_rankers:
        if method in errors:
            rows.append(MethodResult(method=method, ndcg={}, delta_pct=None,
                                     error=errors[method]))
            continue
        if method == baseline:
            delta = 0.0
        elif base_score == 0.0:
            delta = 0.0
        else:
            delta = (means[method][first_p] - base_score) / base_score * 100.0
        rows.append(MethodResult(method=method, ndcg=means[method], delta_pct=delta))
    return EvalReport(p_values=tuple(p_values), rows=tuple(rows), baseline=baseline)


@dataclass(frozen=True)
class PhaseStats:
    name: str
    mean: float
    std: float
    runs: int

    def __post_init__(self):
        if self.runs < 1:
            raise DataValidationError("runs must be >= 1")
        if self.std < 0:
            raise DataValidationError("std must be >= 0")


@dataclass(frozen=True)
class BenchReport:
    phases: tuple[PhaseStats, ...]

    def to_dict(self) -> dict:
        return {
            "phases": [
                {"name": p.name, "mean_s": p.mean, "std_s": p.std, "runs": p.runs}
                for p in self.phases
            ]
        }

    def render_table(self) -> str:
        name_w = max(len(p.name) for p in self.phases)
        out = [f"{'Phase'.ljust(name_w)}  Time (s)"]
        out.append(f"{'-' * name_w}  --------")
        for p in self.phases:
            out.append(f"{p.name.ljust(name_w)}  {p.mean:.4f} ± {p.std:.4f}")
        return "\n".join(out)


def bench(phases: list[tuple[str, Callable[[], None]]], runs: int,
          clock: Callable[[], float] = time.perf_counter) -> BenchReport:
    """Time each phase ``runs`` times; report mean and sample std per phase."""
    if runs < 3:
        raise DataValidationError("bench needs runs >= 3")
    stats = []
    for name, fn in phases:
        samples = []
        for _ in range(runs):
            start = clock()
            fn()
            samples.append(clock() - start)
        stats.append(PhaseStats(name=name, mean=statistics.fmean(samples),
                                std=statistics.stdev(samples), runs=runs))
    return BenchReport(phases=tuple(stats))
