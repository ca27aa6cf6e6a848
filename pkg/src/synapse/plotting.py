"""Figure rendering for traces, evaluation tables, and benchmark reports.

All functions render to a file path (format taken from the suffix) using the
non-interactive Agg backend, so they work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .errors import DataValidationError  # noqa: E402


def plot_fitness_trace(trace, path: str) -> None:
    """Best and mean fitness per generation for one evolution run."""
    gens = [r.gen for r in trace.records]
    best = [r.best for r in trace.records]
    mean = [r.mean for r in trace.records]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(gens, best, marker="o", label="best")
    ax.plot(gens, mean, marker="s", linestyle="--", label="mean")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.set_title(f"Fitness per generation "
                 f"(+{100 * trace.relative_improvement:.1f}% relative)")
    ax.set_xticks(gens)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_improvement_distribution(improvements: list[float], path: str) -> None:
    """Histogram of relative improvements across many seeded runs."""
    if not improvements:
        raise DataValidationError("no improvements to plot")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist([100 * x for x in improvements], bins=20, edgecolor="black")
    ax.set_xlabel("relative improvement (%)")
    ax.set_ylabel("runs")
    ax.set_title(f"Improvement over {len(improvements)} seeds")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_eval_report(report, path: str) -> None:
    """Grouped bars of mean nDCG per method, one group per cutoff p."""
    rows = [r for r in report.rows if r.error is None]
    if not rows:
        raise DataValidationError("no successful rows to plot")
    methods = [r.method for r in rows]
    x = range(len(methods))
    width = 0.8 / len(report.p_values)
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(methods)), 4))
    for i, p in enumerate(report.p_values):
        offsets = [xi + i * width for xi in x]
        ax.bar(offsets, [r.ndcg[p] for r in rows], width=width, label=f"nDCG@{p}")
    ax.set_xticks([xi + width * (len(report.p_values) - 1) / 2 for xi in x])
    ax.set_xticklabels(methods, rotation=30, ha="right")
    ax.set_ylabel("nDCG")
    ax.set_title("Ranking quality by method")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_bench_report(report, path: str) -> None:
    """Bar chart of per-phase mean latency with std error bars."""
    names = [p.name for p in report.phases]
    means = [p.mean for p in report.phases]
    stds = [p.std for p in report.phases]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(names)), means, yerr=stds, capsize=4, edgecolor="black")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("seconds")
    ax.set_title(f"Phase latency over {report.phases[0].runs} runs")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_recommendation(report: dict, path: str) -> None:
    """Horizontal bars: fused score per recommended posting, best at top."""
    final = report["final"]["ranking"]
    if not final:
        raise DataValidationError("empty recommendation report")
    labels = [e["posting_id"] for e in reversed(final)]
    scores = [e["score"] for e in reversed(final)]
    fig, ax = plt.subplots(figsize=(6, max(3, 0.3 * len(final))))
    ax.barh(range(len(labels)), scores, edgecolor="black")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels)
    ax.set_xlabel(f"fused score ({report['final']['scheme']})")
    ax.set_title(f"Recommendations for {report['resume_id']}")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
