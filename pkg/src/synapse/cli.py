"""Command-line interface.

Subcommands: ingest, index, recommend, explain, evolve, eval, bench.
Exit codes: 0 success, 1 usage error, 2 missing artifact, 3 provider
failure, 4 data validation failure. ``--config`` points at a JSON file
overriding the defaults; per-command flags override the config in turn.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import plotting
from .config import PipelineConfig, load_config
from .corpus import Resume, ingest_postings, ingest_resumes
from .errors import (
    DataValidationError,
    EvolutionError,
    GroundingError,
    MissingArtifactError,
    ProviderError,
    SynapseError,
)
from .pipeline import EVAL_METHOD_ORDER, Pipeline, render_recommend_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISSING_ARTIFACT = 2
EXIT_PROVIDER = 3
EXIT_DATA = 4


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for artifacts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_json(path: str, obj) -> None:
    Path(path).write_text(_dump_json(obj), encoding="utf-8")


def _load_resume(path: str) -> Resume:
    p = Path(path)
    if not p.is_file():
        raise MissingArtifactError(f"resume file not found: {path}")
    fmt = "json" if p.suffix.lower() == ".json" else "txt"
    resumes, report = ingest_resumes(p, fmt)
    if not resumes:
        reason = report.rejected[0][1] if report.rejected else "no resume found"
        raise DataValidationError(f"cannot load resume {path}: {reason}")
    return resumes[0]


def _effective_config(args, config: PipelineConfig) -> PipelineConfig:
    updates = {}
    if getattr(args, "llm", None):
        updates["llm_provider"] = args.llm
    if getattr(args, "embed", None):
        updates["embed_provider"] = args.embed
    for attr, key in (("postings", "corpus_path"), ("format", "corpus_format"),
                      ("index", "index_path"), ("judgments", "judgments_path")):
        value = getattr(args, attr, None)
        if value:
            updates[key] = value
    if updates:
        config = dataclasses.replace(config, **updates)
    return config


def cmd_ingest(args, config: PipelineConfig) -> int:
    postings, p_report = ingest_postings(config.corpus_path, config.corpus_format)
    out = {"postings": p_report.to_dict()}
    if args.resumes:
        _, r_report = ingest_resumes(args.resumes, args.resumes_format)
        out["resumes"] = r_report.to_dict()
    if args.as_json:
        sys.stdout.write(_dump_json(out))
        return EXIT_OK
    print(f"postings: accepted {p_report.accepted}, rejected {p_report.rejected_count}")
    for row, reason in p_report.rejected:
        print(f"  {row}: {reason}")
    if args.resumes:
        r = out["resumes"]
        print(f"resumes: accepted {r['accepted']}, rejected {r['rejected']}")
        for item in r["reasons"]:
            print(f"  {item['row']}: {item['reason']}")
    return EXIT_OK


def cmd_index(args, config: PipelineConfig) -> int:
    if args.dims:
        config = dataclasses.replace(config, dims_phase1=args.dims)
    if args.mode:
        config = dataclasses.replace(config, index_mode=args.mode,
                                     index_clusters=args.clusters,
                                     index_nprobe=args.nprobe)
    pipeline = Pipeline(config, seed=args.seed)
    index, path = pipeline.build_index(args.out)
    payload = {"count": len(index), "dims": index.dims, "mode": index.mode,
               "path": path}
    if args.as_json:
        sys.stdout.write(_dump_json(payload))
    else:
        print(f"indexed {len(index)} postings ({index.dims} dims, "
              f"{index.mode} mode) -> {path}")
    return EXIT_OK


def cmd_recommend(args, config: PipelineConfig) -> int:
    resume = _load_resume(args.resume)
    pipeline = Pipeline(config, seed=args.seed)
    report = pipeline.recommend(resume, args.k)
    if args.out:
        _write_json(args.out, report)
    if args.plot:
        plotting.plot_recommendation(report, args.plot)
    if args.as_json:
        sys.stdout.write(_dump_json(report))
    else:
        print(render_recommend_table(report))
    return EXIT_OK


def cmd_explain(args, config: PipelineConfig) -> int:
    resume = _load_resume(args.resume)
    pipeline = Pipeline(config, seed=args.seed)
    evidence, explanation = pipeline.explain(resume, args.posting, args.m)
    if args.as_json:
        sys.stdout.write(_dump_json(explanation.to_dict()))
        return EXIT_OK
    print(f"Explanation for {explanation.posting_id}:")
    print(f"  {explanation.text}")
    print(f"Citations: {sorted(explanation.cited_passage_ids)}")
    print("Evidence:")
    for p in evidence.passages:
        print(f"  [#{p.passage_id}] ({p.source}, sim {p.similarity:.4f}) {p.text}")
    return EXIT_OK


def cmd_evolve(args, config: PipelineConfig) -> int:
    resume = _load_resume(args.resume)
    pipeline = Pipeline(config, seed=args.seed)
    targets = pipeline.resolve_targets(resume, args.targets)
    best, trace = pipeline.evolve_resume(resume, targets)
    payload = trace.to_dict()
    payload["best_resume"] = best.resume_text
    if args.out:
        _write_json(args.out, payload)
    if args.plot:
        plotting.plot_fitness_trace(trace, args.plot)
    if args.as_json:
        sys.stdout.write(_dump_json(payload))
        return EXIT_OK
    for record in trace.records:
        print(f"gen {record.gen}: best {record.best:.4f}, mean {record.mean:.4f}")
    print(f"relative improvement: {100 * trace.relative_improvement:+.1f}%")
    print(f"best individual: {best.ident} ({best.lineage})")
    return EXIT_OK


def cmd_eval(args, config: PipelineConfig) -> int:
    pipeline = Pipeline(config, seed=args.seed)
    methods = EVAL_METHOD_ORDER if args.methods == "all" else [
        m.strip() for m in args.methods.split(",") if m.strip()]
    report = pipeline.evaluate(methods, args.p)
    if args.out:
        _write_json(args.out, report.to_dict())
    if args.plot:
        plotting.plot_eval_report(report, args.plot)
    if args.as_json:
        sys.stdout.write(_dump_json(report.to_dict()))
    else:
        print(report.render_table())
    return EXIT_OK


def cmd_bench(args, config: PipelineConfig) -> int:
    pipeline = Pipeline(config, seed=args.seed)
    if args.resume:
        resume = _load_resume(args.resume)
    else:
        resumes = pipeline.resumes()
        resume = resumes[sorted(resumes)[0]]
    report = pipeline.run_bench(resume, args.runs)
    if args.out:
        _write_json(args.out, report.to_dict())
    if args.plot:
        plotting.plot_bench_report(report, args.plot)
    if args.as_json:
        sys.stdout.write(_dump_json(report.to_dict()))
    else:
        print(report.render_table())
    return EXIT_OK


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file")
    common.add_argument("--seed", type=int, default=0, help="global random seed")
    common.add_argument("--llm", choices=["mock", "remote"], default=None,
                        help="LLM provider override")
    common.add_argument("--embed", choices=["hash", "remote"], default=None,
                        help="embedding provider override")
    common.add_argument("--json", action="store_true", dest="as_json",
                        help="print machine-readable JSON")

    parser = _Parser(prog="synapse",
                     description="Two-phase job recommendation pipeline")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command",
                                parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common],
                       help="validate postings (and optionally resumes)")
    p.add_argument("--postings", default=None, help="postings file")
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--resumes", default=None, help="resume file or directory")
    p.add_argument("--resumes-format", choices=["json", "txt"], default="json")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", parents=[common],
                       help="embed postings and build the vector index")
    p.add_argument("--postings", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--out", default=None, help="index output path")
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--mode", choices=["exact", "clustered"], default=None)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--nprobe", type=int, default=1)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("recommend", parents=[common],
                       help="retrieve, rerank and fuse postings for a resume")
    p.add_argument("--resume", required=True, help="resume file (.txt or .json)")
    p.add_argument("--postings", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--k", type=int, default=None, help="retrieval depth")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--plot", default=None, help="write a score figure here")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("explain", parents=[common],
                       help="explain why a posting matches a resume")
    p.add_argument("--resume", required=True)
    p.add_argument("--posting", required=True, help="posting id")
    p.add_argument("--postings", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--m", type=int, default=None, help="evidence passages per source")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("evolve", parents=[common],
                       help="evolve a resume against target postings")
    p.add_argument("--resume", required=True)
    p.add_argument("--targets", default="auto:5",
                   help="comma-separated posting ids or auto:N")
    p.add_argument("--postings", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--out", default=None, help="write the trace JSON here")
    p.add_argument("--plot", default=None, help="write the fitness figure here")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("eval", parents=[common],
                       help="nDCG evaluation of ranking methods")
    p.add_argument("--judgments", default=None)
    p.add_argument("--methods", default="all",
                   help='"all" or comma-separated method names')
    p.add_argument("--p", type=_int_list, default=(10, 20),
                   help="comma-separated cutoffs")
    p.add_argument("--postings", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", parents=[common],
                       help="time the pipeline phases")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--resume", default=None)
    p.add_argument("--postings", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--out", default="bench.json")
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits; keep the int-return contract
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _effective_config(args, load_config(args.config))
        return args.func(args, config)
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except (ProviderError, GroundingError, EvolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except SynapseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
