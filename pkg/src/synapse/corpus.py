"""Ingestion and fusion of job postings and resumes.

Source records are semi-structured (CSV/JSONL postings, JSON/plain-text
resumes). Each record is validated on ingest and every rejected row is
reported with a reason; nothing is dropped silently. ``fuse`` flattens a
record into the single-text form used for embedding, with a fixed field
order so identical inputs always produce byte-identical text.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataValidationError, MissingArtifactError

POSTING_CSV_HEADER = ["id", "title", "company", "location", "industry", "skills", "description"]

# Resume sections fuse in this order; unknown section names fuse after them.
CANONICAL_SECTIONS = ["experience", "education", "skills", "summary", "other"]


@dataclass
class JobPosting:
    """One job posting. ``id`` must be unique within a corpus."""

    id: str
    title: str
    company: str
    description: str
    location: str = ""
    industry: str = ""
    skills: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if not self.id.strip():
            raise DataValidationError("posting id must be non-empty")
        if not self.description.strip():
            raise DataValidationError("empty description")


@dataclass
class Resume:
    """One resume: named sections plus a raw-text fallback."""

    id: str
    sections: dict[str, str] = field(default_factory=dict)
    raw_text: str = ""

    def validate(self) -> None:
        if not self.id.strip():
            raise DataValidationError("resume id must be non-empty")
        if not self.raw_text.strip() and not any(v.strip() for v in self.sections.values()):
            raise DataValidationError("empty resume")


@dataclass(frozen=True)
class FusedDocument:
    """Single-text form of a posting or resume, ready for embedding."""

    doc_id: str
    kind: str  # "posting" | "resume"
    text: str


@dataclass
class IngestReport:
    """Accounting of one ingest pass: every input row is accepted or rejected."""

    accepted: int = 0
    rejected: list[tuple[str, str]] = field(default_factory=list)  # (row ref, reason)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected_count,
            "reasons": [{"row": row, "reason": reason} for row, reason in self.rejected],
        }


def _posting_from_record(record: dict, row_ref: str) -> JobPosting:
    skills = record.get("skills") or []
    if isinstance(skills, str):
        skills = [s.strip() for s in skills.split(";") if s.strip()]
    posting = JobPosting(
        id=str(record.get("id", "")).strip(),
        title=str(record.get("title", "") or ""),
        company=str(record.get("company", "") or ""),
        location=str(record.get("location", "") or ""),
        industry=str(record.get("industry", "") or ""),
        skills=[str(s) for s in skills],
        description=str(record.get("description", "") or ""),
    )
    posting.validate()
    return posting


def ingest_postings(path: str | Path, format: str) -> tuple[list[JobPosting], IngestReport]:
    """Read postings from a CSV or JSONL file.

    Rows violating an invariant (empty description, duplicate id, parse
    failure) are rejected and listed in the report; valid rows are returned.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"postings file not found: {path}")
    if format not in ("csv", "jsonl"):
        raise DataValidationError(f"unknown postings format: {format!r}")

    report = IngestReport()
    postings: list[JobPosting] = []
    seen_ids: set[str] = set()

    def consider(record: dict, row_ref: str) -> None:
        try:
            posting = _posting_from_record(record, row_ref)
        except DataValidationError as exc:
            report.rejected.append((row_ref, str(exc)))
            return
        if posting.id in seen_ids:
            report.rejected.append((row_ref, "duplicate id"))
            return
        seen_ids.add(posting.id)
        postings.append(posting)
        report.accepted += 1

    if format == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataValidationError(f"postings file is empty: {path}") from None
            if [h.strip() for h in header] != POSTING_CSV_HEADER:
                raise DataValidationError(
                    f"malformed header: expected {','.join(POSTING_CSV_HEADER)}"
                )
            for lineno, row in enumerate(reader, start=2):
                if not any(cell.strip() for cell in row):
                    continue
                if len(row) != len(POSTING_CSV_HEADER):
                    report.rejected.append((f"line {lineno}", "wrong column count"))
                    continue
                consider(dict(zip(POSTING_CSV_HEADER, row)), f"line {lineno}")
    else:
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    report.rejected.append((f"line {lineno}", "invalid JSON"))
                    continue
                if not isinstance(record, dict):
                    report.rejected.append((f"line {lineno}", "not a JSON object"))
                    continue
                consider(record, f"line {lineno}")

    return postings, report


def ingest_resumes(path: str | Path, format: str) -> tuple[list[Resume], IngestReport]:
    """Read resumes from a file or directory of files.

    Plain-text resumes land entirely in ``raw_text`` with the id taken from
    the filename stem; JSON resumes carry explicit ``id`` and ``sections``.
    """
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"resume path not found: {path}")
    if format not in ("json", "txt"):
        raise DataValidationError(f"unknown resume format: {format!r}")

    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == f".{format}")
    else:
        files = [path]

    report = IngestReport()
    resumes: list[Resume] = []
    seen_ids: set[str] = set()

    for file in files:
        try:
            if format == "txt":
                resume = Resume(id=file.stem, raw_text=file.read_text(encoding="utf-8"))
            else:
                record = json.loads(file.read_text(encoding="utf-8"))
                sections = {str(k): str(v) for k, v in (record.get("sections") or {}).items()}
                resume = Resume(id=str(record.get("id", "")).strip(), sections=sections)
            resume.validate()
        except json.JSONDecodeError:
            report.rejected.append((file.name, "invalid JSON"))
            continue
        except DataValidationError as exc:
            report.rejected.append((file.name, str(exc)))
            continue
        if resume.id in seen_ids:
            report.rejected.append((file.name, "duplicate id"))
            continue
        seen_ids.add(resume.id)
        resumes.append(resume)
        report.accepted += 1

    return resumes, report


def fuse(record: JobPosting | Resume) -> FusedDocument:
    """Flatten a record into one newline-separated text block.

    Postings fuse as title, company, location, industry, skills (comma
    joined), description, skipping absent fields. Resumes fuse their
    sections in canonical order (unknown names last); ``raw_text`` is used
    only when no section has content. Deterministic by construction.
    """
    record.validate()
    if isinstance(record, JobPosting):
        parts = [record.title, record.company, record.location, record.industry]
        if record.skills:
            parts.append(", ".join(record.skills))
        parts.append(record.description)
        text = "\n".join(p for p in parts if p.strip())
        return FusedDocument(doc_id=record.id, kind="posting", text=text)

    known = [record.sections[name] for name in CANONICAL_SECTIONS
             if record.sections.get(name, "").strip()]
    unknown = [text for name, text in record.sections.items()
               if name not in CANONICAL_SECTIONS and text.strip()]
    parts = known + unknown
    if not parts:
        parts = [record.raw_text]
    return FusedDocument(doc_id=record.id, kind="resume", text="\n".join(parts))
