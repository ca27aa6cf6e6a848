"""Bundled synthetic corpus: 50 postings, 5 resumes, planted judgments.

Everything here is generated by fixed rules (no randomness), so the files
under fixtures/ can be regenerated byte-identically on any platform. The
corpus is organized into 10 job families of 5 postings each; every resume
aligns with one family (grade 2), one adjacent family (grade 1), and a few
explicit grade-0 postings.

Run ``python -m synapse.fixtures [root]`` to (re)write the fixture files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .corpus import JobPosting, Resume
from .evaluation import JUDGMENTS_CSV_HEADER, RelevanceJudgment
from .evolve import TargetSet

COMPANIES = [
    "Northwind Labs", "Bluefin Systems", "Cedar Analytics", "Quartzline",
    "Harborview Tech", "Mapleton Software", "Ironvale", "Sunmark Digital",
    "Pinecrest Data", "Vantage Forge",
]

LOCATIONS = ["Austin, TX", "Seattle, WA", "Denver, CO", "Raleigh, NC", "Remote"]

FAMILIES = [
    {
        "name": "backend",
        "industry": "Software",
        "titles": ["Backend Engineer", "Senior Backend Engineer",
                   "API Platform Engineer", "Distributed Systems Engineer",
                   "Services Developer"],
        "skills": ["python", "postgresql", "microservices", "rest", "grpc", "caching"],
        "focus": "design and operate backend services",
    },
    {
        "name": "frontend",
        "industry": "Software",
        "titles": ["Frontend Engineer", "Senior Frontend Engineer",
                   "Web Application Developer", "UI Engineer",
                   "Design Systems Developer"],
        "skills": ["javascript", "typescript", "react", "css", "accessibility", "webpack"],
        "focus": "build responsive web interfaces",
    },
    {
        "name": "dataeng",
        "industry": "Data",
        "titles": ["Data Engineer", "Senior Data Engineer",
                   "Analytics Platform Engineer", "Data Pipeline Developer",
                   "Warehouse Engineer"],
        "skills": ["sql", "spark", "airflow", "warehousing", "etl", "kafka"],
        "focus": "build reliable data pipelines",
    },
    {
        "name": "ml",
        "industry": "Data",
        "titles": ["Machine Learning Engineer", "Senior ML Engineer",
                   "Applied Scientist", "ML Platform Engineer",
                   "Model Deployment Engineer"],
        "skills": ["pytorch", "modeling", "experimentation", "numpy", "training", "inference"],
        "focus": "train and ship learning models",
    },
    {
        "name": "devops",
        "industry": "Infrastructure",
        "titles": ["DevOps Engineer", "Site Reliability Engineer",
                   "Platform Operations Engineer", "Infrastructure Engineer",
                   "Release Engineer"],
        "skills": ["kubernetes", "terraform", "monitoring", "incident", "automation", "cloud"],
        "focus": "keep production infrastructure healthy",
    },
    {
        "name": "mobile",
        "industry": "Software",
        "titles": ["Mobile Engineer", "Senior Mobile Engineer",
                   "Android Developer", "iOS Developer",
                   "Mobile Platform Engineer"],
        "skills": ["kotlin", "swift", "android", "ios", "offline", "profiling"],
        "focus": "ship polished mobile applications",
    },
    {
        "name": "security",
        "industry": "Security",
        "titles": ["Security Engineer", "Senior Security Engineer",
                   "Application Security Analyst", "Threat Detection Engineer",
                   "Security Operations Engineer"],
        "skills": ["threat", "detection", "hardening", "audits", "response", "encryption"],
        "focus": "protect systems and investigate threats",
    },
    {
        "name": "embedded",
        "industry": "Hardware",
        "titles": ["Embedded Engineer", "Senior Embedded Engineer",
                   "Firmware Developer", "Real-Time Systems Engineer",
                   "Device Software Engineer"],
        "skills": ["firmware", "microcontrollers", "realtime", "drivers", "debugging", "sensors"],
        "focus": "write firmware for constrained devices",
    },
    {
        "name": "design",
        "industry": "Design",
        "titles": ["Product Designer", "Senior Product Designer",
                   "UX Researcher", "Interaction Designer",
                   "Design Lead"],
        "skills": ["prototyping", "wireframes", "usability", "research", "figma", "workshops"],
        "focus": "design usable product experiences",
    },
    {
        "name": "finance",
        "industry": "Finance",
        "titles": ["Financial Analyst", "Senior Financial Analyst",
                   "FP&A Analyst", "Portfolio Analyst",
                   "Treasury Analyst"],
        "skills": ["forecasting", "budgeting", "valuation", "reporting", "portfolios", "excel"],
        "focus": "analyze budgets and forecasts",
    },
]

# resume id -> (aligned family index, adjacent family index, two grade-0 family indexes)
RESUME_PLAN = {
    "r01": (0, 4, (8, 9)),
    "r02": (2, 3, (5, 6)),
    "r03": (3, 2, (7, 8)),
    "r04": (4, 0, (6, 9)),
    "r05": (8, 1, (0, 9)),
}


def _posting_id(family_index: int, variant: int) -> str:
    return f"p{family_index * 5 + variant + 1:03d}"


def make_postings() -> list[JobPosting]:
    postings = []
    for fi, family in enumerate(FAMILIES):
        for v in range(5):
            skills = family["skills"][v:] + family["skills"][:v]
            listed = skills[:5]
            title = family["titles"][v]
            company = COMPANIES[(fi + v) % len(COMPANIES)]
            description = (
                f"{company} is hiring a {title.lower()} to {family['focus']}. "
                f"You will work with {listed[0]}, {listed[1]}, and {listed[2]} "
                f"every day. Solid experience with {listed[3]} and {listed[4]} "
                f"is required. Exposure to {skills[5]} is a plus."
            )
            postings.append(JobPosting(
                id=_posting_id(fi, v),
                title=title,
                company=company,
                location=LOCATIONS[v],
                industry=family["industry"],
                skills=listed,
                description=description,
            ))
    return postings


def make_resumes() -> list[Resume]:
    resumes = []
    for rid, (fi, adj, _zeros) in RESUME_PLAN.items():
        family = FAMILIES[fi]
        neighbor = FAMILIES[adj]
        own = family["skills"]
        sections = {
            "summary": (
                f"Engineer with six years of experience; I {family['focus']} "
                f"and care about {own[0]} and {own[1]}."
            ),
            "experience": (
                f"At {COMPANIES[fi]} I used {own[0]}, {own[1]}, and {own[2]} to "
                f"{family['focus']}. Earlier at {COMPANIES[(fi + 3) % len(COMPANIES)]} "
                f"I worked with {own[3]} and picked up some {neighbor['skills'][0]}. "
                f"I document decisions and mentor junior teammates."
            ),
            "education": "Bachelor of Science in Computer Science, State University.",
            "skills": ", ".join(own[:4]),
        }
        resumes.append(Resume(id=rid, sections=sections))
    return resumes


def make_judgments() -> list[RelevanceJudgment]:
    judgments = []
    for rid, (fi, adj, zeros) in RESUME_PLAN.items():
        for v in range(5):
            judgments.append(RelevanceJudgment(rid, _posting_id(fi, v), 2))
        for v in range(5):
            judgments.append(RelevanceJudgment(rid, _posting_id(adj, v), 1))
        for zf in zeros:
            judgments.append(RelevanceJudgment(rid, _posting_id(zf, 0), 0))
    judgments.sort(key=lambda j: (j.resume_id, j.posting_id))
    return judgments


def write_fixtures(root: str | Path) -> list[Path]:
    """Write postings.csv, resumes/*.json and judgments.csv under root."""
    root = Path(root)
    (root / "resumes").mkdir(parents=True, exist_ok=True)
    written = []

    postings_path = root / "postings.csv"
    with open(postings_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "title", "company", "location", "industry",
                         "skills", "description"])
        for p in make_postings():
            writer.writerow([p.id, p.title, p.company, p.location, p.industry,
                             ";".join(p.skills), p.description])
    written.append(postings_path)

    for resume in make_resumes():
        path = root / "resumes" / f"{resume.id}.json"
        payload = {"id": resume.id, "sections": resume.sections}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        written.append(path)

    judgments_path = root / "judgments.csv"
    with open(judgments_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(JUDGMENTS_CSV_HEADER)
        for j in make_judgments():
            writer.writerow([j.resume_id, j.posting_id, j.grade])
    written.append(judgments_path)
    return written


GAP_KEYWORDS = ["kubernetes", "terraform", "prometheus", "grafana", "spark",
                "airflow", "kafka", "docker", "ansible", "redis"]

BENCHMARK_RESUME = (
    "Software engineer with six years of experience. "
    "Built web services and internal reporting tools. "
    "Led a small group of developers and reviewed code. "
    "Wrote automated tests and kept the build scripts healthy. "
    "Comfortable with python and sql. "
    "Bachelor of science in computer science."
)


def keyword_gap_benchmark() -> tuple[str, TargetSet]:
    """A base resume missing exactly ten keywords its target postings want."""
    targets = TargetSet(postings=(
        JobPosting(
            id="t1", title="Platform Engineer", company="Harborview Tech",
            location="Remote", industry="Infrastructure",
            skills=["kubernetes", "terraform", "prometheus", "grafana"],
            description=(
                "Operate our kubernetes clusters provisioned with terraform. "
                "Build dashboards in grafana backed by prometheus metrics. "
                "Automate deployments and on-call tooling."
            ),
        ),
        JobPosting(
            id="t2", title="Data Infrastructure Engineer", company="Pinecrest Data",
            location="Remote", industry="Data",
            skills=["spark", "airflow", "kafka"],
            description=(
                "Develop spark jobs orchestrated with airflow. "
                "Stream events through kafka into the warehouse. "
                "Keep pipelines reliable and observable."
            ),
        ),
        JobPosting(
            id="t3", title="Cloud Operations Engineer", company="Ironvale",
            location="Remote", industry="Infrastructure",
            skills=["docker", "ansible", "redis"],
            description=(
                "Package services with docker and configure hosts with ansible. "
                "Tune redis caches for low latency. "
                "Improve deployment automation across environments."
            ),
        ),
    ))
    return BENCHMARK_RESUME, targets


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    for path in write_fixtures(target):
        print(path)
