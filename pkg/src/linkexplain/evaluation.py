"""Metrics and study harness: rank-statistic ROC AUC, multi-seed reports,
and annotator-agreement tallies from feedback logs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

TECHNIQUES = ("verification", "anchors", "path_ranking")


class EvaluationError(Exception):
    pass


class SingleClass(EvaluationError):
    pass


class DuplicateVerdict(EvaluationError):
    def __init__(self, link_id: str, technique: str, annotator: str):
        super().__init__(f"duplicate verdict for ({link_id}, {technique}, {annotator})")
        self.key = (link_id, technique, annotator)


@dataclass(frozen=True)
class ScoredLabel:
    score: float
    label: int


@dataclass
class EvaluationReport:
    dataset: str
    model: str
    seed_aucs: List[Tuple[int, float]]
    mean: float
    std: float


@dataclass(frozen=True)
class FeedbackRecord:
    link_id: str
    technique: str
    annotator: str
    verdict: str  # "agree" | "disagree"
    timestamp: str = ""

    def to_record(self) -> dict:
        return {
            "link_id": self.link_id,
            "technique": self.technique,
            "annotator": self.annotator,
            "verdict": self.verdict,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "FeedbackRecord":
        if rec.get("technique") not in TECHNIQUES:
            raise EvaluationError(f"unknown technique {rec.get('technique')!r}")
        if rec.get("verdict") not in ("agree", "disagree"):
            raise EvaluationError(f"unknown verdict {rec.get('verdict')!r}")
        return cls(
            link_id=rec["link_id"],
            technique=rec["technique"],
            annotator=rec["annotator"],
            verdict=rec["verdict"],
            timestamp=rec.get("timestamp", ""),
        )


@dataclass
class AgreementReport:
    per_technique: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def rate(self, technique: str) -> float:
        agreements, total = self.per_technique.get(technique, (0, 0))
        if total == 0:
            raise EvaluationError(f"no records for {technique}")
        return agreements / total

    def render(self) -> str:
        lines = [f"{'Technique':<16} {'Agreements':>10} {'Total':>6} {'Rate':>6}"]
        for technique in TECHNIQUES:
            agreements, total = self.per_technique.get(technique, (0, 0))
            rate = f"{agreements / total:.2f}" if total else "—"
            lines.append(f"{technique:<16} {agreements:>10} {total:>6} {rate:>6}")
        return "\n".join(lines)

    def to_record(self) -> dict:
        out = {}
        for technique in TECHNIQUES:
            agreements, total = self.per_technique.get(technique, (0, 0))
            out[technique] = {
                "agreements": agreements,
                "total": total,
                "rate": agreements / total if total else None,
            }
        return out


def roc_auc(items: Sequence[ScoredLabel]) -> float:
    """Probability a random positive outranks a random negative, ties at 1/2.

    Computed from average ranks (Mann-Whitney U), O(n log n).
    """
    positives = sum(1 for it in items if it.label == 1)
    negatives = len(items) - positives
    if positives == 0 or negatives == 0:
        raise SingleClass("need both a positive and a negative item")
    ordered = sorted(items, key=lambda it: it.score)
    rank_sum = 0.0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].score == ordered[i].score:
            j += 1
        avg_rank = (i + 1 + j) / 2  # ranks are 1-based; tied block shares the mean rank
        rank_sum += avg_rank * sum(1 for idx in range(i, j) if ordered[idx].label == 1)
        i = j
    u_stat = rank_sum - positives * (positives + 1) / 2
    return u_stat / (positives * negatives)


def multi_seed_report(
    run: Callable[[int], Sequence[ScoredLabel]],
    seeds: Sequence[int],
    dataset: str = "dataset",
    model: str = "model",
) -> EvaluationReport:
    """AUC per seed plus mean and population std (divide by N)."""
    if len(seeds) < 2:
        raise EvaluationError("need at least 2 seeds")
    seed_aucs = []
    for seed in seeds:
        try:
            seed_aucs.append((seed, roc_auc(run(seed))))
        except SingleClass as exc:
            raise SingleClass(f"seed {seed}: {exc}") from exc
    values = [a for _, a in seed_aucs]
    mean = sum(values) / len(values)
    std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
    return EvaluationReport(dataset=dataset, model=model, seed_aucs=seed_aucs, mean=mean, std=std)


def render_report(report: EvaluationReport) -> str:
    lines = [
        f"{'Dataset':<14} {'Model':<10} {'ROC AUC':>8} {'Std. Dev.':>10}",
        f"{report.dataset:<14} {report.model:<10} {report.mean:>8.4f} {report.std:>10.4f}",
        "",
        "per-seed: " + ", ".join(f"{seed}:{auc:.4f}" for seed, auc in report.seed_aucs),
        "std dev uses the population formula (divide by N)",
    ]
    return "\n".join(lines)


def ingest_feedback(lines: Iterable[str]) -> List[FeedbackRecord]:
    """Parse a feedback log, rejecting duplicate (link, technique, annotator) keys."""
    seen = set()
    records: List[FeedbackRecord] = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        record = FeedbackRecord.from_record(json.loads(line))
        key = (record.link_id, record.technique, record.annotator)
        if key in seen:
            raise DuplicateVerdict(*key)
        seen.add(key)
        records.append(record)
    return records


def agreement_report(records: Sequence[FeedbackRecord]) -> AgreementReport:
    """Pooled agree/total counts per technique."""
    seen = set()
    counts: Dict[str, List[int]] = {}
    for record in records:
        key = (record.link_id, record.technique, record.annotator)
        if key in seen:
            raise DuplicateVerdict(*key)
        seen.add(key)
        bucket = counts.setdefault(record.technique, [0, 0])
        bucket[1] += 1
        if record.verdict == "agree":
            bucket[0] += 1
    report = AgreementReport()
    for technique, (agreements, total) in counts.items():
        report.per_technique[technique] = (agreements, total)
    return report
