"""Exact-match scoring, false-positive error categories and threshold sweeps."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Annotation, AnnotationSet, ConceptType, GoldCorpus
from .ensemble import check_threshold, combine, tally_votes


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 1.0
    r = tp / (tp + fn) if tp + fn else 1.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return prf(self.tp, self.fp, self.fn)[2]

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "f1": round(self.f1, 4),
        }


@dataclass(frozen=True)
class EvalReport(Counts):
    per_type: dict[ConceptType, Counts] = field(default_factory=dict)


def score_exact(gold: Iterable[Annotation], system: Iterable[Annotation]) -> EvalReport:
    """Micro-averaged exact-match scores, overall and per concept type."""
    gold, system = set(gold), set(system)
    tp = gold & system
    fp = system - gold
    fn = gold - system
    by_type = defaultdict(lambda: [0, 0, 0])
    for i, group in enumerate((tp, fp, fn)):
        for a in group:
            by_type[a.concept_type][i] += 1
    per_type = {t: Counts(*by_type[t]) for t in ConceptType}
    return EvalReport(len(tp), len(fp), len(fn), per_type)


CATEGORIES = ("wrong_type_only", "one_boundary_wrong", "both_boundaries_wrong", "spurious")


@dataclass(frozen=True)
class ErrorBreakdown:
    wrong_type_only: int = 0
    one_boundary_wrong: int = 0
    both_boundaries_wrong: int = 0
    spurious: int = 0
    missed: int = 0

    @property
    def fp(self) -> int:
        return sum(getattr(self, c) for c in CATEGORIES)

    def fractions(self) -> dict[str, float]:
        """Share of false positives in each category."""
        total = self.fp
        return {c: (getattr(self, c) / total if total else 0.0) for c in CATEGORIES}


def _classify(s: Annotation, golds: Sequence[Annotation]) -> str:
    overlapping = [g for g in golds if g.span.overlaps(s.span)]
    if any(g.span == s.span and g.concept_type != s.concept_type for g in overlapping):
        return "wrong_type_only"
    shared = [(g.span.start == s.span.start) + (g.span.end == s.span.end) for g in overlapping]
    if 1 in shared:
        return "one_boundary_wrong"
    if 0 in shared:
        return "both_boundaries_wrong"
    return "spurious"


def categorize_errors(gold: Iterable[Annotation], system: Iterable[Annotation]) -> ErrorBreakdown:
    """Assign each false positive to the first matching category.

    Categories are tried in the order of ``CATEGORIES``; boundary categories
    compare against any token-overlapping gold annotation, whatever its type.
    """
    gold, system = set(gold), set(system)
    gold_by_doc: dict[str, list[Annotation]] = defaultdict(list)
    for g in gold:
        gold_by_doc[g.doc_id].append(g)
    sys_by_doc: dict[str, list[Annotation]] = defaultdict(list)
    for s in system:
        sys_by_doc[s.doc_id].append(s)

    counts = dict.fromkeys(CATEGORIES, 0)
    for s in system - gold:
        counts[_classify(s, gold_by_doc.get(s.doc_id, []))] += 1
    missed = sum(
        1 for g in gold - system if not any(s.span.overlaps(g.span) for s in sys_by_doc.get(g.doc_id, []))
    )
    return ErrorBreakdown(missed=missed, **counts)


@dataclass(frozen=True)
class SweepRow:
    threshold: int
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0


def sweep(
    gold: GoldCorpus,
    per_annotator_outputs: Sequence[tuple[str, Mapping[str, AnnotationSet]]],
    thresholds: Iterable[int],
) -> list[SweepRow]:
    """Score the combined output at each voting threshold over the whole corpus.

    A document missing from an annotator's outputs counts as an empty set.
    """
    n = len(per_annotator_outputs)
    thresholds = sorted(set(thresholds))
    for k in thresholds:
        check_threshold(k, n)
    tallies = []
    for doc in gold.documents:
        sets = [
            AnnotationSet(doc.doc_id, ann_id, outputs[doc.doc_id].annotations if doc.doc_id in outputs else frozenset())
            for ann_id, outputs in per_annotator_outputs
        ]
        tallies.append((doc, tally_votes(sets)))
    all_gold = gold.all_gold()
    rows = []
    for k in thresholds:
        system = set()
        for doc, tally in tallies:
            system |= combine(tally, k).annotations
        r = score_exact(all_gold, system)
        rows.append(SweepRow(k, r.precision, r.recall, r.f1, r.tp, r.fp, r.fn))
    return rows


METRIC_HEADER = ("scope", "tp", "fp", "fn", "precision", "recall", "f1")
ERROR_HEADER = ("category", "count", "fraction_of_fp")
SWEEP_HEADER = ("threshold", "precision", "recall", "f1")


def _f(x: float) -> str:
    return f"{x:.4f}"


def render_sweep_tsv(rows: Sequence[SweepRow]) -> str:
    out = ["\t".join(SWEEP_HEADER)]
    out += [f"{r.threshold}\t{_f(r.precision)}\t{_f(r.recall)}\t{_f(r.f1)}" for r in rows]
    return "\n".join(out) + "\n"


def render_report(
    report: EvalReport | None,
    breakdown: ErrorBreakdown | None = None,
    rows: Sequence[SweepRow] = (),
    format: str = "tsv",
) -> str:
    """Render scores as TSV sections or a single JSON object.

    TSV holds up to three blank-line separated tables, each with a fixed
    header: metrics, error categories, sweep.  Tables with no input are left
    out, except that the sweep table is always written when no report is given.
    """
    if format == "json":
        doc = {
            "overall": report.as_dict() if report else None,
            "per_type": {t.value: report.per_type[t].as_dict() for t in ConceptType} if report else None,
            "errors": None,
            "sweep": [
                {
                    "threshold": r.threshold,
                    "precision": round(r.precision, 4),
                    "recall": round(r.recall, 4),
                    "f1": round(r.f1, 4),
                }
                for r in rows
            ],
        }
        if breakdown is not None:
            fr = breakdown.fractions()
            doc["errors"] = {
                **{c: {"count": getattr(breakdown, c), "fraction_of_fp": round(fr[c], 4)} for c in CATEGORIES},
                "missed": breakdown.missed,
            }
        return json.dumps(doc, indent=2) + "\n"
    if format != "tsv":
        raise ValueError(f"unknown report format {format!r}")

    sections = []
    if report is not None:
        lines = ["\t".join(METRIC_HEADER)]
        for scope, c in [("overall", report)] + [(t.value, report.per_type[t]) for t in ConceptType]:
            lines.append(f"{scope}\t{c.tp}\t{c.fp}\t{c.fn}\t{_f(c.precision)}\t{_f(c.recall)}\t{_f(c.f1)}")
        sections.append("\n".join(lines) + "\n")
    if breakdown is not None:
        fr = breakdown.fractions()
        lines = ["\t".join(ERROR_HEADER)]
        lines += [f"{c}\t{getattr(breakdown, c)}\t{_f(fr[c])}" for c in CATEGORIES]
        lines.append(f"missed\t{breakdown.missed}\t")
        sections.append("\n".join(lines) + "\n")
    if rows or report is None:
        sections.append(render_sweep_tsv(rows))
    return "\n".join(sections)
