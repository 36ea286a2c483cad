"""Exact-match voting across annotators.

Two annotations agree only when doc, start, end and concept type are all
equal.  An annotation survives combination when at least ``threshold``
annotators produced it.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .annotators import Annotator, AnnotatorDescriptor, annotate, build_annotator
from .corpus import Annotation, AnnotationSet, ConceptType, Document, TokenSpan, span_text
from .errors import AnnotatorError, ConfigError, ContractError, PipelineError

log = logging.getLogger(__name__)

ENSEMBLE_SOURCE = "ensemble"


@dataclass(frozen=True, order=True)
class VoteKey:
    doc_id: str
    span: TokenSpan
    concept_type: ConceptType

    @classmethod
    def of(cls, a: Annotation) -> "VoteKey":
        return cls(a.doc_id, a.span, a.concept_type)


@dataclass
class VoteTally:
    doc_id: str
    n_sets: int
    contributors: dict[VoteKey, frozenset[str]] = field(default_factory=dict)
    texts: dict[VoteKey, str] = field(default_factory=dict)

    @property
    def counts(self) -> dict[VoteKey, int]:
        return {k: len(v) for k, v in self.contributors.items()}


@dataclass(frozen=True)
class EnsembleConfig:
    annotators: tuple[AnnotatorDescriptor, ...]
    threshold: int

    def __post_init__(self):
        ids = [d.id for d in self.annotators]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ConfigError(f"duplicate annotator ids: {dupes}")
        check_threshold(self.threshold, len(self.annotators))

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EnsembleConfig":
        try:
            descs = tuple(AnnotatorDescriptor.from_dict(x) for x in d["annotators"])
            threshold = d["threshold"]
        except (KeyError, TypeError) as e:
            raise ConfigError(f"ensemble config needs 'annotators' and 'threshold': {e}") from None
        if not isinstance(threshold, int) or isinstance(threshold, bool):
            raise ConfigError(f"threshold must be an integer, got {threshold!r}")
        return cls(descs, threshold)


def check_threshold(threshold: int, n_annotators: int) -> None:
    if not 1 <= threshold <= n_annotators:
        raise ConfigError(f"threshold {threshold} outside [1, {n_annotators}]")


def load_config(path: Path | str) -> tuple[EnsembleConfig, dict]:
    """Read an ensemble JSON file; also returns the raw dict for extra settings."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return EnsembleConfig.from_dict(raw), raw


def build_annotators(config: EnsembleConfig, base_dir: Path | str = ".") -> list[Annotator]:
    return [build_annotator(d, base_dir) for d in config.annotators]


def tally_votes(sets: Sequence[AnnotationSet]) -> VoteTally:
    doc_ids = {s.doc_id for s in sets}
    if len(doc_ids) > 1:
        raise ContractError(f"annotation sets from several documents: {sorted(doc_ids)}")
    sources = [s.source for s in sets]
    dupes = sorted({x for x in sources if sources.count(x) > 1})
    if dupes:
        raise ContractError(f"duplicate annotator ids in vote: {dupes}")
    voters: dict[VoteKey, set[str]] = {}
    texts: dict[VoteKey, str] = {}
    for s in sets:
        for a in s.annotations:
            key = VoteKey.of(a)
            voters.setdefault(key, set()).add(s.source)
            texts.setdefault(key, a.text.lower())
    return VoteTally(
        doc_id=doc_ids.pop() if doc_ids else "",
        n_sets=len(sets),
        contributors={k: frozenset(v) for k, v in voters.items()},
        texts=texts,
    )


def combine(tally: VoteTally, threshold: int, doc: Document | None = None) -> AnnotationSet:
    """Keep every key with at least ``threshold`` votes.

    Surface text comes from ``doc`` when given, otherwise from a contributor.
    """
    if threshold < 1:
        raise ConfigError(f"threshold must be >= 1, got {threshold}")
    kept = []
    for key, who in tally.contributors.items():
        if len(who) >= threshold:
            text = span_text(doc, key.span) if doc is not None else tally.texts.get(key, "")
            kept.append(Annotation(key.doc_id, key.span, key.concept_type, text, ENSEMBLE_SOURCE))
    return AnnotationSet.of(tally.doc_id, ENSEMBLE_SOURCE, kept)


@dataclass
class PipelineResult:
    combined: AnnotationSet
    tally: VoteTally
    threshold: int
    outputs: dict[str, AnnotationSet]
    failures: dict[str, str]

    def votes(self, a: Annotation) -> frozenset[str]:
        return self.tally.contributors.get(VoteKey.of(a), frozenset())


def _safe_annotate(annotator: Annotator, doc: Document) -> AnnotationSet | AnnotatorError:
    try:
        return annotate(annotator, doc)
    except AnnotatorError as e:
        return e


def run_pipeline(
    annotators: Sequence[Annotator],
    doc: Document,
    threshold: int,
    max_workers: int | None = None,
) -> PipelineResult:
    """Annotate ``doc`` with every annotator, then vote.

    A failing annotator votes with an empty set. The run is abandoned when
    fewer than ``threshold`` annotators succeed.
    """
    ids = [a.id for a in annotators]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate annotator ids: {ids}")
    check_threshold(threshold, len(annotators))
    if len(annotators) > 1:
        with ThreadPoolExecutor(max_workers=max_workers or len(annotators)) as pool:
            results = list(pool.map(lambda a: _safe_annotate(a, doc), annotators))
    else:
        results = [_safe_annotate(a, doc) for a in annotators]

    outputs: dict[str, AnnotationSet] = {}
    failures: dict[str, str] = {}
    for annotator, res in zip(annotators, results):
        if isinstance(res, AnnotatorError):
            log.warning("%s failed on %s: %s", annotator.id, doc.doc_id, res)
            failures[annotator.id] = str(res)
            outputs[annotator.id] = AnnotationSet.of(doc.doc_id, annotator.id)
        else:
            outputs[annotator.id] = res
    succeeded = len(annotators) - len(failures)
    if succeeded < threshold:
        raise PipelineError(
            f"only {succeeded} of {len(annotators)} annotators succeeded on {doc.doc_id!r}, "
            f"threshold is {threshold}; failed: {sorted(failures)}",
            failures,
        )
    tally = tally_votes(list(outputs.values()))
    tally.doc_id = doc.doc_id
    return PipelineResult(combine(tally, threshold, doc), tally, threshold, outputs, failures)


def pipeline_annotate(config: EnsembleConfig, annotators: Sequence[Annotator], doc: Document) -> AnnotationSet:
    if [a.id for a in annotators] != [d.id for d in config.annotators]:
        raise ConfigError("annotators do not match the configured descriptors")
    return run_pipeline(annotators, doc, config.threshold).combined
