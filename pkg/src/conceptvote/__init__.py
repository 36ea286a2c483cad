"""Ensemble concept annotation for clinical-style records.

Several independent annotators tag problems, tests and treatments; an
exact-match vote with a tunable threshold combines their output.
"""

from .corpus import (
    Annotation,
    AnnotationSet,
    ConceptType,
    Document,
    GoldCorpus,
    TokenSpan,
    load_corpus,
    load_corpus_dir,
    parse_con,
    serialize_con,
    span_text,
    tokenize,
)
from .ensemble import EnsembleConfig, VoteKey, VoteTally, combine, pipeline_annotate, run_pipeline, tally_votes
from .eval import ErrorBreakdown, EvalReport, SweepRow, categorize_errors, render_report, score_exact, sweep

__version__ = "0.1.0"
