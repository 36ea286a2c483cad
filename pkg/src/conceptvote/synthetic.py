"""Synthetic clinical-style records with known concepts, and noisy annotators.

The generated corpus is its own gold standard.  ``noisy_outputs`` simulates
independent annotation systems by corrupting that gold standard at fixed
rates, which is enough to exercise voting and the threshold sweep.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import (
    Annotation,
    AnnotationSet,
    ConceptType,
    Document,
    GoldCorpus,
    TokenSpan,
    load_corpus,
    load_corpus_dir,
    make_annotation,
    serialize_con,
)

PROBLEMS = [
    "increasing dyspnea", "chest pain", "fever", "hypertension", "shortness of breath",
    "atrial fibrillation", "pneumonia", "diabetes mellitus", "acute renal failure", "nausea",
    "abdominal pain", "anemia", "a productive cough", "headache", "a urinary tract infection",
    "congestive heart failure", "lower extremity edema", "hypotension", "his symptoms",
]
TESTS = [
    "CBC", "a chest x-ray", "an echocardiogram", "blood cultures", "creatinine", "an EKG",
    "a CT scan of the head", "hemoglobin", "urinalysis", "troponin", "potassium", "an MRI",
    "vital signs", "a bronchoscopy",
]
TREATMENTS = [
    "a bronchoalveolar lavage", "lasix", "aspirin", "intravenous fluids", "antibiotics",
    "heparin", "metoprolol", "insulin", "oxygen", "vancomycin", "a cardiac catheterization",
    "physical therapy", "coumadin",
]

_SLOTS = {"P": (ConceptType.PROBLEM, PROBLEMS), "T": (ConceptType.TEST, TESTS), "X": (ConceptType.TREATMENT, TREATMENTS)}

TEMPLATES = [
    "The patient had {P} on exertion , he had {X} performed , and {T} was unremarkable .",
    "Patient presented with {P} and {P} .",
    "{T} showed {P} .",
    "He was started on {X} for {P} .",
    "Admission {T} was notable for {P} .",
    "She received {X} and {X} overnight .",
    "No evidence of {P} on {T} .",
    "Discharge medications include {X} .",
    "{T} and {T} were within normal limits .",
    "Her {P} improved after {X} .",
    "Followed by cardiology as an outpatient .",
    "HISTORY OF PRESENT ILLNESS :",
    "Family history is noncontributory .",
    "Repeat {T} in two weeks .",
]


def _fill(template: str, rng: random.Random) -> tuple[list[str], list[tuple[int, int, ConceptType]]]:
    tokens: list[str] = []
    spans = []
    for piece in template.split():
        if piece.startswith("{") and piece.endswith("}"):
            ctype, vocab = _SLOTS[piece[1:-1]]
            words = rng.choice(vocab).split()
            spans.append((len(tokens), len(tokens) + len(words) - 1, ctype))
            tokens.extend(words)
        else:
            tokens.append(piece)
    return tokens, spans


def generate_record(doc_id: str, rng: random.Random) -> tuple[str, list[tuple[int, int, int, ConceptType]]]:
    """One record's text plus (line, start_token, end_token, type) concepts."""
    lines = [f"Record date : 2010-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}", ""]
    concepts = []
    for _ in range(rng.randint(6, 12)):
        tokens, spans = _fill(rng.choice(TEMPLATES), rng)
        line_no = len(lines) + 1
        concepts.extend((line_no, s, e, t) for s, e, t in spans)
        lines.append(" ".join(tokens))
    return "\n".join(lines) + "\n", concepts


def generate_corpus(n_docs: int, seed: int = 2010, prefix: str = "record") -> GoldCorpus:
    rng = random.Random(seed)
    txt, con = [], []
    for i in range(n_docs):
        doc_id = f"{prefix}-{i + 1:03d}"
        text, concepts = generate_record(doc_id, rng)
        txt.append((doc_id, text))
        con.append((doc_id, concepts))
    corpus = load_corpus(txt, [])
    gold = {}
    for doc_id, concepts in con:
        doc = corpus.document(doc_id)
        gold[doc_id] = frozenset(
            make_annotation(doc, TokenSpan(ln, s, ln, e), t, "gold") for ln, s, e, t in concepts
        )
    return GoldCorpus(corpus.documents, gold)


@dataclass(frozen=True)
class NoiseRates:
    drop: float = 0.25
    shift: float = 0.10
    flip: float = 0.05
    spurious: float = 0.10


def _shift(doc: Document, span: TokenSpan, rng: random.Random) -> TokenSpan:
    line_len = len(doc.line_tokens(span.start_line))
    moves = []
    for delta in (-1, 1):
        if 0 <= span.start_token + delta <= span.end_token:
            moves.append(TokenSpan(span.start_line, span.start_token + delta, span.end_line, span.end_token))
        if span.start_token <= span.end_token + delta < line_len:
            moves.append(TokenSpan(span.start_line, span.start_token, span.end_line, span.end_token + delta))
    return rng.choice(moves) if moves else span


def corrupt(doc: Document, gold: frozenset[Annotation], rng: random.Random, rates: NoiseRates, source: str) -> AnnotationSet:
    """Drop, shift, retype and pad ``gold`` to imitate one imperfect tagger.

    Assumes every gold span lies on a single line.
    """
    out = set()
    for a in sorted(gold, key=lambda a: (a.span, a.concept_type.value)):
        if rng.random() < rates.drop:
            continue
        span, ctype = a.span, a.concept_type
        if rng.random() < rates.shift:
            span = _shift(doc, span, rng)
        if rng.random() < rates.flip:
            ctype = rng.choice([t for t in ConceptType if t is not ctype])
        out.add(make_annotation(doc, span, ctype, source))
    lines = [i for i, toks in enumerate(doc.tokens, start=1) if toks]
    for _ in range(len(gold)):
        if rng.random() < rates.spurious:
            ln = rng.choice(lines)
            n = len(doc.line_tokens(ln))
            start = rng.randrange(n)
            end = min(n - 1, start + rng.randrange(3))
            out.add(make_annotation(doc, TokenSpan(ln, start, ln, end), rng.choice(list(ConceptType)), source))
    return AnnotationSet.of(doc.doc_id, source, out)


def noisy_outputs(
    corpus: GoldCorpus,
    n_annotators: int = 6,
    rates: NoiseRates = NoiseRates(),
    seed: int = 7,
) -> list[tuple[str, dict[str, AnnotationSet]]]:
    """Per-annotator outputs; annotator ``i`` draws from its own seeded stream."""
    result = []
    for i in range(n_annotators):
        ann_id = f"noisy-{i + 1}"
        rng = random.Random(seed * 1000 + i)
        per_doc = {
            doc.doc_id: corrupt(doc, corpus.gold[doc.doc_id], rng, rates, ann_id) for doc in corpus.documents
        }
        result.append((ann_id, per_doc))
    return result


def lexicon_text(fraction: float = 0.7, seed: int = 11) -> str:
    """A gazetteer lexicon covering part of the vocabulary, determiners stripped."""
    rng = random.Random(seed)
    lines = ["# synthetic lexicon"]
    for ctype, vocab in _SLOTS.values():
        for term in vocab:
            if rng.random() < fraction:
                words = term.split()
                if words[0].lower() in ("a", "an", "his") and len(words) > 1:
                    words = words[1:]
                lines.append(f"{' '.join(words).lower()}\t{ctype.value}")
    return "\n".join(lines) + "\n"


TOY_RECORDS = [
    "The patient had increasing dyspnea on exertion .\nCBC was unremarkable .\n",
    "He had a bronchoalveolar lavage performed .\nNo chest pain today .\n",
    "Dyspnea resolved after lasix .\nRepeat CBC tomorrow .\n",
    "She denies chest pain .\nGiven lasix and heparin .\n",
    "Troponin was negative .\nMild dyspnea persists .\n",
    "The patient was seen in clinic .\nShe was given heparin overnight .\n",
    "He reports chest pain at rest .\nTroponin and CBC were sent .\n",
    "The patient tolerated the procedure well .\nContinue lasix daily .\n",
    "The patient denies fever .\nThe patient was given lasix .\n",
    "He denies dyspnea and was sent home .\nCBC and troponin were normal .\n",
    "She had chest pain and was given heparin .\nThe patient was seen again .\n",
    "No fever was reported .\nThe patient had a bronchoalveolar lavage today .\n",
]
TOY_CONCEPTS = [
    'c="increasing dyspnea" 1:3 1:4||t="problem"\nc="cbc" 2:0 2:0||t="test"\n',
    'c="bronchoalveolar lavage" 1:3 1:4||t="treatment"\nc="chest pain" 2:1 2:2||t="problem"\n',
    'c="dyspnea" 1:0 1:0||t="problem"\nc="lasix" 1:3 1:3||t="treatment"\nc="cbc" 2:1 2:1||t="test"\n',
    'c="chest pain" 1:2 1:3||t="problem"\nc="lasix" 2:1 2:1||t="treatment"\nc="heparin" 2:3 2:3||t="treatment"\n',
    'c="troponin" 1:0 1:0||t="test"\nc="dyspnea" 2:1 2:1||t="problem"\n',
    'c="heparin" 2:3 2:3||t="treatment"\n',
    'c="chest pain" 1:2 1:3||t="problem"\nc="troponin" 2:0 2:0||t="test"\nc="cbc" 2:2 2:2||t="test"\n',
    'c="lasix" 2:1 2:1||t="treatment"\n',
    'c="fever" 1:3 1:3||t="problem"\nc="lasix" 2:4 2:4||t="treatment"\n',
    'c="dyspnea" 1:2 1:2||t="problem"\nc="cbc" 2:0 2:0||t="test"\nc="troponin" 2:2 2:2||t="test"\n',
    'c="chest pain" 1:2 1:3||t="problem"\nc="heparin" 1:7 1:7||t="treatment"\n',
    'c="fever" 1:1 1:1||t="problem"\nc="bronchoalveolar lavage" 2:4 2:5||t="treatment"\n',
]


def toy_corpus() -> GoldCorpus:
    """Small corpus whose concept words never occur outside concepts."""
    ids = [f"toy-{i + 1}" for i in range(len(TOY_RECORDS))]
    return load_corpus(list(zip(ids, TOY_RECORDS)), list(zip(ids, TOY_CONCEPTS)))


BUNDLED_DOCS = 60
BUNDLED_SEED = 2010


def write_corpus(corpus: GoldCorpus, records_dir: Path, concepts_dir: Path) -> None:
    records_dir.mkdir(parents=True, exist_ok=True)
    concepts_dir.mkdir(parents=True, exist_ok=True)
    for doc in corpus.documents:
        (records_dir / f"{doc.doc_id}.txt").write_text(doc.text, encoding="utf-8")
        (concepts_dir / f"{doc.doc_id}.con").write_text(serialize_con(corpus.gold[doc.doc_id], doc), encoding="utf-8")


def write_outputs(outputs: dict[str, AnnotationSet], corpus: GoldCorpus, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc in corpus.documents:
        s = outputs.get(doc.doc_id)
        (out_dir / f"{doc.doc_id}.con").write_text(serialize_con(s.annotations if s else (), doc), encoding="utf-8")


def write_bundle(root: Path) -> None:
    """Regenerate the packaged data directory."""
    write_corpus(generate_corpus(BUNDLED_DOCS, BUNDLED_SEED), root / "synthetic" / "records", root / "synthetic" / "gold")
    write_corpus(toy_corpus(), root / "toy" / "records", root / "toy" / "gold")
    (root / "lexicon.tsv").write_text(lexicon_text(), encoding="utf-8")


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("conceptvote").joinpath("data", *parts)))


def bundled_corpus() -> GoldCorpus:
    return load_corpus_dir(data_path("synthetic", "records"), data_path("synthetic", "gold"))


def bundled_toy_corpus() -> GoldCorpus:
    return load_corpus_dir(data_path("toy", "records"), data_path("toy", "gold"))
