"""Hypothesis strategies and random generators shared by the property tests."""

import random

from hypothesis import strategies as st

from conceptvote.corpus import Annotation, ConceptType, Document, TokenSpan, make_annotation, tokenize

WORDS = ["CBC", "dyspnea", "the", "patient", "had", "a", "chest", "pain", "x-ray", "Lasix", ".", ",", "was", "on", "é", "10mg"]

words = st.sampled_from(WORDS)
line_text = st.lists(words, max_size=8).map(" ".join)
separators = st.sampled_from([" ", "  ", "\t", " \t "])


@st.composite
def documents(draw, min_lines=0):
    lines = []
    for _ in range(draw(st.integers(min_lines, 5))):
        toks = draw(st.lists(words, max_size=8))
        sep = draw(separators)
        lines.append(draw(st.sampled_from(["", " "])) + sep.join(toks))
    ending = draw(st.sampled_from(["\n", "\r\n"]))
    return tokenize("d", ending.join(lines))


def all_spans(doc: Document, single_line: bool = False):
    positions = list(doc.iter_positions())
    for i, a in enumerate(positions):
        for b in positions[i:]:
            if single_line and a[0] != b[0]:
                continue
            yield TokenSpan(a[0], a[1], b[0], b[1])


@st.composite
def annotation_sets(draw, doc: Document, single_line=False, max_size=10):
    spans = list(all_spans(doc, single_line))
    if not spans:
        return set()
    picks = draw(st.lists(st.tuples(st.sampled_from(spans), st.sampled_from(list(ConceptType))), max_size=max_size))
    return {make_annotation(doc, s, t, "x") for s, t in picks}


@st.composite
def doc_with_annotations(draw, single_line=False):
    doc = draw(documents(min_lines=1))
    return doc, draw(annotation_sets(doc, single_line))


@st.composite
def non_overlapping(draw):
    """A document plus single-line gold annotations that do not overlap."""
    doc = draw(documents(min_lines=1))
    out = set()
    for line_no, toks in enumerate(doc.tokens, start=1):
        i = 0
        while i < len(toks):
            if draw(st.booleans()):
                j = draw(st.integers(i, len(toks) - 1))
                out.add(make_annotation(doc, TokenSpan(line_no, i, line_no, j), draw(st.sampled_from(list(ConceptType))), "gold"))
                i = j + 1
            else:
                i += 1
    return doc, out


def random_doc(rng: random.Random, doc_id: str = "d", max_lines: int = 4, max_tokens: int = 8) -> Document:
    lines = [
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, max_tokens))) for _ in range(rng.randint(1, max_lines))
    ]
    if not any(lines):
        lines[0] = "x"
    return tokenize(doc_id, "\n".join(lines))


def random_annotations(rng: random.Random, doc: Document, n: int, source: str = "x") -> set[Annotation]:
    positions = list(doc.iter_positions())
    out = set()
    for _ in range(n):
        a, b = sorted(rng.sample(positions, 2) if len(positions) > 1 else positions * 2)
        if rng.random() < 0.7:
            # mostly short single-line spans, like real concepts
            b = a if rng.random() < 0.5 else b
            if b[0] != a[0]:
                b = a
        out.add(make_annotation(doc, TokenSpan(*a, *b), rng.choice(list(ConceptType)), source))
    return out
