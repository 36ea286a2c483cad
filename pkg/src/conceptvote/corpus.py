"""Documents, token spans and the i2b2 concept file format.

A record is split into lines, and each line into whitespace tokens.  Every
span in the system is expressed in that coordinate system: 1-based line
numbers and 0-based token indices, both endpoints inclusive.

Concept files hold one annotation per line::

    c="increasing dyspnea" 1:3 1:4||t="problem"
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import ContractError, LoadError, ParseError, SpanError, ValidationError

GOLD_SOURCE = "gold"
RECORD_SUFFIX = ".txt"
CONCEPT_SUFFIX = ".con"

_LINE_BREAK = re.compile(r"\r\n|\r|\n")
_TOKEN = re.compile(r"\S+")
_CON_LINE = re.compile(r'^c="(.*)" (\d+):(\d+) (\d+):(\d+)\|\|t="([^"]*)"$')


class ConceptType(str, Enum):
    PROBLEM = "problem"
    TEST = "test"
    TREATMENT = "treatment"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, value: str) -> "ConceptType":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown concept type {value!r}") from None


@dataclass(frozen=True)
class Document:
    """A tokenized record.

    ``tokens[i]`` holds ``(text, char_offset)`` pairs for line ``i + 1``.
    """

    doc_id: str
    lines: tuple[str, ...]
    tokens: tuple[tuple[tuple[str, int], ...], ...]

    @property
    def num_lines(self) -> int:
        return len(self.lines)

    def line_tokens(self, line: int) -> tuple[tuple[str, int], ...]:
        return self.tokens[line - 1]

    @cached_property
    def _line_starts(self) -> tuple[int, ...]:
        starts, n = [], 0
        for toks in self.tokens:
            starts.append(n)
            n += len(toks)
        return tuple(starts)

    @property
    def num_tokens(self) -> int:
        return sum(len(t) for t in self.tokens)

    def global_index(self, line: int, token: int) -> int:
        return self._line_starts[line - 1] + token

    def position(self, index: int) -> tuple[int, int]:
        """Inverse of :meth:`global_index`."""
        if not 0 <= index < self.num_tokens:
            raise SpanError(f"token index {index} out of range")
        # empty lines share their start with the next line; bisect_right skips them
        line = bisect_right(self._line_starts, index)
        return line, index - self._line_starts[line - 1]

    def iter_positions(self) -> Iterator[tuple[int, int]]:
        for line_no, toks in enumerate(self.tokens, start=1):
            for i in range(len(toks)):
                yield line_no, i

    def has_token(self, line: int, token: int) -> bool:
        return 1 <= line <= len(self.tokens) and 0 <= token < len(self.tokens[line - 1])

    @property
    def text(self) -> str:
        """The record text with normalized LF line endings."""
        return "".join(line + "\n" for line in self.lines)


@dataclass(frozen=True, order=True)
class TokenSpan:
    start_line: int
    start_token: int
    end_line: int
    end_token: int

    def __post_init__(self):
        if (self.start_line, self.start_token) > (self.end_line, self.end_token):
            raise SpanError(f"span start {self.start} is after end {self.end}")

    @property
    def start(self) -> tuple[int, int]:
        return (self.start_line, self.start_token)

    @property
    def end(self) -> tuple[int, int]:
        return (self.end_line, self.end_token)

    def overlaps(self, other: "TokenSpan") -> bool:
        return self.start <= other.end and other.start <= self.end

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_token} {self.end_line}:{self.end_token}"


@dataclass(frozen=True)
class Annotation:
    """A typed span. Equality and hashing use only (doc_id, span, type)."""

    doc_id: str
    span: TokenSpan
    concept_type: ConceptType
    text: str = field(default="", compare=False)
    source: str = field(default="", compare=False)

    @property
    def key(self) -> tuple[str, TokenSpan, ConceptType]:
        return (self.doc_id, self.span, self.concept_type)


@dataclass(frozen=True)
class AnnotationSet:
    """Everything one annotator said about one document."""

    doc_id: str
    source: str
    annotations: frozenset[Annotation] = frozenset()

    def __post_init__(self):
        stray = {a.doc_id for a in self.annotations} - {self.doc_id}
        if stray:
            raise ContractError(
                f"annotation set for {self.doc_id!r} contains annotations of {sorted(stray)}"
            )

    @classmethod
    def of(cls, doc_id: str, source: str, annotations: Iterable[Annotation] = ()) -> "AnnotationSet":
        return cls(doc_id, source, frozenset(annotations))

    def __len__(self) -> int:
        return len(self.annotations)

    def __iter__(self) -> Iterator[Annotation]:
        return iter(sorted(self.annotations, key=sort_key))

    def __contains__(self, item) -> bool:
        return item in self.annotations


@dataclass(frozen=True)
class GoldCorpus:
    documents: tuple[Document, ...]
    gold: dict[str, frozenset[Annotation]]

    def document(self, doc_id: str) -> Document:
        return self.by_id[doc_id]

    @cached_property
    def by_id(self) -> dict[str, Document]:
        return {d.doc_id: d for d in self.documents}

    def all_gold(self) -> set[Annotation]:
        return {a for anns in self.gold.values() for a in anns}


def sort_key(a: Annotation):
    return (a.doc_id, a.span, a.concept_type.value)


def tokenize(doc_id: str, text: str) -> Document:
    """Split ``text`` into lines (LF, CRLF or CR) and whitespace tokens.

    A single trailing line break does not start a new line, so ``"a\\n"``
    and ``"a"`` have one line each.
    """
    if not text:
        return Document(doc_id, (), ())
    lines = _LINE_BREAK.split(text)
    if lines[-1] == "":
        lines.pop()
    tokens = tuple(tuple((m.group(), m.start()) for m in _TOKEN.finditer(line)) for line in lines)
    return Document(doc_id, tuple(lines), tokens)


def check_span(doc: Document, span: TokenSpan) -> None:
    for name, (line, tok) in (("start", span.start), ("end", span.end)):
        if not doc.has_token(line, tok):
            raise SpanError(f"{name} {line}:{tok} does not address a token of {doc.doc_id!r}")


def span_tokens(doc: Document, span: TokenSpan) -> list[str]:
    check_span(doc, span)
    out = []
    for line in range(span.start_line, span.end_line + 1):
        toks = doc.line_tokens(line)
        lo = span.start_token if line == span.start_line else 0
        hi = span.end_token if line == span.end_line else len(toks) - 1
        out.extend(t for t, _ in toks[lo : hi + 1])
    return out


def span_text(doc: Document, span: TokenSpan) -> str:
    """Covered tokens, single-space joined and lowercased."""
    return " ".join(span_tokens(doc, span)).lower()


def make_annotation(doc: Document, span: TokenSpan, concept_type: ConceptType, source: str) -> Annotation:
    return Annotation(doc.doc_id, span, ConceptType(concept_type), span_text(doc, span), source)


def parse_con(con_text: str, doc: Document, source: str = GOLD_SOURCE) -> set[Annotation]:
    """Parse concept-file text strictly; the first bad line raises.

    The quoted text field is checked for syntax only. Surface text is rebuilt
    from ``doc`` so spans stay authoritative.
    """
    result: set[Annotation] = set()
    for line_no, raw in enumerate(_LINE_BREAK.split(con_text), start=1):
        line = raw.strip()
        if not line:
            continue
        m = _CON_LINE.match(line)
        if m is None:
            raise ParseError(f"malformed concept line {line!r}", line_no)
        try:
            ctype = ConceptType.parse(m.group(6))
        except ValueError as e:
            raise ParseError(str(e), line_no) from None
        sl, st, el, et = (int(m.group(i)) for i in range(2, 6))
        try:
            span = TokenSpan(sl, st, el, et)
            result.add(make_annotation(doc, span, ctype, source))
        except SpanError as e:
            raise ValidationError(str(e), line_no) from None
    return result


def format_con_line(a: Annotation) -> str:
    return f'c="{a.text.lower()}" {a.span}||t="{a.concept_type.value}"'


def serialize_con(annotations: Iterable[Annotation], doc: Document) -> str:
    lines = []
    for a in sorted(set(annotations), key=sort_key):
        if a.doc_id != doc.doc_id:
            raise ValidationError(f"annotation belongs to {a.doc_id!r}, not {doc.doc_id!r}")
        try:
            text = span_text(doc, a.span)
        except SpanError as e:
            raise ValidationError(str(e)) from None
        lines.append(format_con_line(Annotation(a.doc_id, a.span, a.concept_type, text)) + "\n")
    return "".join(lines)


def load_corpus(
    txt_entries: Sequence[tuple[str, str]],
    con_entries: Sequence[tuple[str, str]],
) -> GoldCorpus:
    docs: dict[str, Document] = {}
    for doc_id, text in txt_entries:
        if doc_id in docs:
            raise LoadError(f"duplicate record {doc_id!r}")
        docs[doc_id] = tokenize(doc_id, text)
    gold: dict[str, frozenset[Annotation]] = {d: frozenset() for d in docs}
    seen: set[str] = set()
    for doc_id, con_text in con_entries:
        if doc_id not in docs:
            raise LoadError(f"concept file {doc_id!r} has no matching record")
        if doc_id in seen:
            raise LoadError(f"duplicate concept file {doc_id!r}")
        seen.add(doc_id)
        try:
            gold[doc_id] = frozenset(parse_con(con_text, docs[doc_id]))
        except ParseError as e:
            raise e.with_doc(doc_id) from None
    return GoldCorpus(tuple(docs.values()), gold)


def read_text(path: Path) -> str:
    # newline="" keeps CR/CRLF visible to tokenize
    with open(path, encoding="utf-8", newline="") as f:
        return f.read()


def read_dir(directory: Path | str, suffix: str) -> list[tuple[str, str]]:
    directory = Path(directory)
    if not directory.is_dir():
        raise LoadError(f"not a directory: {directory}")
    return [(p.stem, read_text(p)) for p in sorted(directory.glob(f"*{suffix}"))]


def load_corpus_dir(records_dir: Path | str, concepts_dir: Path | str | None) -> GoldCorpus:
    """Load ``<stem>.txt`` records paired with ``<stem>.con`` concept files."""
    txt = read_dir(records_dir, RECORD_SUFFIX)
    con = read_dir(concepts_dir, CONCEPT_SUFFIX) if concepts_dir is not None else []
    return load_corpus(txt, con)
