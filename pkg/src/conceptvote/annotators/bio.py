"""BIO tag encoding of token spans."""

from __future__ import annotations

from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

from ..corpus import Annotation, ConceptType, Document, TokenSpan, make_annotation, sort_key
from ..errors import ContractError, EncodingError


class BIOTag(str, Enum):
    # declaration order is the decoding tie-break order
    O = "O"
    B_PROBLEM = "B-problem"
    I_PROBLEM = "I-problem"
    B_TEST = "B-test"
    I_TEST = "I-test"
    B_TREATMENT = "B-treatment"
    I_TREATMENT = "I-treatment"

    def __str__(self) -> str:
        return self.value

    @property
    def prefix(self) -> str:
        return self.value[0]

    @property
    def concept_type(self) -> ConceptType | None:
        return None if self is BIOTag.O else ConceptType(self.value[2:])

    @classmethod
    def begin(cls, ctype: ConceptType) -> "BIOTag":
        return cls(f"B-{ConceptType(ctype).value}")

    @classmethod
    def inside(cls, ctype: ConceptType) -> "BIOTag":
        return cls(f"I-{ConceptType(ctype).value}")


TAGS: tuple[BIOTag, ...] = tuple(BIOTag)


def bio_encode(doc: Document, gold: Iterable[Annotation]) -> list[BIOTag]:
    """One tag per token in document order.

    A span that crosses a line break is tagged as written (I- continues on
    the next line); :func:`bio_decode` will split it at the line break.
    """
    anns = sorted(gold, key=sort_key)
    for a, b in combinations(anns, 2):
        if a.span.overlaps(b.span):
            raise EncodingError(
                f"overlapping annotations in {doc.doc_id!r}: "
                f"{a.span} {a.concept_type.value} and {b.span} {b.concept_type.value}"
            )
    tags = [BIOTag.O] * doc.num_tokens
    for a in anns:
        lo = doc.global_index(*a.span.start)
        hi = doc.global_index(*a.span.end)
        tags[lo] = BIOTag.begin(a.concept_type)
        for i in range(lo + 1, hi + 1):
            tags[i] = BIOTag.inside(a.concept_type)
    return tags


def bio_decode(doc: Document, tags: Sequence[BIOTag], source: str = "") -> set[Annotation]:
    """Turn B-t (I-t)* runs into annotations.

    An I-t without a compatible predecessor starts a new run, and runs
    always end at a line break.
    """
    if len(tags) != doc.num_tokens:
        raise ContractError(f"{len(tags)} tags for {doc.num_tokens} tokens")
    out: set[Annotation] = set()
    k = 0
    for line_no, toks in enumerate(doc.tokens, start=1):
        start = None
        current = None
        for i in range(len(toks)):
            tag = BIOTag(tags[k])
            k += 1
            continues = tag.prefix == "I" and tag.concept_type is current
            if continues:
                continue
            if current is not None:
                out.add(make_annotation(doc, TokenSpan(line_no, start, line_no, i - 1), current, source))
            current = tag.concept_type
            start = i
        if current is not None:
            out.add(make_annotation(doc, TokenSpan(line_no, start, line_no, len(toks) - 1), current, source))
    return out
