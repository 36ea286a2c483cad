"""The uniform annotator contract."""

from __future__ import annotations

import abc

from ..corpus import Annotation, AnnotationSet, Document, check_span, span_text
from ..errors import AnnotatorError, ConceptVoteError, SpanError


class Annotator(abc.ABC):
    """Maps a Document to a set of typed spans.

    Subclasses implement :meth:`_annotate`; callers go through
    :func:`annotate`, which enforces the output contract.
    """

    kind: str = "annotator"

    def __init__(self, annotator_id: str):
        self.id = annotator_id

    @abc.abstractmethod
    def _annotate(self, doc: Document) -> set[Annotation]: ...

    def annotate(self, doc: Document) -> AnnotationSet:
        return annotate(self, doc)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(id={self.id!r})"


def annotate(annotator: Annotator, doc: Document) -> AnnotationSet:
    """Run ``annotator`` on ``doc`` and return a validated, deduplicated set.

    Any failure is re-raised as :class:`AnnotatorError` carrying the id.
    """
    if doc.num_tokens == 0:
        return AnnotationSet.of(doc.doc_id, annotator.id)
    try:
        raw = annotator._annotate(doc)
        out = []
        for a in raw:
            if a.doc_id != doc.doc_id:
                raise SpanError(f"annotation for {a.doc_id!r} returned for {doc.doc_id!r}")
            check_span(doc, a.span)
            out.append(Annotation(doc.doc_id, a.span, a.concept_type, span_text(doc, a.span), annotator.id))
    except AnnotatorError as e:
        if e.annotator_id == annotator.id:
            raise
        raise AnnotatorError(annotator.id, str(e), e.stderr) from e
    except ConceptVoteError as e:
        raise AnnotatorError(annotator.id, str(e)) from e
    return AnnotationSet.of(doc.doc_id, annotator.id, out)
