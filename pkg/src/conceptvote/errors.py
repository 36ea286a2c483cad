"""Exception hierarchy shared by all conceptvote modules."""

from __future__ import annotations


class ConceptVoteError(Exception):
    """Base class; ``code`` is the machine-readable error kind."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ContractError(ConceptVoteError, ValueError):
    code = "contract_error"


class SpanError(ConceptVoteError, ValueError):
    """A span endpoint does not address a token of the document."""

    code = "span_error"


class ParseError(ConceptVoteError, ValueError):
    code = "parse_error"

    def __init__(self, message: str, line_no: int | None = None, doc_id: str | None = None):
        self.line_no = line_no
        self.doc_id = doc_id
        self.detail = message
        super().__init__(self._format())

    def _format(self) -> str:
        where = []
        if self.doc_id is not None:
            where.append(f"doc {self.doc_id!r}")
        if self.line_no is not None:
            where.append(f"line {self.line_no}")
        return f"{', '.join(where)}: {self.detail}" if where else self.detail

    def with_doc(self, doc_id: str) -> "ParseError":
        return type(self)(self.detail, self.line_no, doc_id)


class ValidationError(ParseError):
    """Well-formed input that is inconsistent with its document."""

    code = "validation_error"


class LoadError(ConceptVoteError):
    code = "load_error"


class EncodingError(ConceptVoteError, ValueError):
    """Gold annotations that a BIO tag sequence cannot represent."""

    code = "encoding_error"


class TrainingError(ConceptVoteError):
    code = "training_error"


class FormatError(ConceptVoteError):
    """Unreadable serialized model."""

    code = "format_error"


class ConfigError(ConceptVoteError, ValueError):
    code = "config_error"


class AnnotatorError(ConceptVoteError):
    """Failure inside one annotator, tagged with the annotator id."""

    code = "annotator_error"

    def __init__(self, annotator_id: str, message: str, stderr: str = ""):
        self.annotator_id = annotator_id
        self.stderr = stderr
        super().__init__(f"annotator {annotator_id!r}: {message}")


class AdapterTimeout(AnnotatorError):
    code = "adapter_timeout"


class PipelineError(ConceptVoteError):
    code = "pipeline_error"

    def __init__(self, message: str, failed: dict[str, str]):
        self.failed = dict(failed)
        super().__init__(message)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["failed_annotators"] = sorted(self.failed)
        return d
