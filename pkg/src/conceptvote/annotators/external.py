"""Wraps an external tagger that speaks the concept-file grammar over stdio."""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from pathlib import Path

from ..corpus import Annotation, Document, parse_con
from ..errors import AdapterTimeout, AnnotatorError, ConfigError, ParseError
from .base import Annotator


@dataclass(frozen=True)
class ExternalAdapterConfig:
    command: tuple[str, ...]
    timeout: float = 30.0
    cwd: Path | None = None

    def __post_init__(self):
        if not self.command:
            raise ConfigError("external adapter needs a command")
        if not self.timeout > 0:
            raise ConfigError(f"timeout must be positive, got {self.timeout}")


def external_annotate(config: ExternalAdapterConfig, doc: Document, source: str = "external") -> set[Annotation]:
    """Pipe the record text through the child process and parse its stdout.

    The child is killed if it outlives ``config.timeout`` seconds.
    """
    try:
        proc = subprocess.run(
            list(config.command),
            input=doc.text.encode("utf-8"),
            capture_output=True,
            timeout=config.timeout,
            cwd=config.cwd,
        )
    except subprocess.TimeoutExpired:
        raise AdapterTimeout(source, f"no result within {config.timeout}s; child terminated") from None
    except OSError as e:
        raise AnnotatorError(source, f"cannot start {config.command[0]!r}: {e}") from None
    stderr = proc.stderr.decode("utf-8", errors="replace")
    if proc.returncode != 0:
        raise AnnotatorError(source, f"exited with status {proc.returncode}: {stderr.strip()}", stderr)
    try:
        return parse_con(proc.stdout.decode("utf-8"), doc, source)
    except UnicodeDecodeError as e:
        raise AnnotatorError(source, f"output is not utf-8: {e}") from None
    except ParseError as e:
        raise AnnotatorError(source, f"bad output: {e}") from e


class ExternalAnnotator(Annotator):
    kind = "external"

    def __init__(self, annotator_id: str, config: ExternalAdapterConfig):
        super().__init__(annotator_id)
        self.config = config

    def _annotate(self, doc):
        return external_annotate(self.config, doc, self.id)
