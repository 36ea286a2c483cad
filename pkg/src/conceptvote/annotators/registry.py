"""Descriptor records and construction of annotators from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..errors import ConfigError
from .base import Annotator
from .external import ExternalAdapterConfig, ExternalAnnotator
from .gazetteer import GazetteerAnnotator, load_lexicon_file
from .perceptron import PerceptronAnnotator, load_model_file

KINDS = ("gazetteer", "perceptron", "external")


@dataclass(frozen=True)
class AnnotatorDescriptor:
    id: str
    kind: str
    config: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ConfigError("annotator id must be non-empty")
        if self.kind not in KINDS:
            raise ConfigError(f"annotator {self.id!r}: unknown kind {self.kind!r}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AnnotatorDescriptor":
        if not isinstance(d, Mapping):
            raise ConfigError(f"annotator descriptor must be an object, got {d!r}")
        try:
            rest = {k: v for k, v in d.items() if k not in ("id", "kind")}
            return cls(str(d["id"]), str(d["kind"]), rest)
        except KeyError as e:
            raise ConfigError(f"annotator descriptor missing {e.args[0]!r}") from None


def _path(desc: AnnotatorDescriptor, key: str, base_dir: Path) -> Path:
    value = desc.config.get(key)
    if not value:
        raise ConfigError(f"annotator {desc.id!r} ({desc.kind}) needs {key!r}")
    p = Path(value)
    return p if p.is_absolute() else base_dir / p


def build_annotator(desc: AnnotatorDescriptor, base_dir: Path | str = ".") -> Annotator:
    """Load the resources named by ``desc``; relative paths resolve against ``base_dir``."""
    base_dir = Path(base_dir)
    if desc.kind == "gazetteer":
        return GazetteerAnnotator(desc.id, load_lexicon_file(_path(desc, "lexicon", base_dir)))
    if desc.kind == "perceptron":
        return PerceptronAnnotator(desc.id, load_model_file(_path(desc, "model", base_dir)))
    command = desc.config.get("command")
    if isinstance(command, str) or not command:
        raise ConfigError(f"annotator {desc.id!r}: command must be a non-empty list of strings")
    cwd = desc.config.get("cwd")
    cfg = ExternalAdapterConfig(
        tuple(str(c) for c in command),
        float(desc.config.get("timeout", 30.0)),
        (base_dir / cwd) if cwd else base_dir,
    )
    return ExternalAnnotator(desc.id, cfg)
