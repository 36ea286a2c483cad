"""Dictionary lookup annotator with greedy longest match."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import Annotation, ConceptType, Document, TokenSpan, make_annotation, read_text
from ..errors import LoadError
from .base import Annotator


def normalize_term(term: str) -> str:
    return " ".join(term.lower().split())


@dataclass(frozen=True)
class GazetteerLexicon:
    entries: dict[str, ConceptType] = field(default_factory=dict)
    max_len: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, tokens: tuple[str, ...]) -> ConceptType | None:
        return self.entries.get(" ".join(tokens))


def load_lexicon(entries_text: str) -> GazetteerLexicon:
    """Parse ``term<TAB>type`` lines; ``#`` lines and blank lines are skipped."""
    entries: dict[str, ConceptType] = {}
    for line_no, line in enumerate(entries_text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        term, sep, type_name = line.rpartition("\t")
        if not sep:
            raise LoadError(f"lexicon line {line_no}: expected term<TAB>type")
        key = normalize_term(term)
        if not key:
            raise LoadError(f"lexicon line {line_no}: empty term")
        try:
            ctype = ConceptType.parse(type_name.strip())
        except ValueError as e:
            raise LoadError(f"lexicon line {line_no}: {e}") from None
        prev = entries.get(key)
        if prev is not None and prev is not ctype:
            raise LoadError(
                f"lexicon line {line_no}: term {key!r} is {ctype.value} but was already {prev.value}"
            )
        entries[key] = ctype
    max_len = max((len(k.split(" ")) for k in entries), default=0)
    return GazetteerLexicon(entries, max_len)


def load_lexicon_file(path: Path | str) -> GazetteerLexicon:
    return load_lexicon(read_text(Path(path)))


def gazetteer_annotate(lexicon: GazetteerLexicon, doc: Document, source: str = "gazetteer") -> set[Annotation]:
    found = set()
    if not lexicon.entries:
        return found
    for line_no, toks in enumerate(doc.tokens, start=1):
        words = [t.lower() for t, _ in toks]
        i = 0
        while i < len(words):
            for n in range(min(lexicon.max_len, len(words) - i), 0, -1):
                ctype = lexicon.entries.get(" ".join(words[i : i + n]))
                if ctype is not None:
                    found.add(make_annotation(doc, TokenSpan(line_no, i, line_no, i + n - 1), ctype, source))
                    i += n
                    break
            else:
                i += 1
    return found


class GazetteerAnnotator(Annotator):
    kind = "gazetteer"

    def __init__(self, annotator_id: str, lexicon: GazetteerLexicon):
        super().__init__(annotator_id)
        self.lexicon = lexicon

    def _annotate(self, doc):
        return gazetteer_annotate(self.lexicon, doc, self.id)
