"""Averaged perceptron BIO tagger with greedy left-to-right decoding.

Model file layout (all integers big-endian)::

    b"ENSM"  u32 version  u32 epochs
    u32 n_labels   n_labels x (u16 len, utf-8 label)
    u32 n_weights  n_weights x (u32 len, utf-8 feature, u8 label index, f64 weight)

Weights are sorted by (feature, label index) and zero weights are omitted.
"""

from __future__ import annotations

import logging
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import Annotation, Document, GoldCorpus
from ..errors import FormatError, TrainingError
from .base import Annotator
from .bio import TAGS, BIOTag, bio_decode, bio_encode

log = logging.getLogger(__name__)

MAGIC = b"ENSM"
FORMAT_VERSION = 1
BOUNDARY = "<BOUNDARY>"

_N = len(TAGS)
_TAG_INDEX = {t: i for i, t in enumerate(TAGS)}


def word_shape(word: str) -> str:
    out = []
    for ch in word:
        if ch.isupper():
            out.append("A")
        elif ch.islower():
            out.append("a")
        elif ch.isdigit():
            out.append("9")
        else:
            out.append("_")
    return "".join(out)


def _token_features(words: list[str], i: int) -> list[str]:
    word = words[i]
    low = word.lower()
    prev_w = words[i - 1].lower() if i > 0 else BOUNDARY
    next_w = words[i + 1].lower() if i + 1 < len(words) else BOUNDARY
    return [
        f"w={low}",
        f"shape={word_shape(word)}",
        f"pre3={low[:3]}",
        f"suf3={low[-3:]}",
        f"prev_w={prev_w}",
        f"next_w={next_w}",
    ]


def _static_features(doc: Document) -> list[list[str]]:
    feats = []
    for toks in doc.tokens:
        words = [t for t, _ in toks]
        feats.extend(_token_features(words, i) for i in range(len(words)))
    return feats


def extract_features(doc: Document, position: int, prev_tag: BIOTag) -> list[str]:
    """Features of the token at global index ``position``.

    The context window stops at line edges, where the neighbour word is
    replaced by ``BOUNDARY``.
    """
    line, tok = doc.position(position)
    words = [t for t, _ in doc.line_tokens(line)]
    return _token_features(words, tok) + [f"prev_tag={BIOTag(prev_tag).value}", "bias"]


def _dynamic(prev: BIOTag) -> list[str]:
    return [f"prev_tag={prev.value}", "bias"]


@dataclass(frozen=True)
class PerceptronModel:
    weights: dict[str, tuple[float, ...]] = field(default_factory=dict)
    epochs: int = 0
    labels: tuple[BIOTag, ...] = TAGS
    version: int = FORMAT_VERSION
    # training mistakes per epoch; not serialized
    mistakes: tuple[int, ...] = field(default=(), compare=False)

    @property
    def feature_count(self) -> int:
        return len(self.weights)

    def best_tag(self, features: list[str]) -> BIOTag:
        return TAGS[_argmax(_score(self.weights, features))]


def _score(weights, features: list[str]) -> list[float]:
    scores = [0.0] * _N
    for f in features:
        w = weights.get(f)
        if w is not None:
            for j in range(_N):
                scores[j] += w[j]
    return scores


def _argmax(scores: list[float]) -> int:
    # first maximum wins, so ties go to the earliest tag (O)
    best = 0
    for j in range(1, _N):
        if scores[j] > scores[best]:
            best = j
    return best


def perceptron_train(corpus: GoldCorpus, epochs: int, seed: int) -> PerceptronModel:
    """Train with per-mistake updates and gold previous tags.

    Weights are averaged over every token step of training.
    """
    if epochs < 1:
        raise TrainingError(f"epochs must be >= 1, got {epochs}")
    if not corpus.documents:
        raise TrainingError("cannot train on an empty corpus")
    data = []
    for doc in corpus.documents:
        tags = bio_encode(doc, corpus.gold.get(doc.doc_id, ()))
        data.append((doc, _static_features(doc), [_TAG_INDEX[t] for t in tags]))
    if not any(d.num_tokens for d, _, _ in data):
        raise TrainingError("corpus contains no tokens")

    weights: dict[str, list[float]] = {}
    totals: dict[str, list[float]] = {}
    stamps: dict[str, list[int]] = {}
    step = 0

    def bump(f: str, j: int, delta: float) -> None:
        w = weights.get(f)
        if w is None:
            w = weights[f] = [0.0] * _N
            totals[f] = [0.0] * _N
            stamps[f] = [0] * _N
        totals[f][j] += (step - stamps[f][j]) * w[j]
        stamps[f][j] = step
        w[j] += delta

    rng = random.Random(seed)
    order = list(range(len(data)))
    mistakes = []
    for epoch in range(epochs):
        rng.shuffle(order)
        wrong = 0
        for d in order:
            doc, static, gold = data[d]
            k = 0
            for toks in doc.tokens:
                prev = BIOTag.O
                for _tok in toks:
                    feats = static[k] + _dynamic(prev)
                    guess = _argmax(_score(weights, feats))
                    truth = gold[k]
                    if guess != truth:
                        wrong += 1
                        for f in feats:
                            bump(f, truth, 1.0)
                            bump(f, guess, -1.0)
                    step += 1
                    prev = TAGS[truth]
                    k += 1
        mistakes.append(wrong)
        log.debug("epoch %d: %d mistakes", epoch + 1, wrong)

    averaged: dict[str, tuple[float, ...]] = {}
    for f, w in weights.items():
        avg = tuple((totals[f][j] + (step - stamps[f][j]) * w[j]) / step for j in range(_N))
        if any(avg):
            averaged[f] = avg
    return PerceptronModel(averaged, epochs, mistakes=tuple(mistakes))


def predict_tags(model: PerceptronModel, doc: Document) -> list[BIOTag]:
    static = _static_features(doc)
    tags = []
    k = 0
    for toks in doc.tokens:
        prev = BIOTag.O
        for _tok in toks:
            prev = model.best_tag(static[k] + _dynamic(prev))
            tags.append(prev)
            k += 1
    return tags


def perceptron_predict(model: PerceptronModel, doc: Document, source: str = "perceptron") -> set[Annotation]:
    return bio_decode(doc, predict_tags(model, doc), source)


def save_model(model: PerceptronModel) -> bytes:
    out = [MAGIC, struct.pack(">II", model.version, model.epochs)]
    out.append(struct.pack(">I", len(model.labels)))
    for label in model.labels:
        raw = label.value.encode("utf-8")
        out.append(struct.pack(">H", len(raw)) + raw)
    triples = [
        (f, j, weight)
        for f in sorted(model.weights)
        for j, weight in enumerate(model.weights[f])
        if weight != 0.0
    ]
    out.append(struct.pack(">I", len(triples)))
    for f, j, weight in triples:
        raw = f.encode("utf-8")
        out.append(struct.pack(">I", len(raw)) + raw + struct.pack(">Bd", j, weight))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated model: need {n} bytes at offset {self.pos}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def text(self, n: int) -> str:
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"invalid utf-8 in model: {e}") from None


def load_model(data: bytes) -> PerceptronModel:
    r = _Reader(bytes(data))
    if r.take(4) != MAGIC:
        raise FormatError("not a model file (bad magic)")
    version, epochs = r.unpack(">II")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model version {version}")
    (n_labels,) = r.unpack(">I")
    labels = tuple(r.text(r.unpack(">H")[0]) for _ in range(n_labels))
    if labels != tuple(t.value for t in TAGS):
        raise FormatError(f"unexpected label set {labels}")
    (n_weights,) = r.unpack(">I")
    weights: dict[str, list[float]] = {}
    for _ in range(n_weights):
        f = r.text(r.unpack(">I")[0])
        j, weight = r.unpack(">Bd")
        if j >= _N:
            raise FormatError(f"label index {j} out of range")
        weights.setdefault(f, [0.0] * _N)[j] = weight
    if r.pos != len(r.data):
        raise FormatError(f"{len(r.data) - r.pos} trailing bytes after model")
    return PerceptronModel({f: tuple(w) for f, w in weights.items()}, epochs)


def save_model_file(model: PerceptronModel, path: Path | str) -> None:
    Path(path).write_bytes(save_model(model))


def load_model_file(path: Path | str) -> PerceptronModel:
    return load_model(Path(path).read_bytes())


class PerceptronAnnotator(Annotator):
    kind = "perceptron"

    def __init__(self, annotator_id: str, model: PerceptronModel):
        super().__init__(annotator_id)
        self.model = model

    def _annotate(self, doc):
        return perceptron_predict(self.model, doc, self.id)
