"""Command line entry point: annotate, train, eval, sweep, serve, synth."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import synthetic
from .annotators import perceptron_train, save_model_file
from .corpus import (
    CONCEPT_SUFFIX,
    RECORD_SUFFIX,
    AnnotationSet,
    load_corpus_dir,
    parse_con,
    read_dir,
    read_text,
    tokenize,
)
from .errors import ConceptVoteError, ConfigError, ParseError
from .eval import categorize_errors, render_report, render_sweep_tsv, score_exact, sweep
from .ensemble import build_annotators, check_threshold, load_config, run_pipeline
from .service import AnnotationService, make_server, render_result

log = logging.getLogger("conceptvote")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _record_paths(inputs: list[str]) -> list[Path]:
    paths = []
    for raw in inputs:
        p = Path(raw)
        paths.extend(sorted(p.glob(f"*{RECORD_SUFFIX}")) if p.is_dir() else [p])
    return paths


def cmd_annotate(args) -> int:
    config_path = Path(args.config)
    config, _ = load_config(config_path)
    threshold = args.threshold if args.threshold is not None else config.threshold
    check_threshold(threshold, len(config.annotators))
    annotators = build_annotators(config, config_path.parent)
    out_dir = Path(args.output_dir) if args.output_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    suffix = CONCEPT_SUFFIX if args.format == "con" else ".json"
    for path in _record_paths(args.records):
        doc = tokenize(path.stem, read_text(path))
        result = run_pipeline(annotators, doc, threshold)
        text = render_result(result, doc, args.format)
        if out_dir:
            (out_dir / f"{doc.doc_id}{suffix}").write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus_dir(args.records, args.gold)
    model = perceptron_train(corpus, args.epochs, args.seed)
    save_model_file(model, args.model)
    log.info("trained on %d records: %d features", len(corpus.documents), model.feature_count)
    return 0


def _load_system(corpus, system_dir: str, source: str) -> dict[str, AnnotationSet]:
    out = {}
    for doc_id, con_text in read_dir(system_dir, CONCEPT_SUFFIX):
        if doc_id not in corpus.by_id:
            raise ConfigError(f"{system_dir}: {doc_id}{CONCEPT_SUFFIX} has no matching record")
        try:
            anns = parse_con(con_text, corpus.document(doc_id), source)
        except ParseError as e:
            raise e.with_doc(doc_id) from None
        out[doc_id] = AnnotationSet.of(doc_id, source, anns)
    return out


def cmd_eval(args) -> int:
    corpus = load_corpus_dir(args.records, args.gold)
    system = {a for s in _load_system(corpus, args.system, "system").values() for a in s.annotations}
    gold = corpus.all_gold()
    breakdown = categorize_errors(gold, system) if args.errors else None
    sys.stdout.write(render_report(score_exact(gold, system), breakdown, (), args.format))
    return 0


def _parse_thresholds(spec: str | None, n: int) -> list[int]:
    if not spec:
        return list(range(1, n + 1))
    out = []
    for part in spec.split(","):
        lo, sep, hi = part.partition("-")
        try:
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise ConfigError(f"bad threshold list {spec!r}") from None
    return out


def cmd_sweep(args) -> int:
    corpus = load_corpus_dir(args.records, args.gold)
    outputs = []
    for entry in args.system:
        ann_id, sep, directory = entry.partition("=")
        if not sep:
            ann_id, directory = Path(entry).name, entry
        outputs.append((ann_id, _load_system(corpus, directory, ann_id)))
    ids = [i for i, _ in outputs]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate system ids {ids}; name them with ID=DIR")
    rows = sweep(corpus, outputs, _parse_thresholds(args.thresholds, len(outputs)))
    text = render_sweep_tsv(rows) if args.format == "tsv" else render_report(None, None, rows, "json")
    sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    service = AnnotationService.from_config_file(args.config)
    server = make_server(service, args.host, args.port)
    host, port = server.server_address[:2]
    log.info("serving %d annotators on http://%s:%d", len(service.annotators), host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_synth(args) -> int:
    """Write a synthetic benchmark: records, gold, and noisy system outputs."""
    out = Path(args.out)
    corpus = synthetic.generate_corpus(args.docs, args.seed)
    synthetic.write_corpus(corpus, out / "records", out / "gold")
    for ann_id, per_doc in synthetic.noisy_outputs(corpus, args.annotators, seed=args.noise_seed):
        synthetic.write_outputs(per_doc, corpus, out / "systems" / ann_id)
    (out / "lexicon.tsv").write_text(synthetic.lexicon_text(), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="conceptvote", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("annotate", help="annotate record files with the configured ensemble")
    a.add_argument("records", nargs="+", help="record files or directories of *.txt")
    a.add_argument("--config", required=True)
    a.add_argument("--threshold", type=int)
    a.add_argument("--format", choices=("con", "json"), default="con")
    a.add_argument("--output-dir", help="write <stem>.con / <stem>.json here instead of stdout")
    a.set_defaults(func=cmd_annotate)

    t = sub.add_parser("train", help="train the perceptron tagger")
    t.add_argument("--records", required=True)
    t.add_argument("--gold", required=True)
    t.add_argument("--model", required=True, help="output model file")
    t.add_argument("--epochs", type=int, default=10)
    t.add_argument("--seed", type=int, default=1)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="exact-match scores of a system directory against gold")
    e.add_argument("--records", required=True)
    e.add_argument("--gold", required=True)
    e.add_argument("--system", required=True)
    e.add_argument("--format", choices=("tsv", "json"), default="tsv")
    e.add_argument("--errors", action="store_true", help="include the false-positive breakdown")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="precision/recall of the vote at each threshold")
    s.add_argument("--records", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--system", action="append", required=True, help="[ID=]DIR, repeat per annotator")
    s.add_argument("--thresholds", help="e.g. 1-6 or 2,3,5 (default: 1..number of systems)")
    s.add_argument("--format", choices=("tsv", "json"), default="tsv")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("serve", help="run the HTTP annotation service")
    v.add_argument("--config", required=True)
    v.add_argument("--host")
    v.add_argument("--port", type=int)
    v.set_defaults(func=cmd_serve)

    y = sub.add_parser("synth", help="write a synthetic benchmark corpus")
    y.add_argument("--out", required=True)
    y.add_argument("--docs", type=int, default=synthetic.BUNDLED_DOCS)
    y.add_argument("--seed", type=int, default=synthetic.BUNDLED_SEED)
    y.add_argument("--annotators", type=int, default=6)
    y.add_argument("--noise-seed", type=int, default=7)
    y.set_defaults(func=cmd_synth)
    return p


def _fail(code: str, message: str, status: int) -> int:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        return _fail("usage", str(e), 2)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConceptVoteError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return 1
    except OSError as e:
        return _fail("io_error", str(e), 1)


if __name__ == "__main__":
    sys.exit(main())
