"""End-to-end acceptance checks, one test per criterion.

Every random instance comes from a fixed seed so the counts are reproducible.
Each test prints a one-line verdict; the session summary lists them all.
"""

import json
import random
import time

import pytest

from conceptvote import synthetic
from conceptvote.annotators import (
    GazetteerAnnotator,
    annotate,
    gazetteer_annotate,
    load_lexicon,
    load_model,
    perceptron_train,
    save_model,
)
from conceptvote.annotators.bio import bio_encode
from conceptvote.annotators.perceptron import predict_tags
from conceptvote.cli import main
from conceptvote.corpus import AnnotationSet, ConceptType, parse_con, serialize_con, tokenize
from conceptvote.ensemble import combine, tally_votes
from conceptvote.eval import CATEGORIES, categorize_errors, score_exact, sweep
from conceptvote.service import AnnotationService

import oracles
from conftest import http, running_server
from strategies import random_annotations, random_doc


def verdict(label: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


def vote_instances(n: int, seed: int = 1):
    rng = random.Random(seed)
    for _ in range(n):
        doc = random_doc(rng, "r", max_lines=4, max_tokens=10)
        sets = [
            AnnotationSet.of("r", f"a{i}", random_annotations(rng, doc, rng.randint(0, 20), f"a{i}"))
            for i in range(rng.randint(1, 6))
        ]
        yield sets


def keys(aset):
    return {(a.span, a.concept_type) for a in aset.annotations}


@pytest.mark.acceptance("1. voting oracle equivalence")
def test_voting_matches_oracle():
    start = time.perf_counter()
    instances = violations = 0
    for sets in vote_instances(1000):
        instances += 1
        tally = tally_votes(sets)
        for k in range(1, len(sets) + 1):
            violations += keys(combine(tally, k)) != oracles.vote(sets, k)
    elapsed = time.perf_counter() - start
    verdict("1", violations == 0 and elapsed < 10, f"{instances} instances, {violations} mismatches, {elapsed:.2f}s")
    assert instances >= 1000
    assert violations == 0
    assert elapsed < 10


@pytest.mark.acceptance("2. threshold identities and anti-monotonicity")
def test_threshold_identities():
    violations = checks = 0
    for sets in vote_instances(1000):
        tally = tally_votes(sets)
        members = [keys(s) for s in sets]
        out = {k: keys(combine(tally, k)) for k in range(1, len(sets) + 1)}
        violations += out[1] != set().union(*members)
        violations += out[len(sets)] != set.intersection(*members)
        violations += sum(not out[k + 1] <= out[k] for k in range(1, len(sets)))
        checks += 2 + len(sets) - 1
    verdict("2", violations == 0, f"{checks} checks, {violations} violations")
    assert violations == 0


@pytest.mark.acceptance("3. concept format round trip")
def test_format_round_trip():
    cases = []
    corpus = synthetic.bundled_corpus()
    cases += [(doc, set(corpus.gold[doc.doc_id])) for doc in corpus.documents]
    rng = random.Random(3)
    for _ in range(500):
        doc = random_doc(rng, "d", max_lines=5, max_tokens=10)
        cases.append((doc, random_annotations(rng, doc, rng.randint(0, 15), "gold")))
    violations = 0
    for doc, anns in cases:
        text = serialize_con(anns, doc)
        violations += parse_con(text, doc) != anns
        # same set built in another insertion order must give the same bytes
        violations += serialize_con(set(reversed(sorted(anns, key=str))), doc).encode() != text.encode()
    verdict("3", violations == 0, f"{len(cases)} sets, {violations} violations")
    assert len(cases) == len(corpus.documents) + 500
    assert violations == 0


@pytest.mark.acceptance("4. scorer correctness")
def test_scorer_matches_nested_loops():
    rng = random.Random(4)
    mismatches = partition_violations = 0
    for _ in range(1000):
        docs, gold, system = {}, [], []
        for i in range(rng.randint(1, 3)):
            d = random_doc(rng, f"r{i}")
            docs[d.doc_id] = d
            g = random_annotations(rng, d, rng.randint(0, 8), "gold")
            gold += g
            system += [a for a in g if rng.random() < 0.5] + list(random_annotations(rng, d, rng.randint(0, 8), "sys"))
        r = score_exact(gold, system)
        mismatches += (r.tp, r.fp, r.fn) != oracles.score(gold, system)
        b = categorize_errors(gold, system)
        partition_violations += sum(getattr(b, c) for c in CATEGORIES) != r.fp
        mismatches += {c: getattr(b, c) for c in CATEGORIES} != oracles.categorize(docs, gold, system)
    verdict("4", mismatches == partition_violations == 0, f"1000 pairs, {mismatches} mismatches, {partition_violations} partition violations")
    assert mismatches == 0
    assert partition_violations == 0


@pytest.mark.acceptance("5. synthetic threshold sweep")
def test_synthetic_sweep():
    start = time.perf_counter()
    corpus = synthetic.bundled_corpus()
    outputs = synthetic.noisy_outputs(corpus, 6, synthetic.NoiseRates(0.25, 0.10, 0.05, 0.10), seed=7)
    rows = sweep(corpus, outputs, range(1, 7))
    gold = corpus.all_gold()
    individual = [score_exact(gold, {a for s in per_doc.values() for a in s.annotations}).f1 for _, per_doc in outputs]
    elapsed = time.perf_counter() - start
    recall = [r.recall for r in rows]
    precision = [r.precision for r in rows]
    best = max(rows, key=lambda r: r.f1)
    gain = best.f1 - max(individual)
    for r in rows:
        print(f"  k={r.threshold} P={r.precision:.4f} R={r.recall:.4f} F={r.f1:.4f}")
    recall_ok = all(b <= a for a, b in zip(recall, recall[1:]))
    precision_ok = all(b >= a for a, b in zip(precision, precision[1:]))
    ok = len(corpus.documents) >= 50 and recall_ok and precision_ok and gain >= 0.02 and elapsed < 30
    verdict("5", ok, f"best k={best.threshold} F={best.f1:.4f}, best single F={max(individual):.4f}, gain={gain * 100:.1f} points, {elapsed:.2f}s")
    assert len(corpus.documents) >= 50
    assert recall_ok, recall
    assert precision_ok, precision
    assert gain >= 0.02
    assert elapsed < 30


@pytest.mark.acceptance("6. perceptron convergence on the toy corpus")
def test_perceptron_converges():
    corpus = synthetic.bundled_toy_corpus()

    def accuracy(model):
        right = total = 0
        for doc in corpus.documents:
            gold = bio_encode(doc, corpus.gold[doc.doc_id])
            pred = predict_tags(model, doc)
            right += sum(g == p for g, p in zip(gold, pred))
            total += len(gold)
        return right / total

    model = perceptron_train(corpus, epochs=10, seed=1)
    acc = accuracy(model)
    again = perceptron_train(corpus, epochs=10, seed=1)
    reloaded = load_model(save_model(model))
    same_predictions = all(predict_tags(model, d) == predict_tags(reloaded, d) for d in corpus.documents)
    ok = acc == 1.0 and again == model and same_predictions
    verdict("6", ok, f"token accuracy {acc:.4f} after 10 epochs, deterministic={again == model}, reload identical={same_predictions}")
    assert acc == 1.0
    assert again == model
    assert same_predictions


@pytest.mark.acceptance("7. gazetteer longest match")
def test_gazetteer_longest_match():
    rng = random.Random(7)
    vocab = ["a", "b", "c", "d", "e"]
    violations = []
    for n in range(500):
        types = {}
        for _ in range(rng.randint(0, 8)):
            term = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 4)))
            types.setdefault(term, rng.choice(list(ConceptType)))
        lex = load_lexicon("".join(f"{t}\t{c.value}\n" for t, c in types.items()))
        lines = [" ".join(rng.choice(vocab + ["A", "B"]) for _ in range(rng.randint(0, 12))) for _ in range(rng.randint(1, 4))]
        doc = tokenize(f"g{n}", "\n".join(lines))
        violations += oracles.gazetteer_violations(gazetteer_annotate(lex, doc), set(types), types, doc)
    verdict("7", not violations, f"500 pairs, {len(violations)} violations")
    assert violations == []


@pytest.mark.acceptance("8. CLI and service agree")
def test_cli_service_equivalence(ensemble_dir, tmp_path, capsys):
    records = sorted(synthetic.data_path("synthetic", "records").glob("*.txt"))[:20]
    config = ensemble_dir / "ensemble.json"
    out_dir = tmp_path / "cli"
    assert main(["annotate", *map(str, records), "--config", str(config), "--format", "con", "--output-dir", str(out_dir)]) == 0
    mismatched = []
    nonempty = 0
    with running_server(AnnotationService.from_config_file(config)) as url:
        for rec in records:
            status, _, body = http(f"{url}/annotate?format=con&doc_id={rec.stem}", rec.read_bytes())
            cli_bytes = (out_dir / f"{rec.stem}.con").read_bytes()
            nonempty += bool(cli_bytes)
            if status != 200 or body != cli_bytes:
                mismatched.append(rec.stem)
        health = http(url + "/health")
        bad = [
            http(url + "/annotate?threshold=9", b"x"),
            http(url + "/annotate?format=xml", b"x"),
            http(url + "/annotate", b"\xff"),
            http(url + "/annotate", b"x" * 70000),
            http(url + "/missing"),
        ]
    structured = all(400 <= s < 500 and ct == "application/json" and {"error", "message"} <= set(json.loads(b)) for s, ct, b in bad)
    health_ok = health[0] == 200 and health[2] == b"ok"
    capsys.readouterr()
    ok = not mismatched and health_ok and structured
    verdict("8", ok, f"{len(records)} docs, {len(mismatched)} mismatches, health={health_ok}, structured 4xx={structured}")
    assert len(records) == 20 and nonempty > 0
    assert mismatched == []
    assert health_ok
    assert structured, [(s, b) for s, _, b in bad]


@pytest.mark.acceptance("9. gazetteer throughput")
def test_gazetteer_throughput():
    corpus = synthetic.generate_corpus(349, seed=349)
    texts = [(d.doc_id, d.text) for d in corpus.documents]
    start = time.perf_counter()
    annotator = GazetteerAnnotator("gaz", load_lexicon(synthetic.lexicon_text()))
    total = sum(len(annotate(annotator, tokenize(doc_id, text))) for doc_id, text in texts)
    elapsed = time.perf_counter() - start
    verdict("9", elapsed < 5, f"349 records, {total} concepts, {elapsed:.3f}s")
    assert total > 0
    assert elapsed < 5
