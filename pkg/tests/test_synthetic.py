from conceptvote import synthetic
from conceptvote.annotators import load_lexicon
from conceptvote.corpus import serialize_con
from conceptvote.eval import score_exact


def test_bundle_matches_generator(tmp_path):
    synthetic.write_bundle(tmp_path)
    for rel in ["lexicon.tsv", *(f"{sub}/{kind}" for sub in ("synthetic", "toy") for kind in ("records", "gold"))]:
        ours, packaged = tmp_path / rel, synthetic.data_path(*rel.split("/"))
        if ours.is_file():
            assert ours.read_bytes() == packaged.read_bytes()
        else:
            assert sorted(p.name for p in ours.iterdir()) == sorted(p.name for p in packaged.iterdir())
            for p in ours.iterdir():
                assert p.read_bytes() == (packaged / p.name).read_bytes(), p.name


def test_generation_deterministic():
    a = synthetic.generate_corpus(5, seed=9)
    b = synthetic.generate_corpus(5, seed=9)
    assert a.documents == b.documents and a.gold == b.gold
    assert synthetic.generate_corpus(5, seed=10).documents != a.documents


def test_bundled_corpus_size():
    corpus = synthetic.bundled_corpus()
    assert len(corpus.documents) == synthetic.BUNDLED_DOCS >= 50
    assert sum(len(g) for g in corpus.gold.values()) > 500


def test_gold_spans_carry_vocabulary_text():
    corpus = synthetic.generate_corpus(10, seed=1)
    vocab = {t.lower() for t in synthetic.PROBLEMS + synthetic.TESTS + synthetic.TREATMENTS}
    for a in corpus.all_gold():
        assert a.text in vocab
        assert a.span.start_line == a.span.end_line


def test_noise_rates_roughly_respected():
    corpus = synthetic.bundled_corpus()
    gold = corpus.all_gold()
    for _, outs in synthetic.noisy_outputs(corpus, 2):
        system = {a for s in outs.values() for a in s.annotations}
        r = score_exact(gold, system)
        # about 25% dropped and 15% damaged leaves roughly 64% exact
        assert 0.55 < r.recall < 0.72


def test_noisy_outputs_independent_streams():
    corpus = synthetic.generate_corpus(5)
    outs = synthetic.noisy_outputs(corpus, 3)
    assert [i for i, _ in outs] == ["noisy-1", "noisy-2", "noisy-3"]
    assert outs[0][1] != outs[1][1]
    assert synthetic.noisy_outputs(corpus, 3) == outs


def test_lexicon_loads():
    lex = load_lexicon(synthetic.lexicon_text())
    assert 0 < len(lex.entries) < len(synthetic.PROBLEMS + synthetic.TESTS + synthetic.TREATMENTS)
    assert not any(t.startswith(("a ", "an ")) for t in lex.entries)


def test_toy_corpus_round_trips():
    corpus = synthetic.bundled_toy_corpus()
    assert len(corpus.documents) == 12
    for doc in corpus.documents:
        text = serialize_con(corpus.gold[doc.doc_id], doc)
        assert (synthetic.data_path("toy", "gold", f"{doc.doc_id}.con")).read_text() == text
