import contextlib
import json
import sys
import threading
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from conceptvote import synthetic
from conceptvote.annotators import perceptron_train, save_model_file
from conceptvote.corpus import tokenize
from conceptvote.service import make_server

FIXTURES = Path(__file__).parent / "fixtures"
FAKE_TAGGER = FIXTURES / "fake_tagger.py"

CLINICAL_SENTENCE = "The patient had increasing dyspnea on exertion , he had a bronchoalveolar lavage performed , and CBC was unremarkable ."

_acceptance: list[tuple[str, str]] = []


def fake_tagger_cmd(*args: str) -> list[str]:
    return [sys.executable, str(FAKE_TAGGER), *args]


@contextlib.contextmanager
def running_server(service):
    """Serve on an ephemeral port in a background thread; yields the base URL."""
    server = make_server(service, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()


def http(url: str, body: bytes | None = None, method: str | None = None, headers: dict | None = None):
    """(status, content type, body bytes), without raising on 4xx/5xx."""
    req = urllib.request.Request(url, data=body, method=method, headers=headers or {})
    try:
        with urllib.request.urlopen(req, timeout=60) as resp:
            return resp.status, resp.headers.get("Content-Type"), resp.read()
    except urllib.error.HTTPError as e:
        return e.code, e.headers.get("Content-Type"), e.read()


@pytest.fixture
def dyspnea_doc():
    return tokenize("r1", "The patient had increasing dyspnea .")


@pytest.fixture(scope="session")
def ensemble_dir(tmp_path_factory):
    """A config directory with gazetteer, perceptron and external annotators."""
    root = tmp_path_factory.mktemp("ensemble")
    (root / "lexicon.tsv").write_text(synthetic.lexicon_text(), encoding="utf-8")
    model = perceptron_train(synthetic.bundled_corpus(), epochs=5, seed=1)
    save_model_file(model, root / "model.ensm")
    config = {
        "threshold": 2,
        "annotators": [
            {"id": "gaz", "kind": "gazetteer", "lexicon": "lexicon.tsv"},
            {"id": "perc", "kind": "perceptron", "model": "model.ensm"},
            {
                "id": "ext",
                "kind": "external",
                "command": fake_tagger_cmd("words", "cbc:test", "dyspnea:problem", "lasix:treatment", "fever:problem"),
                "timeout": 20,
            },
        ],
        "service": {"max_body_bytes": 65536},
    }
    (root / "ensemble.json").write_text(json.dumps(config, indent=2), encoding="utf-8")
    return root


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((marker.args[0], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, verdict in sorted(_acceptance, key=lambda x: int(x[0].split(".")[0])):
        terminalreporter.write_line(f"[{verdict}] {label}")
