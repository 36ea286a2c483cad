"""HTTP annotation service.

Endpoints::

    POST /annotate?threshold=K&format=json|con&doc_id=ID   body: record text
    GET  /annotators
    GET  /health

One request is one document.  Errors are JSON objects with ``error`` and
``message`` keys.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Mapping, Sequence
from urllib.parse import parse_qs, urlsplit

from .annotators import Annotator
from .corpus import Document, format_con_line, serialize_con, sort_key, tokenize
from .ensemble import EnsembleConfig, PipelineResult, build_annotators, check_threshold, load_config, run_pipeline
from .errors import ConceptVoteError, ConfigError, PipelineError

log = logging.getLogger(__name__)

FORMATS = ("json", "con")


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    threshold: int = 1
    max_body_bytes: int = 1 << 20
    request_timeout: float = 30.0

    def __post_init__(self):
        if self.max_body_bytes <= 0 or self.request_timeout <= 0:
            raise ConfigError("service limits must be positive")

    @classmethod
    def from_dict(cls, d: Mapping, default_threshold: int) -> "ServiceConfig":
        d = dict(d or {})
        unknown = set(d) - {"host", "port", "threshold", "max_body_bytes", "request_timeout"}
        if unknown:
            raise ConfigError(f"unknown service settings: {sorted(unknown)}")
        d.setdefault("threshold", default_threshold)
        return cls(**d)


def render_result(result: PipelineResult, doc: Document, fmt: str) -> str:
    """Shared by the CLI and the service so both emit identical bytes."""
    if fmt == "con":
        return serialize_con(result.combined.annotations, doc)
    if fmt != "json":
        raise ValueError(f"unknown output format {fmt!r}")
    anns = []
    for a in sorted(result.combined.annotations, key=sort_key):
        voters = sorted(result.votes(a))
        anns.append(
            {
                "start": [a.span.start_line, a.span.start_token],
                "end": [a.span.end_line, a.span.end_token],
                "type": a.concept_type.value,
                "text": a.text,
                "con": format_con_line(a),
                "votes": len(voters),
                "voters": voters,
            }
        )
    payload = {
        "doc_id": doc.doc_id,
        "threshold": result.threshold,
        "annotations": anns,
        "failed_annotators": dict(sorted(result.failures.items())),
    }
    return json.dumps(payload, indent=2) + "\n"


def default_doc_id(body: bytes) -> str:
    # content-derived so identical requests get identical responses
    return "doc-" + hashlib.sha256(body).hexdigest()[:12]


class RequestError(ConceptVoteError):
    def __init__(self, status: HTTPStatus, code: str, message: str):
        self.status = status
        self.code = code
        super().__init__(message)


@dataclass
class Response:
    status: int
    content_type: str
    body: bytes

    @classmethod
    def json(cls, status: int, obj) -> "Response":
        return cls(status, "application/json", (json.dumps(obj, indent=2) + "\n").encode("utf-8"))

    @classmethod
    def error(cls, status: int, code: str, message: str, **extra) -> "Response":
        return cls.json(status, {"error": code, "message": message, **extra})


class AnnotationService:
    """Stateless request handling on top of a fixed set of loaded annotators."""

    def __init__(self, annotators: Sequence[Annotator], settings: ServiceConfig):
        ids = [a.id for a in annotators]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate annotator ids: {ids}")
        check_threshold(settings.threshold, len(annotators))
        self.annotators = list(annotators)
        self.settings = settings

    @classmethod
    def from_config_file(cls, path: Path | str) -> "AnnotationService":
        config, raw = load_config(path)
        settings = ServiceConfig.from_dict(raw.get("service", {}), config.threshold)
        return cls(build_annotators(config, Path(path).parent), settings)

    @classmethod
    def from_config(cls, config: EnsembleConfig, base_dir: Path | str = ".", **settings) -> "AnnotationService":
        settings.setdefault("threshold", config.threshold)
        return cls(build_annotators(config, base_dir), ServiceConfig(**settings))

    def annotators_listing(self) -> Response:
        return Response.json(200, [{"id": a.id, "kind": a.kind} for a in self.annotators])

    def handle_annotate(self, body: bytes, params: Mapping[str, str]) -> Response:
        try:
            if len(body) > self.settings.max_body_bytes:
                raise RequestError(
                    HTTPStatus.REQUEST_ENTITY_TOO_LARGE,
                    "request_too_large",
                    f"body exceeds {self.settings.max_body_bytes} bytes",
                )
            threshold = self._threshold(params.get("threshold"))
            fmt = params.get("format", "json")
            if fmt not in FORMATS:
                raise RequestError(HTTPStatus.BAD_REQUEST, "bad_request", f"format must be one of {FORMATS}")
            try:
                text = body.decode("utf-8")
            except UnicodeDecodeError as e:
                raise RequestError(HTTPStatus.BAD_REQUEST, "bad_request", f"body is not utf-8: {e}") from None
            doc = tokenize(params.get("doc_id") or default_doc_id(body), text)
            result = run_pipeline(self.annotators, doc, threshold)
        except RequestError as e:
            return Response.error(e.status, e.code, str(e))
        except PipelineError as e:
            return Response.json(500, e.to_dict())
        except ConceptVoteError as e:
            log.exception("annotation failed")
            return Response.error(500, e.code, str(e))
        out = render_result(result, doc, fmt)
        ctype = "application/json" if fmt == "json" else "text/plain; charset=utf-8"
        return Response(200, ctype, out.encode("utf-8"))

    def _threshold(self, raw: str | None) -> int:
        if raw is None or raw == "":
            return self.settings.threshold
        try:
            k = int(raw)
        except ValueError:
            raise RequestError(HTTPStatus.BAD_REQUEST, "bad_request", f"threshold must be an integer, got {raw!r}") from None
        if not 1 <= k <= len(self.annotators):
            raise RequestError(
                HTTPStatus.BAD_REQUEST, "bad_request", f"threshold {k} outside [1, {len(self.annotators)}]"
            )
        return k


class _Handler(BaseHTTPRequestHandler):
    service: AnnotationService
    server_version = "conceptvote/0.1"

    def setup(self):
        self.timeout = self.service.settings.request_timeout
        super().setup()

    def _send(self, resp: Response) -> None:
        self.send_response(resp.status)
        self.send_header("Content-Type", resp.content_type)
        self.send_header("Content-Length", str(len(resp.body)))
        self.end_headers()
        self.wfile.write(resp.body)

    def _params(self) -> dict[str, str]:
        query = parse_qs(urlsplit(self.path).query, keep_blank_values=True)
        return {k: v[-1] for k, v in query.items()}

    def do_GET(self):
        path = urlsplit(self.path).path
        if path == "/health":
            self._send(Response(200, "text/plain; charset=utf-8", b"ok"))
        elif path == "/annotators":
            self._send(self.service.annotators_listing())
        elif path == "/annotate":
            self._send(Response.error(405, "method_not_allowed", "use POST /annotate"))
        else:
            self._send(Response.error(404, "not_found", f"no route {path}"))

    def do_POST(self):
        path = urlsplit(self.path).path
        if path != "/annotate":
            self._send(Response.error(404, "not_found", f"no route {path}"))
            return
        raw_len = self.headers.get("Content-Length")
        try:
            length = int(raw_len) if raw_len is not None else -1
        except ValueError:
            length = -1
        if length < 0:
            self.close_connection = True
            self._send(Response.error(400, "bad_request", "Content-Length header required"))
            return
        if length > self.service.settings.max_body_bytes:
            # refuse before reading the body
            self.close_connection = True
            self._send(
                Response.error(
                    413, "request_too_large", f"body exceeds {self.service.settings.max_body_bytes} bytes"
                )
            )
            return
        body = self.rfile.read(length)
        self._send(self.service.handle_annotate(body, self._params()))

    def log_message(self, format, *args):
        log.info("%s %s", self.address_string(), format % args)


def make_server(service: AnnotationService, host: str | None = None, port: int | None = None) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer(
        (host if host is not None else service.settings.host, port if port is not None else service.settings.port),
        handler,
    )
    server.daemon_threads = True
    return server
