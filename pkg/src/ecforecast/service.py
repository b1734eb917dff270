"""Read-only JSON-over-HTTP forecast endpoint backed by saved model artifacts.

Endpoints::

    GET /v1/health
    GET /v1/forecast?category=standard&days=5&model=lstm
"""

from __future__ import annotations

import json
import logging
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .artifacts import ModelArtifact, artifact_path, load_artifact
from .config import AppConfig
from .errors import ForecastError
from .forecaster import forecast_business_days, forecast_json
from .models.base import ModelFamily
from .series import CalendarSpec, ContainerCategory

logger = logging.getLogger(__name__)

MAX_DAYS = 60


class ArtifactStore:
    """Immutable snapshots of the artifacts under a directory.

    Readers take :attr:`snapshot` once per request; :meth:`reload` builds a new
    mapping and swaps the reference, so a request sees either the old or the
    new set in full.
    """

    def __init__(self, root, calendar: CalendarSpec | None = None):
        self.root = Path(root)
        self.calendar = calendar
        self._lock = threading.Lock()
        self._snapshot: dict = {}
        self.reload()

    @property
    def snapshot(self) -> dict:
        return self._snapshot

    def reload(self) -> int:
        fresh = {}
        for category in ContainerCategory:
            for family in ModelFamily:
                path = artifact_path(self.root, category, family)
                if not path.exists():
                    continue
                try:
                    fresh[(category, family)] = load_artifact(path)
                except ForecastError as exc:
                    logger.error("skipping %s: %s", path, exc)
        with self._lock:
            self._snapshot = fresh
        logger.info("loaded %d artifacts from %s", len(fresh), self.root)
        return len(fresh)


def _error(status: HTTPStatus, reason: str, detail: str) -> tuple:
    body = json.dumps({"error": reason, "detail": detail}, sort_keys=True)
    return status, body


def handle_request(target: str, store: ArtifactStore, default_model: str = "lstm") -> tuple:
    """Route one GET request; returns ``(status, json_text)``."""
    parts = urlsplit(target)
    if parts.path == "/v1/health":
        return HTTPStatus.OK, json.dumps({"status": "ok"})
    if parts.path != "/v1/forecast":
        return _error(HTTPStatus.NOT_FOUND, "not_found", f"no route {parts.path}")
    query = parse_qs(parts.query, keep_blank_values=True)
    unknown = set(query) - {"category", "days", "model"}
    if unknown:
        return _error(HTTPStatus.BAD_REQUEST, "bad_query", f"unknown parameters {sorted(unknown)}")
    if any(len(v) > 1 for v in query.values()):
        return _error(HTTPStatus.BAD_REQUEST, "bad_query", "repeated parameter")
    args = {k: v[0] for k, v in query.items()}
    try:
        days = int(args.get("days", "5"))
    except ValueError:
        return _error(HTTPStatus.BAD_REQUEST, "bad_query", "days must be an integer")
    if not 1 <= days <= MAX_DAYS:
        return _error(HTTPStatus.BAD_REQUEST, "bad_query", f"days must be in 1..{MAX_DAYS}")
    try:
        family = ModelFamily.parse(args.get("model", default_model))
    except ValueError:
        return _error(HTTPStatus.BAD_REQUEST, "bad_query", f"unknown model {args.get('model')!r}")
    try:
        category = ContainerCategory.parse(args.get("category", "standard"))
    except ValueError:
        return _error(HTTPStatus.NOT_FOUND, "unknown_category",
                      f"unknown category {args.get('category')!r}")
    artifact: ModelArtifact | None = store.snapshot.get((category, family))
    if artifact is None:
        return _error(HTTPStatus.NOT_FOUND, "artifact_missing",
                      f"no {family.value} artifact for category {category.value}")
    try:
        result = forecast_business_days(artifact.fit, days, store.calendar)
    except ForecastError as exc:
        return _error(HTTPStatus.INTERNAL_SERVER_ERROR, "forecast_failed", str(exc))
    return HTTPStatus.OK, forecast_json(result)


class ForecastHandler(BaseHTTPRequestHandler):
    store: ArtifactStore
    default_model = "lstm"
    server_version = "ecforecast"

    def do_GET(self):
        status, body = handle_request(self.path, self.store, self.default_model)
        data = body.encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):
        logger.info("%s %s", self.address_string(), fmt % args)


def make_server(store: ArtifactStore, host: str = "127.0.0.1", port: int = 8080,
                default_model: str = "lstm") -> ThreadingHTTPServer:
    handler = type("BoundForecastHandler", (ForecastHandler,),
                   {"store": store, "default_model": default_model})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve(config: AppConfig) -> None:
    """Serve forecasts from ``config.artifacts_dir`` until interrupted."""
    store = ArtifactStore(config.artifacts_dir, config.calendar)
    server = make_server(store, config.host, config.port)
    host, port = server.server_address[:2]
    logger.info("serving on http://%s:%d", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
