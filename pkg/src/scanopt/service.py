"""HTTP service backing the scanning-keyboard UI.

Endpoints (JSON unless noted):

  GET  /api/layouts                 roster with EQPD under the configured prior
  GET  /api/layouts/{name}          layout document (serialization schema)
  GET  /api/prior                   prior document
  POST /api/sessions                {layout, mode, seed[, decisions]} ->
                                    {session_id, target_sequence, scan_delay_s}
  POST /api/sessions/{id}/events    {"events": [...]} appended atomically
  GET  /api/sessions/{id}/summary   statistics replayed from the log

Sessions survive restarts: the registry is rebuilt from the append-only
log, and summaries are always computed from disk.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import layouts as layouts_mod
from .errors import ScanoptError
from .priors import CharacterPrior, build_english_prior
from .sessions import SessionLog, SessionLogEntry, SessionLogError, parse_entry, summarize_session
from .sim import sample_targets
from .tree import Layout, eqpd, expected_trials, parse_layout, serialize_layout

DEFAULT_SCAN_DELAY_S = 1.2
DEFAULT_SESSION_DECISIONS = 20


class ServiceError(ScanoptError):
    pass


@dataclass
class _Session:
    session_id: str
    layout: str
    mode: str
    seed: int
    targets: list[str]
    last_ts: int = -1
    decision_queries: set[int] = field(default_factory=set)
    lock: threading.Lock = field(default_factory=threading.Lock)


class ScanService:
    """Application state shared by all requests."""

    def __init__(
        self,
        prior: CharacterPrior | None = None,
        layouts: dict[str, Layout] | None = None,
        log_path: str | Path = "sessions.jsonl",
        scan_delay_s: float = DEFAULT_SCAN_DELAY_S,
        layout_names: tuple[str, ...] = layouts_mod.LAYOUT_NAMES,
    ):
        self.prior = prior if prior is not None else build_english_prior()
        if layouts is None:
            layouts = {
                name: Layout(name=name, tree=layouts_mod.build_layout(name, self.prior))
                for name in layout_names
            }
        self.layouts = layouts
        self.log = SessionLog(log_path)
        self.scan_delay_s = scan_delay_s
        self.sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()
        self._recover_sessions()

    def _recover_sessions(self) -> None:
        for entry in self.log.read():
            session = self.sessions.get(entry.session_id)
            if entry.kind == "session_start" and session is None:
                self.sessions[entry.session_id] = session = _Session(
                    session_id=entry.session_id,
                    layout=entry.layout,
                    mode=entry.mode,
                    seed=entry.payload["seed"],
                    targets=list(entry.payload["targets"]),
                )
            if session is not None:
                session.last_ts = max(session.last_ts, entry.ts_ms)
                if entry.kind == "query_shown":
                    session.decision_queries.add(entry.payload["decision"])

    # ---- endpoint logic (transport-independent) ----

    def roster(self) -> dict:
        return {
            "scan_delay_s": self.scan_delay_s,
            "layouts": [
                {
                    "name": name,
                    "eqpd": eqpd(layout.tree, self.prior),
                    "expected_trials": expected_trials(layout.tree, self.prior),
                }
                for name, layout in sorted(self.layouts.items())
            ],
        }

    def layout_document(self, name: str) -> dict:
        layout = self.layouts.get(name)
        if layout is None:
            raise KeyError(name)
        return json.loads(serialize_layout(layout.tree, layout.name))

    def prior_document(self) -> dict:
        return {"symbols": [{"char": s, "p": p} for s, p in self.prior.entries]}

    def create_session(self, body: dict) -> dict:
        layout = body.get("layout")
        if layout not in self.layouts:
            raise KeyError(layout)
        mode = body.get("mode")
        if mode not in ("timed", "binary"):
            raise ServiceError(f"mode must be 'timed' or 'binary', got {mode!r}")
        seed = body.get("seed")
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ServiceError("seed must be an integer")
        count = body.get("decisions", DEFAULT_SESSION_DECISIONS)
        if not isinstance(count, int) or count < 1:
            raise ServiceError("decisions must be a positive integer")
        targets = sample_targets(self.prior, seed, count)
        session_id = uuid.uuid4().hex[:12]
        session = _Session(session_id, layout, mode, seed, targets)
        start = SessionLogEntry(
            session_id=session_id,
            ts_ms=0,
            layout=layout,
            mode=mode,
            kind="session_start",
            payload={"seed": seed, "targets": targets, "decisions": count},
        )
        with self._registry_lock:
            self.sessions[session_id] = session
        self.log.append([start])
        session.last_ts = 0
        return {
            "session_id": session_id,
            "target_sequence": targets,
            "scan_delay_s": self.scan_delay_s,
        }

    def append_events(self, session_id: str, body: object) -> dict:
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        if isinstance(body, dict):
            raw = body.get("events")
        else:
            raw = body
        if not isinstance(raw, list) or not raw:
            raise SessionLogError("body must carry a non-empty 'events' array")
        with session.lock:
            entries: list[SessionLogEntry] = []
            last_ts = session.last_ts
            seen_queries = set(session.decision_queries)
            for i, obj in enumerate(raw):
                try:
                    entry = parse_entry(obj)
                except SessionLogError as exc:
                    raise SessionLogError(f"events[{i}]: {exc}") from exc
                if entry.session_id != session_id:
                    raise SessionLogError(f"events[{i}]: session_id does not match the URL")
                if entry.kind == "session_start":
                    raise SessionLogError(f"events[{i}]: session_start may not be appended")
                if entry.ts_ms <= last_ts:
                    raise SessionLogError(
                        f"events[{i}]: ts_ms {entry.ts_ms} not after previous {last_ts}"
                    )
                if entry.kind == "query_shown":
                    seen_queries.add(entry.payload["decision"])
                if entry.kind == "decision" and entry.payload["decision"] not in seen_queries:
                    raise SessionLogError(
                        f"events[{i}]: decision event without any query_shown"
                    )
                last_ts = entry.ts_ms
                entries.append(entry)
            # whole batch validated; now it may land on disk
            self.log.append(entries)
            session.last_ts = last_ts
            session.decision_queries = seen_queries
        return {"appended": len(entries)}

    def session_summary(self, session_id: str) -> dict:
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        layout = self.layouts.get(session.layout)
        if layout is None:
            raise ServiceError(f"layout {session.layout!r} no longer configured")
        stats = summarize_session(self.log.read(session_id), layout.tree)
        doc = stats.to_dict()
        doc["session_id"] = session_id
        doc["layout"] = session.layout
        doc["mode"] = session.mode
        return doc


class _Handler(BaseHTTPRequestHandler):
    service: ScanService
    static_dir: Path | None = None

    # quiet by default; tests and the CLI enable logging when useful
    def log_message(self, fmt: str, *args) -> None:
        pass

    def _send_json(self, status: int, doc: dict) -> None:
        data = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def do_OPTIONS(self) -> None:  # CORS preflight for dev servers
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        try:
            if path == "/api/layouts":
                self._send_json(200, self.service.roster())
            elif path.startswith("/api/layouts/"):
                name = path.removeprefix("/api/layouts/")
                self._send_json(200, self.service.layout_document(name))
            elif path == "/api/prior":
                self._send_json(200, self.service.prior_document())
            elif path.startswith("/api/sessions/") and path.endswith("/summary"):
                session_id = path.removeprefix("/api/sessions/").removesuffix("/summary")
                self._send_json(200, self.service.session_summary(session_id))
            elif not path.startswith("/api/"):
                self._serve_static(path)
            else:
                self._error(404, f"no such endpoint {path}")
        except KeyError as exc:
            self._error(404, f"not found: {exc}")
        except ScanoptError as exc:
            self._error(400, str(exc))

    def do_POST(self) -> None:
        path = self.path.split("?", 1)[0]
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode()) if raw else {}
        except json.JSONDecodeError as exc:
            self._error(400, f"invalid JSON body: {exc}")
            return
        try:
            if path == "/api/sessions":
                self._send_json(200, self.service.create_session(body))
            elif path.startswith("/api/sessions/") and path.endswith("/events"):
                session_id = path.removeprefix("/api/sessions/").removesuffix("/events")
                self._send_json(200, self.service.append_events(session_id, body))
            else:
                self._error(404, f"no such endpoint {path}")
        except KeyError as exc:
            self._error(404, f"not found: {exc}")
        except SessionLogError as exc:
            self._error(400, str(exc))
        except ScanoptError as exc:
            self._error(400, str(exc))

    def _serve_static(self, path: str) -> None:
        if self.static_dir is None:
            self._error(404, "no static files configured")
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._error(404, f"no such file {path}")
            return
        data = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)


def make_server(
    service: ScanService,
    port: int,
    host: str = "127.0.0.1",
    static_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "service": service,
            "static_dir": Path(static_dir) if static_dir else None,
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def load_layout_files(paths: list[str | Path]) -> dict[str, Layout]:
    out = {}
    for p in paths:
        layout = parse_layout(Path(p).read_text(encoding="utf-8"))
        out[layout.name] = layout
    return out
