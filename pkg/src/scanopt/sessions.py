"""Append-only session logs and the statistics computed from them.

Live (or simulated) scanning sessions are persisted as one JSON object
per line.  Summaries are always recomputed by replaying the log, so a
service restart cannot change past numbers, and the rollover/accuracy
definitions are shared with :mod:`scanopt.sim` by rebuilding simulator
query events from the logged responses.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ScanoptError
from .sim import DecisionRecord, QueryEvent, detect_rollovers
from .tree import TreeNode

EVENT_KINDS = ("session_start", "query_shown", "response", "decision", "session_end")


class SessionLogError(ScanoptError):
    """Malformed or inconsistent session log entry."""


@dataclass(frozen=True)
class SessionLogEntry:
    session_id: str
    ts_ms: int
    layout: str
    mode: str
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SessionLogError(msg)


def parse_entry(obj: object) -> SessionLogEntry:
    """Validate one raw JSON object against the entry schema."""
    _require(isinstance(obj, dict), "entry must be an object")
    assert isinstance(obj, dict)
    for key in ("session_id", "ts_ms", "layout", "mode", "kind", "payload"):
        _require(key in obj, f"entry missing field {key!r}")
    _require(isinstance(obj["session_id"], str) and obj["session_id"] != "", "session_id must be a non-empty string")
    _require(isinstance(obj["ts_ms"], int) and not isinstance(obj["ts_ms"], bool), "ts_ms must be an integer")
    _require(isinstance(obj["layout"], str), "layout must be a string")
    _require(obj["mode"] in ("timed", "binary"), f"unknown mode {obj['mode']!r}")
    _require(obj["kind"] in EVENT_KINDS, f"unknown event kind {obj['kind']!r}")
    payload = obj["payload"]
    _require(isinstance(payload, dict), "payload must be an object")
    kind = obj["kind"]
    if kind == "session_start":
        _require(isinstance(payload.get("seed"), int), "session_start payload needs integer 'seed'")
        targets = payload.get("targets")
        _require(
            isinstance(targets, list) and all(isinstance(t, str) and len(t) == 1 for t in targets),
            "session_start payload needs 'targets' as a list of symbols",
        )
    elif kind in ("query_shown", "response"):
        _require(isinstance(payload.get("decision"), int), f"{kind} payload needs integer 'decision'")
        path = payload.get("node_path")
        _require(
            isinstance(path, list) and all(isinstance(c, int) and c >= 1 for c in path),
            f"{kind} payload needs 'node_path' as a list of positive integers",
        )
        qi = payload.get("query_index")
        _require(isinstance(qi, int) and qi >= 1, f"{kind} payload needs positive 'query_index'")
        if kind == "response":
            _require(isinstance(payload.get("response"), bool), "response payload needs boolean 'response'")
            _require(
                isinstance(payload.get("duration_ms"), (int, float)),
                "response payload needs numeric 'duration_ms'",
            )
    elif kind == "decision":
        _require(isinstance(payload.get("decision"), int), "decision payload needs integer 'decision'")
        _require(
            isinstance(payload.get("target"), str) and len(payload["target"]) == 1,
            "decision payload needs single-character 'target'",
        )
        selected = payload.get("selected")
        _require(
            selected is None or (isinstance(selected, str) and len(selected) == 1),
            "decision payload needs 'selected' as a symbol or null",
        )
        _require(
            isinstance(payload.get("duration_ms"), (int, float)),
            "decision payload needs numeric 'duration_ms'",
        )
    return SessionLogEntry(
        session_id=obj["session_id"],
        ts_ms=obj["ts_ms"],
        layout=obj["layout"],
        mode=obj["mode"],
        kind=kind,
        payload=payload,
    )


class SessionLog:
    """Append-only JSONL file; decision events are fsynced."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)

    def append(self, entries: Iterable[SessionLogEntry]) -> None:
        entries = list(entries)
        if not entries:
            return
        data = "".join(e.to_json() + "\n" for e in entries)
        durable = any(e.kind in ("decision", "session_end") for e in entries)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(data)
                fh.flush()
                if durable:
                    os.fsync(fh.fileno())

    def read(self, session_id: str | None = None) -> Iterator[SessionLogEntry]:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = parse_entry(json.loads(line))
                except (json.JSONDecodeError, SessionLogError) as exc:
                    raise SessionLogError(f"{self.path}:{line_no}: {exc}") from exc
                if session_id is None or entry.session_id == session_id:
                    yield entry


@dataclass(frozen=True)
class SessionSummaryStats:
    accuracy: float
    mean_queries: float
    mean_time_s: float
    mean_rollovers: float
    timeouts: int
    num_decisions: int

    def to_dict(self) -> dict:
        return asdict(self)


def _resolve_query(tree: TreeNode, node_path: list[int], query_index: int) -> TreeNode | None:
    """The subtree presented by query ``query_index`` at ``node_path``."""
    node = tree
    for cost in node_path:
        nxt = None
        for c, child in node.children:
            if c == cost:
                nxt = child
                break
        if nxt is None:
            return None
        node = nxt
    if node.is_leaf or query_index > len(node.children):
        return None
    return node.children[query_index - 1][1]


def summarize_session(entries: Iterable[SessionLogEntry], tree: TreeNode) -> SessionSummaryStats:
    """Recompute session statistics from logged events.

    Rollovers are counted with the simulator's definition by rebuilding
    per-decision query events; the target's presence in a query set is
    re-derived from the layout tree rather than trusted from the client.
    """
    responses: dict[int, list[QueryEvent]] = {}
    decisions: dict[int, dict] = {}
    for entry in entries:
        if entry.kind == "response":
            p = entry.payload
            d = p["decision"]
            responses.setdefault(d, []).append(
                QueryEvent(
                    node_path=tuple(p["node_path"]),
                    query_index=p["query_index"],
                    target_present=False,  # filled in below
                    response=p["response"],
                    duration_s=float(p["duration_ms"]) / 1000.0,
                )
            )
        elif entry.kind == "decision":
            p = entry.payload
            decisions[p["decision"]] = p

    n = len(decisions)
    if n == 0:
        return SessionSummaryStats(0.0, 0.0, 0.0, 0.0, 0, 0)
    correct = 0
    timeouts = 0
    total_queries = 0
    total_time_ms = 0.0
    total_rollovers = 0
    for d, payload in sorted(decisions.items()):
        target = payload["target"]
        selected = payload.get("selected")
        if selected == target:
            correct += 1
        if selected is None:
            timeouts += 1
        total_time_ms += float(payload["duration_ms"])
        events = responses.get(d, [])
        total_queries += len(events)
        resolved = []
        for q in events:
            subtree = _resolve_query(tree, list(q.node_path), q.query_index)
            present = subtree is not None and target in subtree.symbol_set()
            resolved.append(
                QueryEvent(q.node_path, q.query_index, present, q.response, q.duration_s)
            )
        record = DecisionRecord(
            target=target,
            selected=selected,
            queries=resolved,
            rollover_count=0,
            total_time_s=float(payload["duration_ms"]) / 1000.0,
        )
        total_rollovers += detect_rollovers(record)
    return SessionSummaryStats(
        accuracy=correct / n,
        mean_queries=total_queries / n,
        mean_time_s=(total_time_ms / 1000.0) / n,
        mean_rollovers=total_rollovers / n,
        timeouts=timeouts,
        num_decisions=n,
    )


def events_from_records(
    session_id: str,
    layout: str,
    mode: str,
    seed: int,
    records: list[DecisionRecord],
    start_ts_ms: int = 0,
) -> list[SessionLogEntry]:
    """Render simulator output as a session event stream.

    Timestamps are synthetic and strictly increasing, which is all the
    log schema requires.
    """
    ts = start_ts_ms
    out: list[SessionLogEntry] = []

    def emit(kind: str, payload: dict) -> None:
        nonlocal ts
        ts += 1
        out.append(
            SessionLogEntry(
                session_id=session_id, ts_ms=ts, layout=layout, mode=mode, kind=kind, payload=payload
            )
        )

    emit(
        "session_start",
        {"seed": seed, "targets": [r.target for r in records], "decisions": len(records)},
    )
    for d, record in enumerate(records):
        for q in record.queries:
            emit(
                "query_shown",
                {"decision": d, "node_path": list(q.node_path), "query_index": q.query_index},
            )
            emit(
                "response",
                {
                    "decision": d,
                    "node_path": list(q.node_path),
                    "query_index": q.query_index,
                    "response": q.response,
                    "duration_ms": q.duration_s * 1000.0,
                },
            )
        emit(
            "decision",
            {
                "decision": d,
                "target": record.target,
                "selected": record.selected,
                "duration_ms": record.total_time_s * 1000.0,
                "correct": record.correct,
            },
        )
    emit("session_end", {})
    return out
