import json

import pytest

from scanopt import (
    SimConfig,
    TimingParams,
    TreeNode,
    UserModel,
    build_row_item_alpha,
    simulate_session,
)
from scanopt.sessions import (
    SessionLog,
    SessionLogEntry,
    SessionLogError,
    events_from_records,
    parse_entry,
    summarize_session,
)


def tiny_tree():
    return TreeNode.internal(
        (i, TreeNode.leaf(s)) for i, s in enumerate("abcd", 1)
    )


def entry(kind, payload, ts=1, sid="s1"):
    return SessionLogEntry(
        session_id=sid, ts_ms=ts, layout="test", mode="timed", kind=kind, payload=payload
    )


def test_log_round_trip(tmp_path):
    log = SessionLog(tmp_path / "log.jsonl")
    entries = [
        entry("session_start", {"seed": 1, "targets": ["a", "b"]}, ts=1),
        entry("query_shown", {"decision": 0, "node_path": [], "query_index": 1}, ts=2),
        entry(
            "response",
            {"decision": 0, "node_path": [], "query_index": 1, "response": True, "duration_ms": 500.0},
            ts=3,
        ),
        entry(
            "decision",
            {"decision": 0, "target": "a", "selected": "a", "duration_ms": 500.0},
            ts=4,
        ),
        entry("session_end", {}, ts=5),
    ]
    log.append(entries)
    back = list(log.read("s1"))
    assert back == entries


def test_parse_entry_rejects_garbage():
    with pytest.raises(SessionLogError):
        parse_entry(["not", "an", "object"])
    with pytest.raises(SessionLogError):
        parse_entry({"session_id": "x"})
    with pytest.raises(SessionLogError):
        parse_entry(
            {
                "session_id": "x",
                "ts_ms": 1,
                "layout": "l",
                "mode": "warp",
                "kind": "decision",
                "payload": {},
            }
        )
    bad = entry("response", {"decision": 0, "node_path": [0], "query_index": 1, "response": True, "duration_ms": 1})
    with pytest.raises(SessionLogError):
        parse_entry(json.loads(bad.to_json()))


def test_summary_matches_simulator(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = SimConfig(
        user=UserModel(0.85, 0.07),
        timing=TimingParams(mode="timed", t_scan=1.2, t_yes=0.5),
        seed=77,
    )
    summary, records = simulate_session(tree, english_prior, cfg, 200, keep_records=True)
    events = events_from_records("sx", "row-item-alpha", "timed", 77, records)
    stats = summarize_session(events, tree)
    assert stats.num_decisions == 200
    assert stats.accuracy == pytest.approx(summary.accuracy, abs=1e-12)
    assert stats.mean_queries == pytest.approx(summary.mean_queries, abs=1e-12)
    assert stats.mean_time_s == pytest.approx(summary.mean_time_s, rel=1e-9)
    assert stats.mean_rollovers == pytest.approx(summary.mean_rollovers, abs=1e-12)
    assert stats.timeouts == summary.timeouts


def test_summary_crafted_one_missed_pass():
    # target 'b' sits at query 2 of 4; first pass all no, then no, yes
    tree = tiny_tree()
    script = [
        (1, False),
        (2, False),
        (3, False),
        (4, False),
        (1, False),
        (2, True),
    ]
    events = [entry("session_start", {"seed": 0, "targets": ["b"]}, ts=0)]
    ts = 1
    for pos, yes in script:
        events.append(entry("query_shown", {"decision": 0, "node_path": [], "query_index": pos}, ts=ts))
        ts += 1
        events.append(
            entry(
                "response",
                {
                    "decision": 0,
                    "node_path": [],
                    "query_index": pos,
                    "response": yes,
                    "duration_ms": 1200.0,
                },
                ts=ts,
            )
        )
        ts += 1
    events.append(
        entry(
            "decision",
            {"decision": 0, "target": "b", "selected": "b", "duration_ms": 7200.0},
            ts=ts,
        )
    )
    stats = summarize_session(events, tree)
    assert stats.num_decisions == 1
    assert stats.accuracy == 1.0
    assert stats.mean_rollovers == 1.0
    assert stats.mean_queries == 6.0


def test_summary_presence_not_trusted_from_client():
    # the client cannot fake a rollover by mislabeling presence: the
    # summary recomputes presence from the tree, and with the target at
    # query 1 answered yes immediately there is no rollover
    tree = tiny_tree()
    events = [
        entry("session_start", {"seed": 0, "targets": ["a"]}, ts=0),
        entry("query_shown", {"decision": 0, "node_path": [], "query_index": 1}, ts=1),
        entry(
            "response",
            {"decision": 0, "node_path": [], "query_index": 1, "response": True, "duration_ms": 1.0},
            ts=2,
        ),
        entry(
            "decision",
            {"decision": 0, "target": "a", "selected": "a", "duration_ms": 1.0},
            ts=3,
        ),
    ]
    stats = summarize_session(events, tree)
    assert stats.mean_rollovers == 0.0


def test_empty_session_summary():
    stats = summarize_session([], tiny_tree())
    assert stats.num_decisions == 0
    assert stats.accuracy == 0.0
