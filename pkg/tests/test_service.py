import json
import threading
import urllib.error
import urllib.request

import pytest

from scanopt import (
    CharacterPrior,
    SimConfig,
    TimingParams,
    TreeNode,
    UserModel,
    sample_targets,
    simulate_session,
)
from scanopt.service import ScanService, make_server
from scanopt.sessions import events_from_records
from scanopt.tree import Layout


@pytest.fixture()
def tiny_world(tmp_path):
    prior = CharacterPrior.from_pairs([("a", 0.4), ("b", 0.3), ("c", 0.2), ("d", 0.1)])
    tree = TreeNode.internal((i, TreeNode.leaf(s)) for i, s in enumerate("abcd", 1))
    layouts = {"flat": Layout(name="flat", tree=tree)}
    log_path = tmp_path / "sessions.jsonl"
    return prior, layouts, log_path


def start(service):
    server = make_server(service, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://127.0.0.1:{server.server_address[1]}"


def get_json(url):
    with urllib.request.urlopen(url) as resp:
        return json.loads(resp.read().decode())


def post_json(url, doc):
    req = urllib.request.Request(
        url, data=json.dumps(doc).encode(), headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read().decode())


def status_of(fn):
    try:
        fn()
    except urllib.error.HTTPError as err:
        return err.code
    return 200


def test_roster_and_documents(tiny_world):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    server, base = start(service)
    try:
        roster = get_json(f"{base}/api/layouts")
        assert roster["scan_delay_s"] == 1.2
        assert [l["name"] for l in roster["layouts"]] == ["flat"]
        assert roster["layouts"][0]["eqpd"] == pytest.approx(
            0.4 * 1 + 0.3 * 2 + 0.2 * 3 + 0.1 * 4
        )
        doc = get_json(f"{base}/api/layouts/flat")
        assert doc["name"] == "flat"
        assert doc["version"] == 1
        prior_doc = get_json(f"{base}/api/prior")
        assert prior_doc["symbols"][0] == {"char": "a", "p": 0.4}
        assert status_of(lambda: get_json(f"{base}/api/layouts/nope")) == 404
    finally:
        server.shutdown()


def test_default_roster_has_all_layouts(tmp_path, english_prior):
    service = ScanService(prior=english_prior, log_path=tmp_path / "log.jsonl")
    names = {l["name"] for l in service.roster()["layouts"]}
    assert names == {
        "row-item-alpha",
        "row-item-opt",
        "bri-alpha",
        "bri-opt",
        "acat",
        "hex",
        "karp",
    }


def test_session_lifecycle_and_summary(tiny_world):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    server, base = start(service)
    try:
        created = post_json(
            f"{base}/api/sessions", {"layout": "flat", "mode": "timed", "seed": 5, "decisions": 3}
        )
        sid = created["session_id"]
        targets = created["target_sequence"]
        assert targets == sample_targets(prior, 5, 3)

        # perfect run: each decision answers yes at the target position
        ts = 10
        events = []
        positions = {s: i for i, s in enumerate("abcd", 1)}
        for d, target in enumerate(targets):
            pos = positions[target]
            for q in range(1, pos + 1):
                events.append(
                    {
                        "session_id": sid,
                        "ts_ms": (ts := ts + 1),
                        "layout": "flat",
                        "mode": "timed",
                        "kind": "query_shown",
                        "payload": {"decision": d, "node_path": [], "query_index": q},
                    }
                )
                events.append(
                    {
                        "session_id": sid,
                        "ts_ms": (ts := ts + 1),
                        "layout": "flat",
                        "mode": "timed",
                        "kind": "response",
                        "payload": {
                            "decision": d,
                            "node_path": [],
                            "query_index": q,
                            "response": q == pos,
                            "duration_ms": 1200.0,
                        },
                    }
                )
            events.append(
                {
                    "session_id": sid,
                    "ts_ms": (ts := ts + 1),
                    "layout": "flat",
                    "mode": "timed",
                    "kind": "decision",
                    "payload": {
                        "decision": d,
                        "target": target,
                        "selected": target,
                        "duration_ms": 1200.0 * pos,
                    },
                }
            )
        out = post_json(f"{base}/api/sessions/{sid}/events", {"events": events})
        assert out["appended"] == len(events)
        summary = get_json(f"{base}/api/sessions/{sid}/summary")
        assert summary["accuracy"] == 1.0
        assert summary["num_decisions"] == 3
        assert summary["mean_rollovers"] == 0.0

        assert status_of(lambda: get_json(f"{base}/api/sessions/ghost/summary")) == 404
        assert (
            status_of(lambda: post_json(f"{base}/api/sessions/ghost/events", {"events": events}))
            == 404
        )
    finally:
        server.shutdown()


def test_unknown_layout_404(tiny_world):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    server, base = start(service)
    try:
        assert (
            status_of(
                lambda: post_json(
                    f"{base}/api/sessions", {"layout": "nope", "mode": "timed", "seed": 1}
                )
            )
            == 404
        )
    finally:
        server.shutdown()


def test_malformed_batch_applies_nothing(tiny_world):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    server, base = start(service)
    try:
        created = post_json(
            f"{base}/api/sessions", {"layout": "flat", "mode": "timed", "seed": 1, "decisions": 1}
        )
        sid = created["session_id"]
        good = {
            "session_id": sid,
            "ts_ms": 100,
            "layout": "flat",
            "mode": "timed",
            "kind": "query_shown",
            "payload": {"decision": 0, "node_path": [], "query_index": 1},
        }
        bad = {"session_id": sid, "kind": "response"}
        assert (
            status_of(lambda: post_json(f"{base}/api/sessions/{sid}/events", {"events": [good, bad]}))
            == 400
        )
        # nothing from the batch may have landed
        entries = list(service.log.read(sid))
        assert [e.kind for e in entries] == ["session_start"]
        # the good event alone still works afterwards
        out = post_json(f"{base}/api/sessions/{sid}/events", {"events": [good]})
        assert out["appended"] == 1
    finally:
        server.shutdown()


def test_event_order_enforced(tiny_world):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    server, base = start(service)
    try:
        created = post_json(
            f"{base}/api/sessions", {"layout": "flat", "mode": "timed", "seed": 1, "decisions": 1}
        )
        sid = created["session_id"]
        decision_first = {
            "session_id": sid,
            "ts_ms": 50,
            "layout": "flat",
            "mode": "timed",
            "kind": "decision",
            "payload": {"decision": 0, "target": "a", "selected": "a", "duration_ms": 1.0},
        }
        assert (
            status_of(
                lambda: post_json(f"{base}/api/sessions/{sid}/events", {"events": [decision_first]})
            )
            == 400
        )
    finally:
        server.shutdown()


def test_summary_survives_restart(tiny_world, english_prior):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    created = service.create_session({"layout": "flat", "mode": "timed", "seed": 9, "decisions": 4})
    sid = created["session_id"]
    cfg = SimConfig(
        user=UserModel(0.9, 0.05),
        timing=TimingParams(mode="timed", t_scan=1.2, t_yes=0.5),
        seed=9,
    )
    tree = layouts["flat"].tree
    _, records = simulate_session(tree, prior, cfg, 4, keep_records=True)
    events = events_from_records(sid, "flat", "timed", 9, records, start_ts_ms=1)
    # the service already logged session_start; append the rest
    service.append_events(sid, {"events": [json.loads(e.to_json()) for e in events[1:]]})
    before = service.session_summary(sid)

    # a brand-new process over the same log must answer identically
    reborn = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    after = reborn.session_summary(sid)
    assert after == before


def test_server_side_summary_equals_simulator(tiny_world):
    prior, layouts, log_path = tiny_world
    service = ScanService(prior=prior, layouts=layouts, log_path=log_path)
    created = service.create_session({"layout": "flat", "mode": "timed", "seed": 21, "decisions": 50})
    sid = created["session_id"]
    cfg = SimConfig(
        user=UserModel(0.8, 0.1),
        timing=TimingParams(mode="timed", t_scan=1.2, t_yes=0.5),
        seed=21,
    )
    summary, records = simulate_session(
        layouts["flat"].tree, prior, cfg, 50, keep_records=True
    )
    events = events_from_records(sid, "flat", "timed", 21, records, start_ts_ms=1)
    service.append_events(sid, {"events": [json.loads(e.to_json()) for e in events[1:]]})
    doc = service.session_summary(sid)
    assert doc["accuracy"] == pytest.approx(summary.accuracy, abs=1e-12)
    assert doc["mean_queries"] == pytest.approx(summary.mean_queries, abs=1e-12)
    assert doc["mean_time_s"] == pytest.approx(summary.mean_time_s, rel=1e-9)
    assert doc["mean_rollovers"] == pytest.approx(summary.mean_rollovers, abs=1e-12)
    assert doc["timeouts"] == summary.timeouts
