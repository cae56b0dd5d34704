import math
import random

import pytest

from scanopt import (
    DecisionRecord,
    QueryEvent,
    SimConfig,
    TimingParams,
    UserModel,
    build_row_item_alpha,
    detect_rollovers,
    eqpd,
    expected_accuracy,
    sample_targets,
    simulate_decision,
    simulate_session,
    tree_to_codewords,
)
from scanopt.rng import derive_stream

from conftest import random_prior
from scanopt.priors import ALPHABET


def config(pd, pfa, seed=7, mode="timed", max_queries=1000):
    return SimConfig(
        user=UserModel(pd, pfa),
        timing=TimingParams(mode=mode, t_scan=1.2, t_yes=0.5, t_no=0.4),
        seed=seed,
        max_queries_per_decision=max_queries,
    )


def test_perfect_user_deterministic_walk(english_prior):
    tree = build_row_item_alpha(english_prior)
    codewords = tree_to_codewords(tree)
    cfg = config(1.0, 0.0)
    for i, target in enumerate(ALPHABET):
        record = simulate_decision(tree, target, cfg, derive_stream(cfg.seed, i))
        assert record.selected == target
        assert len(record.queries) == sum(codewords[target])
        assert record.rollover_count == 0


def test_perfect_user_timing_example(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(1.0, 0.0)
    record = simulate_decision(tree, "n", cfg, derive_stream(1, 1))
    assert record.total_time_s == pytest.approx(4.6)


def test_unresponsive_user_times_out(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(0.0, 0.0, max_queries=50)
    record = simulate_decision(tree, "e", cfg, derive_stream(2, 0))
    assert record.selected is None
    assert record.timed_out
    assert len(record.queries) == 50
    assert not record.correct


def test_session_reproducible(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(0.85, 0.05, seed=2024)
    s1 = simulate_session(tree, english_prior, cfg, 500)
    s2 = simulate_session(tree, english_prior, cfg, 500)
    assert s1 == s2


def test_fast_path_matches_recorded_path(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(0.8, 0.1, seed=99)
    summary_fast = simulate_session(tree, english_prior, cfg, 300)
    summary_rec, records = simulate_session(
        tree, english_prior, cfg, 300, keep_records=True
    )
    assert summary_fast == summary_rec
    # the sampled-trial rollover count must agree with the per-query definition
    for record in records:
        assert record.rollover_count == detect_rollovers(record)


def test_mean_queries_converges_to_eqpd(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(1.0, 0.0, seed=31337)
    n = 20000
    summary = simulate_session(tree, english_prior, cfg, n)
    assert summary.accuracy == 1.0
    assert summary.timeouts == 0
    value = eqpd(tree, english_prior)
    # multinomial sampling noise on the mean codeword cost
    costs = [sum(cw) for cw in tree_to_codewords(tree).values()]
    second = sum(
        english_prior.probability(s) * sum(cw) ** 2
        for s, cw in tree_to_codewords(tree).items()
    )
    sigma = math.sqrt((second - value**2) / n)
    assert abs(summary.mean_queries - value) <= 3 * sigma


def test_no_false_alarms_eventually_selects(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(0.8, 0.0, seed=11)
    summary = simulate_session(tree, english_prior, cfg, 2000)
    assert summary.accuracy == 1.0
    assert summary.mean_queries >= eqpd(tree, english_prior)


def test_errors_only_add_queries(english_prior):
    tree = build_row_item_alpha(english_prior)
    value = eqpd(tree, english_prior)
    summary = simulate_session(tree, english_prior, config(0.85, 0.08, seed=5), 5000)
    assert summary.mean_queries > value


def test_empirical_accuracy_matches_closed_form(english_prior):
    tree = build_row_item_alpha(english_prior)
    n = 20000
    for pd, pfa in [(0.9, 0.05), (0.75, 0.1)]:
        cfg = config(pd, pfa, seed=hash((pd, pfa)) % 2**32)
        summary = simulate_session(tree, english_prior, cfg, n)
        model = expected_accuracy(tree, english_prior, UserModel(pd, pfa))
        sigma = math.sqrt(model * (1 - model) / n)
        assert abs(summary.accuracy - model) <= 3 * sigma


def crafted_record(responses, target_index, n_queries):
    """Build a one-trial record from a no/yes script at a 4-child node."""
    queries = []
    for i, yes in enumerate(responses):
        pos = i % n_queries + 1
        queries.append(
            QueryEvent(
                node_path=(),
                query_index=pos,
                target_present=pos == target_index,
                response=yes,
                duration_s=1.0,
            )
        )
    return DecisionRecord(
        target="t", selected="t", queries=queries, rollover_count=0, total_time_s=1.0
    )


def test_rollover_crafted_single_miss():
    # no to all four sets, then no, yes on the target (i = 2, N = 4)
    record = crafted_record([False] * 4 + [False, True], target_index=2, n_queries=4)
    assert detect_rollovers(record) == 1


def test_rollover_two_full_missed_passes():
    record = crafted_record([False] * 8 + [False, True], target_index=2, n_queries=4)
    assert detect_rollovers(record) == 2


def test_rollover_requires_target_yes():
    # the eventual yes lands on a non-target set: not a rollover
    record = crafted_record([False] * 4 + [True], target_index=2, n_queries=4)
    assert detect_rollovers(record) == 0


def test_rollover_zero_for_perfect_user(english_prior):
    tree = build_row_item_alpha(english_prior)
    summary = simulate_session(tree, english_prior, config(1.0, 0.0, seed=3), 2000)
    assert summary.mean_rollovers == 0.0


def test_rollover_corrected_time_bounded(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(0.7, 0.05, seed=13)
    _, records = simulate_session(tree, english_prior, cfg, 500, keep_records=True)
    t = cfg.timing
    for record in records:
        # removing the full missed passes never makes the time negative
        missed = 0.0
        i = 0
        qs = record.queries
        while i < len(qs):
            j = i
            while j < len(qs) and qs[j].node_path == qs[i].node_path:
                j += 1
            trial = qs[i:j]
            i = j
            k = max(q.query_index for q in trial)
            n_passes = (len(trial) - 1) // k
            missed += sum(
                q.duration_s for q in trial[: n_passes * k] if not q.response
            )
        assert record.total_time_s - missed >= -1e-9
        assert missed <= record.total_time_s


def test_target_sampling_matches_prior():
    rng = random.Random(0)
    prior = random_prior(rng, 6)
    targets = sample_targets(prior, seed=42, count=50000)
    for sym, p in prior.entries:
        freq = targets.count(sym) / len(targets)
        sigma = math.sqrt(p * (1 - p) / len(targets))
        assert abs(freq - p) <= 4 * sigma + 1e-9


def test_binary_mode_durations(english_prior):
    tree = build_row_item_alpha(english_prior)
    cfg = config(1.0, 0.0, mode="binary")
    record = simulate_decision(tree, "n", cfg, derive_stream(0, 0))
    # 3 queries in the row trial (two no at 0.4, one yes at 0.5), then 2
    assert record.total_time_s == pytest.approx((2 * 0.4 + 0.5) + (1 * 0.4 + 0.5))


def test_summary_json_fields(english_prior):
    import json

    tree = build_row_item_alpha(english_prior)
    summary = simulate_session(tree, english_prior, config(0.9, 0.02, seed=1), 50)
    doc = json.loads(summary.to_json())
    assert set(doc) == {
        "accuracy",
        "mean_queries",
        "mean_time_s",
        "mean_rollovers",
        "timeouts",
        "num_decisions",
        "seed",
    }
    assert doc["num_decisions"] == 50
    assert doc["seed"] == 1
