import itertools
import random

import pytest

from scanopt import (
    CharacterPrior,
    KarpError,
    brute_force_optimal,
    build_layout,
    eqpd,
    karp_optimize,
    karp_optimize_unbounded,
    tree_to_codewords,
    validate_tree,
)
from scanopt.layouts import LAYOUT_NAMES
from scanopt.priors import ALPHABET

from conftest import random_prior

P532 = CharacterPrior.from_pairs([("a", 0.5), ("b", 0.3), ("c", 0.2)])


def test_single_symbol():
    prior = CharacterPrior.from_pairs([("x", 1.0)])
    for result in (karp_optimize_unbounded(prior), brute_force_optimal(prior, 2)):
        assert result.eqpd == 0.0
        assert result.tree.is_leaf
        assert tree_to_codewords(result.tree) == {"x": ()}


def test_brute_force_5_3_2():
    result = brute_force_optimal(P532, max_cost=4)
    assert result.eqpd == pytest.approx(1.7, abs=1e-12)
    # flat tree: three leaf children at costs 1, 2, 3
    assert tree_to_codewords(result.tree) == {"a": (1,), "b": (2,), "c": (3,)}


def test_brute_force_uniform_three():
    prior = CharacterPrior.from_pairs((s, 1 / 3) for s in "abc")
    assert brute_force_optimal(prior, 4).eqpd == pytest.approx(2.0, abs=1e-12)


def test_fixed_alphabet_values_5_3_2():
    r2 = karp_optimize(P532, 2)
    assert r2.eqpd == pytest.approx(2.2, abs=1e-12)
    r3 = karp_optimize(P532, 3)
    assert r3.eqpd == pytest.approx(1.7, abs=1e-12)
    assert tree_to_codewords(r3.tree) == {"a": (1,), "b": (2,), "c": (3,)}


def test_unbounded_does_not_stop_at_plateau():
    # the certificate "max codeword cost <= n+1" holds at n = 2 here
    # (cost 3), yet n = 3 is strictly better; the unbounded result must
    # be the n = 3 optimum
    r2 = karp_optimize(P532, 2)
    assert r2.max_codeword_cost <= 3
    result = karp_optimize_unbounded(P532)
    assert result.eqpd == pytest.approx(1.7, abs=1e-12)
    assert result.eqpd < r2.eqpd


def test_unbounded_beats_multi_step_plateau():
    # eqpd plateaus across n = 3 and n = 4 and then improves at n = 5,
    # so no fixed stagnation window is a sound stopping rule
    prior = CharacterPrior.from_pairs(
        [("a", 0.29), ("b", 0.031), ("c", 0.305), ("d", 0.132), ("e", 0.242)]
    )
    v3 = karp_optimize(prior, 3).eqpd
    v4 = karp_optimize(prior, 4).eqpd
    v5 = karp_optimize(prior, 5).eqpd
    assert v3 == pytest.approx(v4, abs=1e-12)
    assert v5 < v4 - 1e-6
    assert karp_optimize_unbounded(prior).eqpd == pytest.approx(v5, abs=1e-12)


def test_two_symbols():
    prior = CharacterPrior.from_pairs([("a", 0.6), ("b", 0.4)])
    result = karp_optimize_unbounded(prior)
    assert tree_to_codewords(result.tree) == {"a": (1,), "b": (2,)}
    assert result.eqpd == pytest.approx(1.4, abs=1e-12)
    assert result.n_used == 2


def test_exactness_random_priors():
    rng = random.Random(123)
    for _ in range(25):
        n = rng.randint(2, 6)
        prior = random_prior(rng, n)
        dp = karp_optimize_unbounded(prior)
        oracle = brute_force_optimal(prior, max(2, 2 * n - 2))
        assert dp.eqpd == pytest.approx(oracle.eqpd, abs=1e-9)
        assert validate_tree(dp.tree, prior) == []


def test_result_consistency_invariants():
    rng = random.Random(321)
    for _ in range(10):
        prior = random_prior(rng, rng.randint(2, 8))
        result = karp_optimize_unbounded(prior)
        assert result.eqpd == pytest.approx(eqpd(result.tree, prior), abs=1e-9)
        costs = [sum(cw) for cw in tree_to_codewords(result.tree).values()]
        assert result.max_codeword_cost == max(costs)


def test_monotone_in_n():
    rng = random.Random(55)
    for _ in range(10):
        n_sym = rng.randint(3, 7)
        prior = random_prior(rng, n_sym)
        values = [karp_optimize(prior, n).eqpd for n in range(2, n_sym + 1)]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-12


def test_fixed_alphabet_matches_oracle_at_n_cap():
    rng = random.Random(77)
    for _ in range(10):
        n_sym = rng.randint(2, 6)
        prior = random_prior(rng, n_sym)
        dp = karp_optimize(prior, n_sym)
        oracle = brute_force_optimal(prior, max(2, 2 * n_sym - 2))
        assert dp.eqpd == pytest.approx(oracle.eqpd, abs=1e-9)


def test_sorted_assignment_exchange_property():
    # placing symbols in descending probability onto ascending leaf
    # levels is never beaten by any other labeling of the same shape
    rng = random.Random(4242)
    for _ in range(20):
        n = rng.randint(2, 5)
        prior = random_prior(rng, n)
        probs = [p for _, p in prior.entries]
        tree = karp_optimize_unbounded(prior).tree
        levels = sorted(sum(cw) for cw in tree_to_codewords(tree).values())
        greedy = sum(p * l for p, l in zip(sorted(probs, reverse=True), levels))
        best = min(
            sum(p * l for p, l in zip(perm, levels))
            for perm in itertools.permutations(probs)
        )
        assert greedy == pytest.approx(best, abs=1e-12)


def test_dominance_over_layouts():
    rng = random.Random(9)
    for _ in range(3):
        prior = random_prior(rng, 28, ALPHABET)
        karp_value = karp_optimize_unbounded(prior).eqpd
        for name in LAYOUT_NAMES:
            if name == "karp":
                continue
            other = eqpd(build_layout(name, prior), prior)
            assert karp_value <= other + 1e-9, name


def test_zero_probability_symbol():
    prior = CharacterPrior.from_pairs([("a", 0.7), ("b", 0.3), ("c", 0.0)])
    result = karp_optimize_unbounded(prior)
    assert validate_tree(result.tree, prior) == []
    # the zero-mass symbol still occupies a leaf but adds no cost
    assert result.eqpd == pytest.approx(
        brute_force_optimal(prior, 4).eqpd, abs=1e-9
    )


def test_parameter_errors():
    with pytest.raises(KarpError):
        karp_optimize(P532, 1)
    big = CharacterPrior.from_pairs((s, 1 / 8) for s in "abcdefgh")
    with pytest.raises(KarpError):
        brute_force_optimal(big, 6)
    with pytest.raises(KarpError):
        brute_force_optimal(P532, 1)


def test_brute_force_infeasible_budget():
    prior = CharacterPrior.from_pairs((s, 0.25) for s in "abcd")
    with pytest.raises(KarpError, match="max_cost"):
        brute_force_optimal(prior, 2)
