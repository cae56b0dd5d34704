import random

import pytest

from scanopt import (
    CharacterPrior,
    build_english_prior,
    build_layout,
    karp_optimize_unbounded,
)

BASELINE_NAMES = ("row-item-alpha", "row-item-opt", "bri-alpha", "bri-opt", "acat", "hex")


@pytest.fixture(scope="session")
def english_prior():
    return build_english_prior()


@pytest.fixture(scope="session")
def baseline_layouts(english_prior):
    return {name: build_layout(name, english_prior) for name in BASELINE_NAMES}


@pytest.fixture(scope="session")
def karp_english(english_prior):
    return karp_optimize_unbounded(english_prior)


def random_prior(rng: random.Random, n: int, symbols: str | None = None) -> CharacterPrior:
    """Strictly positive random prior over n symbols."""
    if symbols is None:
        symbols = "abcdefghijklmnopqrstuvwxyz_<"[:n]
    weights = [rng.random() + 0.01 for _ in range(n)]
    total = sum(weights)
    return CharacterPrior.from_pairs((s, w / total) for s, w in zip(symbols, weights))
