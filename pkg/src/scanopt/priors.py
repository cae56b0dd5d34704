"""Probability distributions over selectable characters.

A scanning keyboard selects from a fixed alphabet; everything downstream
(layout construction, tree optimization, simulation) is driven by one
prior probability per symbol.  The standard alphabet here is the 26
lowercase letters plus ``_`` (space) and ``<`` (backspace).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ScanoptError

SPACE = "_"
BACKSPACE = "<"
LETTERS = tuple("abcdefghijklmnopqrstuvwxyz")
ALPHABET = LETTERS + (SPACE, BACKSPACE)

PROB_SUM_TOL = 1e-9


class PriorError(ScanoptError):
    """Invalid prior contents or malformed prior file."""


@dataclass(frozen=True)
class CharacterPrior:
    """Ordered list of (symbol, probability) pairs summing to one."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise PriorError("prior must contain at least one symbol")
        seen: set[str] = set()
        total = 0.0
        for symbol, p in self.entries:
            if not isinstance(symbol, str) or len(symbol) != 1:
                raise PriorError(f"symbol {symbol!r} is not a single character")
            if symbol in seen:
                raise PriorError(f"duplicate symbol {symbol!r}")
            seen.add(symbol)
            if not (p >= 0.0):
                raise PriorError(f"symbol {symbol!r} has negative probability {p!r}")
            total += p
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise PriorError(f"probabilities sum to {total!r}, expected 1 within {PROB_SUM_TOL}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "CharacterPrior":
        return cls(tuple((s, float(p)) for s, p in pairs))

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.entries)

    def probability(self, symbol: str) -> float:
        for s, p in self.entries:
            if s == symbol:
                return p
        raise KeyError(symbol)

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def by_probability(self) -> tuple[tuple[str, float], ...]:
        """Entries sorted by descending probability, ties by codepoint."""
        return tuple(sorted(self.entries, key=lambda e: (-e[1], e[0])))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, symbol: str) -> bool:
        return any(s == symbol for s, _ in self.entries)


def default_letter_frequencies() -> dict[str, float]:
    """Relative frequencies of a-z shipped with the package."""
    text = resources.files("scanopt.data").joinpath("english_letter_frequencies.json").read_text()
    return {k: float(v) for k, v in json.loads(text)["frequencies"].items()}


def build_english_prior(
    letter_freqs: Mapping[str, float] | None = None,
    avg_word_len: float = 4.79,
    backspace_p: float = 0.05,
) -> CharacterPrior:
    """Construct the spelling prior from letter frequencies.

    Words of ``avg_word_len`` letters are separated by single spaces, so
    space takes a 1/(avg_word_len+1) share.  Letters are normalized and
    take the remaining word-character share.  Both are then scaled by
    (1 - backspace_p) to make room for the backspace symbol.  When
    ``backspace_p`` is zero, no backspace entry is emitted.
    """
    if letter_freqs is None:
        letter_freqs = default_letter_frequencies()
    if not letter_freqs:
        raise PriorError("letter_freqs mapping is empty")
    if avg_word_len <= 0:
        raise PriorError(f"avg_word_len must be positive, got {avg_word_len}")
    if not (0.0 <= backspace_p < 1.0):
        raise PriorError(f"backspace_p must be in [0, 1), got {backspace_p}")
    for letter, freq in letter_freqs.items():
        if len(letter) != 1 or not letter.isalpha():
            raise PriorError(f"letter_freqs key {letter!r} is not a letter")
        if not (freq > 0):
            raise PriorError(f"letter {letter!r} has non-positive frequency {freq!r}")

    total = sum(letter_freqs.values())
    letter_share = avg_word_len / (avg_word_len + 1.0)
    space_share = 1.0 / (avg_word_len + 1.0)
    keep = 1.0 - backspace_p

    pairs = [
        (letter, (letter_freqs[letter] / total) * letter_share * keep)
        for letter in sorted(letter_freqs)
    ]
    pairs.append((SPACE, space_share * keep))
    if backspace_p > 0.0:
        pairs.append((BACKSPACE, backspace_p))
    return CharacterPrior.from_pairs(pairs)


def save_prior(prior: CharacterPrior, path: str | Path) -> None:
    doc = {"symbols": [{"char": s, "p": p} for s, p in prior.entries]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_prior(path: str | Path) -> CharacterPrior:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PriorError(f"cannot read prior file {path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("symbols"), list):
        raise PriorError(f"prior file {path} must be an object with a 'symbols' array")
    pairs = []
    for i, item in enumerate(doc["symbols"]):
        if not isinstance(item, dict) or "char" not in item or "p" not in item:
            raise PriorError(f"symbols[{i}] must be an object with 'char' and 'p'")
        char, p = item["char"], item["p"]
        if not isinstance(char, str) or len(char) != 1:
            raise PriorError(f"symbols[{i}].char {char!r} is not a single character")
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise PriorError(f"symbols[{i}].p {p!r} is not a number")
        pairs.append((char, float(p)))
    return CharacterPrior.from_pairs(pairs)
