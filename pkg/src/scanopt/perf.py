"""Closed-form user performance on a decision tree.

A user is modeled per query by a probability of detection (answering
yes when the target is shown) and of false alarm (yes when it is not).
Successive queries are independent.  When a whole pass over a trial's
query sets draws no yes, the trial repeats, which gives the geometric
rollover correction in :func:`trial_select_prob`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ScanoptError
from .priors import CharacterPrior
from .tree import TreeNode, ensure_valid_tree

TIMED = "timed"
BINARY = "binary"


class PerfError(ScanoptError):
    """Invalid user model, timing parameters, or degenerate inputs."""


@dataclass(frozen=True)
class UserModel:
    """Per-query yes probabilities: pd on target, pfa off target."""

    pd: float
    pfa: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.pd <= 1.0):
            raise PerfError(f"pd must be in [0, 1], got {self.pd}")
        if not (0.0 <= self.pfa <= 1.0):
            raise PerfError(f"pfa must be in [0, 1], got {self.pfa}")


@dataclass(frozen=True)
class TimingParams:
    """Query durations: scan delay, yes latency, and binary no latency."""

    mode: str = TIMED
    t_scan: float = 1.2
    t_yes: float = 0.5
    t_no: float = 0.5

    def __post_init__(self) -> None:
        if self.mode not in (TIMED, BINARY):
            raise PerfError(f"mode must be '{TIMED}' or '{BINARY}', got {self.mode!r}")
        for name in ("t_scan", "t_yes", "t_no"):
            if not (getattr(self, name) > 0):
                raise PerfError(f"{name} must be positive, got {getattr(self, name)}")
        if self.mode == TIMED and self.t_yes > self.t_scan:
            raise PerfError(
                f"in timed mode the yes latency ({self.t_yes}) cannot exceed "
                f"the scan delay ({self.t_scan})"
            )

    @property
    def t_negative(self) -> float:
        return self.t_scan if self.mode == TIMED else self.t_no


def trial_select_prob_first_pass(user: UserModel, i: int) -> float:
    """P(select the i-th query set on the first pass): i-1 nos then a yes."""
    if i < 1:
        raise PerfError(f"query index must be >= 1, got {i}")
    return (1.0 - user.pfa) ** (i - 1) * user.pd


def trial_select_prob(user: UserModel, i: int, n_queries: int) -> float:
    """P(select the i-th of n query sets), counting repeated passes.

    Summing the geometric series over full missed passes divides the
    first-pass probability by 1 - (1-pfa)^(n-1) * (1-pd).
    """
    if not (1 <= i <= n_queries):
        raise PerfError(f"query index {i} outside 1..{n_queries}")
    denom = 1.0 - (1.0 - user.pfa) ** (n_queries - 1) * (1.0 - user.pd)
    if denom <= 0.0:
        raise PerfError(
            "selection probability undefined: the user never responds "
            f"(pd={user.pd}, pfa={user.pfa})"
        )
    return trial_select_prob_first_pass(user, i) / denom


def char_accuracy(tree: TreeNode, symbol: str, user: UserModel) -> float:
    """P(decision selects ``symbol``): product of its trial probabilities.

    Each step multiplies the selection probability of the correct child,
    with the trial size taken as that node's child count.
    """
    node = tree
    acc = 1.0
    while not node.is_leaf:
        n_queries = len(node.children)
        chosen = None
        for idx, (cost, child) in enumerate(node.children, 1):
            if symbol in child.symbol_set():
                chosen = (cost, idx, child)
                break
        if chosen is None:
            raise PerfError(f"symbol {symbol!r} not present in the tree")
        cost, idx, child = chosen
        # the trial index is the edge cost; in a compacted tree it equals
        # the child's position, so it never exceeds the trial size
        acc *= trial_select_prob(user, cost, n_queries)
        node = child
    if node.symbol != symbol:
        raise PerfError(f"symbol {symbol!r} not present in the tree")
    return acc


def expected_accuracy(tree: TreeNode, prior: CharacterPrior, user: UserModel) -> float:
    """Prior-weighted character accuracy over the whole alphabet."""
    ensure_valid_tree(tree, prior)
    return sum(p * char_accuracy(tree, sym, user) for sym, p in prior.entries)


def accuracy_grid(
    tree: TreeNode,
    prior: CharacterPrior,
    pd_values: Sequence[float],
    pfa_values: Sequence[float],
) -> list[list[float]]:
    """Expected accuracy for each (pd, pfa); rows follow pd_values."""
    return [
        [expected_accuracy(tree, prior, UserModel(pd, pfa)) for pfa in pfa_values]
        for pd in pd_values
    ]


def grid_to_csv(
    grid: list[list[float]],
    pd_values: Sequence[float],
    pfa_values: Sequence[float],
) -> str:
    r"""Render a grid as CSV: header ``pd\pfa`` then one row per pd."""
    lines = ["pd\\pfa," + ",".join(f"{v:.6g}" for v in pfa_values)]
    for pd, row in zip(pd_values, grid):
        lines.append(f"{pd:.6g}," + ",".join(f"{v:.6g}" for v in row))
    return "\n".join(lines) + "\n"


def expected_decision_time(
    tree: TreeNode, prior: CharacterPrior, timing: TimingParams
) -> float:
    """Expected seconds per error-free decision.

    The trial ending on query j takes j-1 negative responses plus one
    positive one; negatives take the scan delay in timed mode and the
    no latency in binary mode.
    """
    ensure_valid_tree(tree, prior)
    t_neg = timing.t_negative
    total = 0.0
    for path, sym in tree.leaves():
        seconds = sum((j - 1) * t_neg + timing.t_yes for j in path)
        total += prior.probability(sym) * seconds
    return total


def _binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)
