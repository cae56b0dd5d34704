"""Monte Carlo simulation of a user driving a decision tree.

Each decision walks from the root: the children of the current node are
queried in ascending cost order, the simulated user answers yes with
probability pd when the target is in the queried subtree and pfa when
it is not, a yes descends (even into a wrong subtree), and a pass with
no yes repeats the trial.  A query budget turns pathological walks
(e.g. pd = 0) into recorded timeouts instead of hangs.

Instead of flipping a coin per query, each trial samples the number of
complete missed passes (geometric) and the deciding query position in
one step; the joint law is identical and the per-query trace can be
expanded afterwards when a caller wants full records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .perf import TimingParams, UserModel
from .priors import CharacterPrior
from .rng import Stream, derive_stream
from .tree import TreeNode

_TARGET_STREAM = 0  # decision i uses stream i + 1


@dataclass(frozen=True)
class SimConfig:
    user: UserModel
    timing: TimingParams
    seed: int
    max_queries_per_decision: int = 1000

    def __post_init__(self) -> None:
        if self.max_queries_per_decision < 1:
            raise ValueError("max_queries_per_decision must be >= 1")


@dataclass(frozen=True)
class QueryEvent:
    """One query presentation inside a decision."""

    node_path: tuple[int, ...]
    query_index: int
    target_present: bool
    response: bool
    duration_s: float


@dataclass
class DecisionRecord:
    target: str
    selected: str | None
    queries: list[QueryEvent]
    rollover_count: int
    total_time_s: float

    @property
    def correct(self) -> bool:
        return self.selected == self.target

    @property
    def timed_out(self) -> bool:
        return self.selected is None


@dataclass(frozen=True)
class SessionSummary:
    accuracy: float
    mean_queries: float
    mean_time_s: float
    mean_rollovers: float
    timeouts: int
    num_decisions: int
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "accuracy": self.accuracy,
                "mean_queries": self.mean_queries,
                "mean_time_s": self.mean_time_s,
                "mean_rollovers": self.mean_rollovers,
                "timeouts": self.timeouts,
                "num_decisions": self.num_decisions,
                "seed": self.seed,
            }
        )


class _Walker:
    """Per-tree tables so each simulated decision is a few dict hops."""

    __slots__ = ("paths", "children", "symbols", "target_pos")

    def __init__(self, tree: TreeNode):
        self.paths: list[tuple[int, ...]] = []
        self.children: list[list[tuple[int, int]]] = []  # (cost, child id or ~leaf)
        self.symbols: list[str | None] = []
        self.target_pos: list[dict[str, int]] = []
        self._compile(tree, ())

    def _compile(self, node: TreeNode, path: tuple[int, ...]) -> int:
        idx = len(self.paths)
        self.paths.append(path)
        self.children.append([])
        self.symbols.append(node.symbol)
        self.target_pos.append({})
        if node.is_leaf:
            return idx
        for cost, child in node.children:
            child_idx = self._compile(child, path + (cost,))
            pos = len(self.children[idx]) + 1
            self.children[idx].append((cost, child_idx))
            for sym in child.symbol_set():
                self.target_pos[idx][sym] = pos
        return idx


def _sample_trial(
    rng: Stream, n_queries: int, target_pos: int | None, pd: float, pfa: float
) -> tuple[int | None, int]:
    """Sample (complete missed passes, deciding query position) for one trial.

    Draws exactly two uniforms.  Returns (None, 0) when no yes can ever
    occur (all yes probabilities are zero), which the caller turns into
    a timeout.
    """
    u_pass = rng.random()
    u_pos = rng.random()
    if target_pos is None:
        survive = (1.0 - pfa) ** n_queries
    else:
        survive = (1.0 - pfa) ** (n_queries - 1) * (1.0 - pd)
    if survive >= 1.0:
        return None, 0
    if survive <= 0.0:
        passes = 0
    else:
        # P(passes >= r) = survive ** r
        passes = int(math.log(1.0 - u_pass) / math.log(survive))
    decide_mass = 1.0 - survive
    x = u_pos * decide_mass
    acc = 0.0
    no_prefix = 1.0
    position = 0
    last_possible = 0
    for pos in range(1, n_queries + 1):
        p_yes = pd if pos == target_pos else pfa
        w = no_prefix * p_yes
        if w > 0.0:
            last_possible = pos
            acc += w
            if x < acc:
                position = pos
                break
        no_prefix *= 1.0 - p_yes
    if position == 0:
        position = last_possible  # floating-point tail: take the last feasible query
    return passes, position


def simulate_decision(
    tree: TreeNode, target: str, config: SimConfig, rng_stream: Stream
) -> DecisionRecord:
    """Simulate one decision, returning the full per-query record."""
    walker = tree if isinstance(tree, _Walker) else _Walker(tree)
    selected, n_queries, total_time, rollovers, trace = _run_decision(
        walker, target, config, rng_stream, keep_trace=True
    )
    record = DecisionRecord(
        target=target,
        selected=selected,
        queries=trace,
        rollover_count=rollovers,
        total_time_s=total_time,
    )
    return record


def _run_decision(
    walker: _Walker,
    target: str,
    config: SimConfig,
    rng: Stream,
    keep_trace: bool,
) -> tuple[str | None, int, float, int, list[QueryEvent]]:
    pd, pfa = config.user.pd, config.user.pfa
    timing = config.timing
    t_neg, t_yes = timing.t_negative, timing.t_yes
    budget = config.max_queries_per_decision
    used = 0
    total_time = 0.0
    rollovers = 0
    trace: list[QueryEvent] = []
    node = 0
    if walker.symbols[0] is not None:
        # single-leaf tree selects immediately with no queries
        return walker.symbols[0], 0, 0.0, 0, trace

    while True:
        kids = walker.children[node]
        k = len(kids)
        jpos = walker.target_pos[node].get(target)
        passes, position = _sample_trial(rng, k, jpos, pd, pfa)
        if passes is None:
            needed = budget - used + 1  # force truncation below
        else:
            needed = passes * k + position
        if used + needed > budget:
            # budget exhausted mid-trial: all remaining queries draw no
            left = budget - used
            if keep_trace:
                _expand_queries(trace, walker, node, target, k, left, None, t_neg, t_yes)
            total_time += left * t_neg
            used = budget
            return None, used, total_time, rollovers, trace
        if keep_trace:
            _expand_queries(
                trace, walker, node, target, k, needed, position, t_neg, t_yes
            )
        used += needed
        total_time += (needed - 1) * t_neg + t_yes
        if jpos is not None and position == jpos:
            rollovers += passes  # type: ignore[operator]
        cost, child = kids[position - 1]
        if walker.symbols[child] is not None:
            return walker.symbols[child], used, total_time, rollovers, trace
        node = child


def _expand_queries(
    trace: list[QueryEvent],
    walker: _Walker,
    node: int,
    target: str,
    k: int,
    n_queries: int,
    yes_at: int | None,
    t_neg: float,
    t_yes: float,
) -> None:
    path = walker.paths[node]
    jpos = walker.target_pos[node].get(target)
    for q in range(1, n_queries + 1):
        pos = (q - 1) % k + 1
        is_yes = q == n_queries and yes_at is not None
        trace.append(
            QueryEvent(
                node_path=path,
                query_index=pos,
                target_present=pos == jpos,
                response=is_yes,
                duration_s=t_yes if is_yes else t_neg,
            )
        )


def detect_rollovers(record: DecisionRecord) -> int:
    """Count missed target passes later resolved by a yes on the target set.

    Within one trial (a run of queries at the same node), a complete
    all-no pass that included the target query set counts as a rollover
    when a later pass of that trial ends with a yes on the target set.
    """
    count = 0
    i = 0
    queries = record.queries
    while i < len(queries):
        j = i
        while j < len(queries) and queries[j].node_path == queries[i].node_path:
            j += 1
        trial = queries[i:j]
        i = j
        last = trial[-1]
        if not (last.response and last.target_present):
            continue
        passes: list[list[QueryEvent]] = [[]]
        prev_index = 0
        for q in trial:
            if passes[-1] and q.query_index <= prev_index:
                passes.append([])
            passes[-1].append(q)
            prev_index = q.query_index
        for p in passes[:-1]:
            if any(q.target_present and not q.response for q in p) and not any(
                q.response for q in p
            ):
                count += 1
    return count


def sample_targets(prior: CharacterPrior, seed: int, count: int) -> list[str]:
    """Draw decision targets from the prior using the session's stream 0."""
    rng = derive_stream(seed, _TARGET_STREAM)
    symbols = [s for s, _ in prior.entries]
    cumulative: list[float] = []
    acc = 0.0
    for _, p in prior.entries:
        acc += p
        cumulative.append(acc)
    out = []
    for _ in range(count):
        x = rng.random() * acc
        lo, hi = 0, len(cumulative) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cumulative[mid] > x:
                hi = mid
            else:
                lo = mid + 1
        out.append(symbols[lo])
    return out


def simulate_session(
    tree: TreeNode,
    prior: CharacterPrior,
    config: SimConfig,
    num_decisions: int,
    keep_records: bool = False,
) -> SessionSummary | tuple[SessionSummary, list[DecisionRecord]]:
    """Run seeded decisions with targets drawn from the prior.

    Decision i consumes its own derived stream, so results do not depend
    on evaluation order.  With ``keep_records`` the full per-decision
    records are returned alongside the summary.
    """
    if num_decisions < 1:
        raise ValueError("num_decisions must be >= 1")
    walker = _Walker(tree)
    targets = sample_targets(prior, config.seed, num_decisions)
    correct = 0
    queries_total = 0
    time_total = 0.0
    rollovers_total = 0
    timeouts = 0
    records: list[DecisionRecord] = []
    for i, target in enumerate(targets):
        rng = derive_stream(config.seed, i + 1)
        selected, used, seconds, rollovers, trace = _run_decision(
            walker, target, config, rng, keep_trace=keep_records
        )
        if selected == target:
            correct += 1
        if selected is None:
            timeouts += 1
        queries_total += used
        time_total += seconds
        rollovers_total += rollovers
        if keep_records:
            records.append(
                DecisionRecord(
                    target=target,
                    selected=selected,
                    queries=trace,
                    rollover_count=rollovers,
                    total_time_s=seconds,
                )
            )
    summary = SessionSummary(
        accuracy=correct / num_decisions,
        mean_queries=queries_total / num_decisions,
        mean_time_s=time_total / num_decisions,
        mean_rollovers=rollovers_total / num_decisions,
        timeouts=timeouts,
        num_decisions=num_decisions,
        seed=config.seed,
    )
    if keep_records:
        return summary, records
    return summary
