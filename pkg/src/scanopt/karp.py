"""Exact minimum-EQPD prefix-free codes with integer trial costs.

The search space is every decision tree whose nodes carry unique
positive-integer edge costs; the objective is the prior-weighted sum of
codeword costs (EQPD).  With the cost of the c-th query fixed at c this
is optimal prefix-free coding with unequal, integer letter costs, the
problem solved by Karp and later sped up by Golin-style dynamic
programming over tree level profiles.

The solver works on a level grid: an edge of cost c spans c levels, so
every node sits at the level equal to its codeword cost.  Crossing a
level charges the total probability mass not yet placed at a leaf,
which telescopes to the EQPD.  A state tracks how many of the most
probable symbols are placed (greedy placement is optimal by exchange)
plus the number of pending child slots at each of the next n levels.
The per-level transition picks how many arriving slots become leaves
(t) and how many become internal nodes (k); an internal node opens one
slot at each of the following n levels.

``karp_optimize`` restricts edge costs to a fixed alphabet {1..n} and
tracks pending slots per upcoming level.  ``karp_optimize_unbounded``
solves the real problem (any positive integer cost) with a collapsed
state: without a cost ceiling an internal node feeds one fresh slot to
every later level, so only the count of internal nodes matters.  Both
agree at n = N, since a node never needs more than N children once its
child costs are renumbered contiguously.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ScanoptError
from .priors import CharacterPrior
from .tree import TreeNode, eqpd, tree_to_codewords, codeword_cost

PRUNE_TIE_TOL = 1e-12  # keeps exact-tie paths alive under incumbent pruning
_BRUTE_FORCE_MAX_SYMBOLS = 7


class KarpError(ScanoptError):
    """Invalid optimizer parameters."""


@dataclass(frozen=True)
class DpState:
    """Symbols placed so far plus pending slot counts per upcoming level."""

    placed: int
    profile: tuple[int, ...]


@dataclass(frozen=True)
class KarpResult:
    tree: TreeNode
    eqpd: float
    n_used: int
    max_codeword_cost: int


def _ranked(prior: CharacterPrior) -> tuple[list[str], list[float]]:
    entries = prior.by_probability()
    return [s for s, _ in entries], [p for _, p in entries]


def _unplaced_mass(probs: list[float]) -> list[float]:
    """unplaced[m] = probability mass of all but the m most likely symbols."""
    out = [1.0]
    acc = 0.0
    for p in probs:
        acc += p
        out.append(max(0.0, 1.0 - acc))
    out[len(probs)] = 0.0
    return out


def _completion_bound(m: int, profile: tuple[int, ...], unplaced: list[float], n_symbols: int) -> float:
    """Admissible lower bound on the cost to finish from a state.

    Relaxation: every slot that ever arrives may act as a leaf and an
    internal node at once, and an internal node feeds every later level.
    Arrival capacity then grows at least as fast as in any real tree, so
    charging the unplaced mass per relaxed level under-counts the true
    remaining cost.  Returns +inf when no capacity can ever arrive.
    """
    total = 0.0
    placed = m
    grown = 0
    j = 0
    npro = len(profile)
    while placed < n_symbols:
        arrivals = (profile[j] if j < npro else 0) + grown
        if arrivals <= 0 and j >= npro:
            return float("inf")
        total += unplaced[placed]
        grown += arrivals
        placed = min(n_symbols, placed + arrivals)
        j += 1
    return total


def karp_optimize(
    prior: CharacterPrior, n: int, upper_bound: float | None = None
) -> KarpResult:
    """Minimum-EQPD tree using edge costs from {1..n} only.

    ``upper_bound`` may carry a known-achievable EQPD (for example the
    optimum at a smaller n); it only prunes, never changes the result.
    """
    symbols, probs = _ranked(prior)
    n_symbols = len(symbols)
    if n_symbols == 1:
        return KarpResult(TreeNode.leaf(symbols[0]), 0.0, 0, 0)
    if n < 2:
        raise KarpError(
            f"need at least two distinct trial costs for {n_symbols} symbols "
            "(a single repeated cost cannot stay prefix free)"
        )

    unplaced = _unplaced_mass(probs)
    decisions = _solve_levels(n, n_symbols, unplaced, upper_bound)
    tree = _reconstruct(decisions, symbols, probs, n)
    value = eqpd(tree, prior)
    max_cost = max(codeword_cost(cw) for cw in tree_to_codewords(tree).values())
    return KarpResult(tree, value, n, max_cost)


def _solve_levels(
    n: int, n_symbols: int, unplaced: list[float], upper_bound: float | None
) -> list[tuple[int, int]]:
    """Forward DP over levels; returns the (t, k) decision per level.

    States are (placed, profile); level L tables map a state to its best
    (cost, parent state, t, k).  The level index makes the graph acyclic
    (profiles alone can revisit themselves through expansion-only moves).
    No optimal tree needs a leaf deeper than 2N-2 levels: renumbering a
    node's child costs contiguously never raises any codeword cost, and
    on a contiguous root-to-leaf path each edge cost is at most the
    shrinking subtree size.
    """
    level_cap = 2 * n_symbols - 2
    init = DpState(0, (1,) * n)
    terminal = DpState(n_symbols, ())
    tables: list[dict[DpState, tuple[float, DpState | None, int, int]]] = [
        {init: (0.0, None, 0, 0)}
    ]
    incumbent = float("inf") if upper_bound is None else upper_bound
    best: tuple[float, int] | None = None  # (cost, level)

    for level in range(1, level_cap + 1):
        prev = tables[-1]
        cur: dict[DpState, tuple[float, DpState | None, int, int]] = {}
        for state in sorted(prev, key=lambda s: (s.placed, s.profile)):
            if state.placed == n_symbols:
                continue
            g0 = prev[state][0]
            m, profile = state.placed, state.profile
            charge = unplaced[m]
            if g0 + charge > incumbent + PRUNE_TIE_TOL:
                continue
            if g0 + _completion_bound(m, profile, unplaced, n_symbols) > incumbent + PRUNE_TIE_TOL:
                continue
            g1 = g0 + charge
            arrivals = profile[0]
            tail = profile[1:]
            for t in range(0, min(arrivals, n_symbols - m) + 1):
                remaining = n_symbols - m - t
                if remaining == 0:
                    entry = cur.get(terminal)
                    if entry is None or g1 < entry[0]:
                        cur[terminal] = (g1, state, t, 0)
                    break
                cap = remaining
                for k in range(0, min(arrivals - t, remaining // 2) + 1):
                    nxt = DpState(
                        m + t,
                        tuple(b + k if b + k < cap else cap for b in tail)
                        + (k if k < cap else cap,),
                    )
                    entry = cur.get(nxt)
                    if entry is None or g1 < entry[0]:
                        cur[nxt] = (g1, state, t, k)
        if not cur:
            tables.append(cur)
            break
        term = cur.get(terminal)
        if term is not None:
            if best is None or term[0] < best[0]:
                best = (term[0], level)
                incumbent = min(incumbent, term[0])
        tables.append(cur)

    if best is None:
        raise KarpError(f"no feasible tree for {n_symbols} symbols with costs 1..{n}")

    # walk parent pointers back from the first best terminal
    decisions: list[tuple[int, int]] = []
    state: DpState | None = DpState(n_symbols, ())
    for level in range(best[1], 0, -1):
        cost, parent, t, k = tables[level][state]
        decisions.append((t, k))
        state = parent
    decisions.reverse()
    return decisions


class _Builder:
    __slots__ = ("symbol", "children")

    def __init__(self, symbol: str | None = None):
        self.symbol = symbol
        self.children: list[tuple[int, "_Builder"]] = []


def _reconstruct(
    decisions: list[tuple[int, int]], symbols: list[str], probs: list[float], n: int
) -> TreeNode:
    """Replay the per-level decisions into an actual tree.

    Pending slots are consumed FIFO in parent-creation order: at each
    level the first t arriving slots take the next t most probable
    symbols, the next k become internal nodes, the rest are discarded.
    Child costs are then renumbered contiguously; on an optimal play the
    renumbering is a no-op for the objective, which is asserted.
    """
    root = _Builder()
    slots: dict[int, list[tuple[_Builder, int]]] = {}
    for c in range(1, n + 1):
        slots.setdefault(c, []).append((root, c))
    placed = 0
    for level, (t, k) in enumerate(decisions, 1):
        arriving = slots.pop(level, [])
        if t + k > len(arriving):
            raise AssertionError("DP emitted more placements than pending slots")
        for parent, cost in arriving[:t]:
            parent.children.append((cost, _Builder(symbols[placed])))
            placed += 1
        for parent, cost in arriving[t : t + k]:
            node = _Builder()
            parent.children.append((cost, node))
            for c in range(1, n + 1):
                slots.setdefault(level + c, []).append((node, c))
    if placed != len(symbols):
        raise AssertionError("DP decisions did not place every symbol")
    return _finalize(root, symbols, probs)


def _finalize(root: _Builder, symbols: list[str], probs: list[float]) -> TreeNode:
    """Prune childless internals, renumber costs contiguously, keep the value.

    A discarded slot can leave a gap in a node's child costs; renumbering
    to 1..k closes it.  On an optimal play a positive-mass gap is
    impossible (closing it would beat the optimum), so the objective must
    not move; a shift beyond tolerance flags a solver bug.
    """
    prob_of = dict(zip(symbols, probs))

    def value(node: _Builder, depth: int) -> float:
        if node.symbol is not None:
            return prob_of[node.symbol] * depth
        return sum(value(ch, depth + c) for c, ch in node.children)

    def prune(node: _Builder) -> bool:
        if node.symbol is not None:
            return True
        node.children = [(c, ch) for c, ch in node.children if prune(ch)]
        return bool(node.children)

    raw_value = value(root, 0)
    if not prune(root):
        raise AssertionError("reconstruction produced an empty tree")

    def compact(node: _Builder) -> TreeNode:
        if node.symbol is not None:
            return TreeNode.leaf(node.symbol)
        ordered = sorted(node.children, key=lambda c: c[0])
        return TreeNode.internal(
            (i, compact(ch)) for i, (_, ch) in enumerate(ordered, 1)
        )

    tree = compact(root)

    def tree_value(node: TreeNode, depth: int) -> float:
        if node.is_leaf:
            return prob_of[node.symbol] * depth  # type: ignore[index]
        return sum(tree_value(ch, depth + c) for c, ch in node.children)

    final_value = tree_value(tree, 0)
    if abs(final_value - raw_value) > 1e-9:
        raise AssertionError(
            f"cost renumbering changed the objective ({raw_value} -> {final_value}); "
            "the optimizer solution was not optimal"
        )
    return tree


def karp_optimize_unbounded(prior: CharacterPrior) -> KarpResult:
    """Optimize over the unbounded cost alphabet {1, 2, ...} exactly.

    Incrementing n and re-checking a max-cost certificate can stop too
    early: the objective may plateau for several n and then drop again
    (e.g. probabilities (0.291, 0.031, 0.305, 0.131, 0.242) tie at
    n = 3 and 4 with max codeword cost n + 1, yet the flat tree at
    n = 5 is strictly better).  Instead the unbounded problem is solved
    directly: with no cost ceiling, an internal node offers exactly one
    fresh child slot at every later level, so per-level arrivals equal
    the number of internal nodes created so far and the state collapses
    to (symbols placed, internal nodes created).  Idle levels can always
    be deleted from a tree without raising any codeword cost, so
    transitions with t = k = 0 are skipped, which makes the state graph
    acyclic.  The result equals the fixed-alphabet optimum at n = N,
    since no node ever needs more than N children.
    """
    symbols, probs = _ranked(prior)
    n_symbols = len(symbols)
    if n_symbols == 1:
        return KarpResult(TreeNode.leaf(symbols[0]), 0.0, 0, 0)

    unplaced = _unplaced_mass(probs)
    memo: dict[tuple[int, int], tuple[float, int, int]] = {}
    # every internal node roots at least two symbols in a canonical
    # optimal tree, so at most N - 1 of them ever exist
    max_internal = n_symbols - 1

    def solve(m: int, created: int) -> float:
        """Cost to go with m symbols placed and ``created`` internal nodes."""
        if m == n_symbols:
            return 0.0
        hit = memo.get((m, created))
        if hit is not None:
            return hit[0]
        charge = unplaced[m]
        best = float("inf")
        best_t = best_k = -1
        for t in range(0, min(created, n_symbols - m) + 1):
            remaining = n_symbols - m - t
            if remaining == 0:
                if charge < best:
                    best, best_t, best_k = charge, t, 0
                break
            k_cap = min(created - t, remaining // 2, max_internal - created)
            for k in range(0 if t > 0 else 1, k_cap + 1):
                value = charge + solve(m + t, created + k)
                if value < best:
                    best, best_t, best_k = value, t, k
        memo[(m, created)] = (best, best_t, best_k)
        return best

    solve(0, 1)

    # replay the decisions; each internal node contributes the slot at
    # cost (level - creation level), consumed FIFO by creation order
    builders: list[tuple[_Builder, int]] = [(_Builder(), 0)]
    placed = 0
    created = 1
    level = 0
    while placed < n_symbols:
        _, t, k = memo[(placed, created)]
        level += 1
        arrivals = [(b, level - lv) for b, lv in builders]
        for b, cost in arrivals[:t]:
            b.children.append((cost, _Builder(symbols[placed])))
            placed += 1
        for b, cost in arrivals[t : t + k]:
            node = _Builder()
            b.children.append((cost, node))
            builders.append((node, level))
        created += k

    root = builders[0][0]
    tree = _finalize(root, symbols, probs)
    value = eqpd(tree, prior)
    max_cost = max(codeword_cost(cw) for cw in tree_to_codewords(tree).values())
    n_used = max(len(node.children) for _, node in _walk_internal(tree))
    return KarpResult(tree, value, n_used, max_cost)


def brute_force_optimal(prior: CharacterPrior, max_cost: int) -> KarpResult:
    """Exhaustive oracle over every prefix-free tree, tiny alphabets only.

    Enumerates ordered set partitions of the symbols into k >= 2 groups
    at contiguous costs 1..k, recursively; contiguity loses nothing
    because remapping gapped costs onto 1..k never raises a codeword
    cost.  Branches whose codewords would exceed ``max_cost`` are
    pruned, so ``max_cost`` must be generous enough to contain an
    optimum (2N - 2 always is).
    """
    entries = list(prior.entries)
    n_symbols = len(entries)
    if n_symbols > _BRUTE_FORCE_MAX_SYMBOLS:
        raise KarpError(
            f"brute force supports at most {_BRUTE_FORCE_MAX_SYMBOLS} symbols, got {n_symbols}"
        )
    if n_symbols == 1:
        return KarpResult(TreeNode.leaf(entries[0][0]), 0.0, 0, 0)
    if max_cost < 2:
        raise KarpError("max_cost must be at least 2 for a multi-symbol alphabet")

    probs = [p for _, p in entries]
    mass: list[float] = [0.0] * (1 << n_symbols)
    for mask in range(1, 1 << n_symbols):
        low = mask & -mask
        mass[mask] = mass[mask ^ low] + probs[low.bit_length() - 1]

    INF = float("inf")

    def min_depth_fits(count: int, budget: int) -> bool:
        # at most 2**(d-1) symbols fit with every codeword cost <= d
        return count <= 1 << max(budget - 1, 0)

    node_memo: dict[tuple[int, int], tuple[float, tuple]] = {}
    seq_memo: dict[tuple[int, int, int], tuple[float, tuple]] = {}

    def group_value(group: int, cost: int, budget: int) -> tuple[float, tuple | None]:
        if cost > budget:
            return INF, None
        if group & (group - 1) == 0:  # singleton
            return probs[group.bit_length() - 1] * cost, ("leaf", group)
        sub_budget = budget - cost
        if not min_depth_fits(bin(group).count("1"), sub_budget):
            return INF, None
        value, spec = node_value(group, sub_budget)
        return mass[group] * cost + value, spec

    def seq_value(rest: int, cost: int, budget: int) -> tuple[float, tuple]:
        """Best split of ``rest`` into groups at costs cost, cost+1, ..."""
        key = (rest, cost, budget)
        hit = seq_memo.get(key)
        if hit is not None:
            return hit
        best_v = INF
        best_spec: tuple = ()
        sub = rest
        while sub:
            v, spec = group_value(sub, cost, budget)
            if v < INF:
                other = rest ^ sub
                if other:
                    rv, rspec = seq_value(other, cost + 1, budget)
                    if v + rv < best_v:
                        best_v = v + rv
                        best_spec = ((sub, spec),) + rspec
                else:
                    if v < best_v:
                        best_v = v
                        best_spec = ((sub, spec),)
            sub = (sub - 1) & rest
        out = (best_v, best_spec)
        seq_memo[key] = out
        return out

    def node_value(mask: int, budget: int) -> tuple[float, tuple]:
        key = (mask, budget)
        hit = node_memo.get(key)
        if hit is not None:
            return hit
        best_v = INF
        best_spec: tuple = ()
        first = mask
        while first:
            if first != mask:  # at least two groups
                v1, spec1 = group_value(first, 1, budget)
                if v1 < INF:
                    rv, rspec = seq_value(mask ^ first, 2, budget)
                    if v1 + rv < best_v:
                        best_v = v1 + rv
                        best_spec = ((first, spec1),) + rspec
            first = (first - 1) & mask
        out = (best_v, best_spec)
        node_memo[key] = out
        return out

    value, spec = node_value((1 << n_symbols) - 1, max_cost)
    if value == INF:
        raise KarpError(f"no prefix-free tree fits within max_cost={max_cost}")

    def build(groups: tuple) -> TreeNode:
        children = []
        for cost, (group, sub) in enumerate(groups, 1):
            if sub is not None and sub[0] == "leaf":
                children.append((cost, TreeNode.leaf(entries[sub[1].bit_length() - 1][0])))
            else:
                children.append((cost, build(sub)))
        return TreeNode.internal(children)

    tree = build(spec)
    result_value = eqpd(tree, prior)
    max_cw = max(codeword_cost(cw) for cw in tree_to_codewords(tree).values())
    n_used = max(
        (len(node.children) for _, node in _walk_internal(tree)), default=0
    )
    if abs(result_value - value) > 1e-9:
        raise AssertionError("oracle reconstruction does not match its own value")
    return KarpResult(tree, result_value, n_used, max_cw)


def _walk_internal(tree: TreeNode):
    stack = [((), tree)]
    while stack:
        path, node = stack.pop()
        if not node.is_leaf:
            yield path, node
            for c, ch in node.children:
                stack.append((path + (c,), ch))
