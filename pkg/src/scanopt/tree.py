"""Decision trees, codewords, and the expected-queries objective.

A decision tree selects one symbol per decision: each internal node is a
trial, its children are the query sets, and the user answers yes/no per
query.  The edge to the child presented on the i-th query costs i
queries, so edge costs within a node must be unique positive integers.
A symbol's codeword is the sequence of edge costs from root to its leaf,
and the expected queries per decision (EQPD) is the prior-weighted sum
of codeword costs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .errors import ScanoptError
from .priors import CharacterPrior

LAYOUT_SCHEMA_VERSION = 1

# A codeword is the ordered tuple of trial indices (edge costs) on the
# path from root to a leaf.  Empty only for a single-symbol alphabet.
Codeword = tuple[int, ...]


class TreeError(ScanoptError):
    """Structural problem in a decision tree."""


class TreeValidationError(TreeError):
    """Tree failed validation; carries one message per problem."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


class PrefixFreeError(TreeError):
    """A codeword set where one codeword prefixes another."""


class LayoutFormatError(TreeError):
    """Layout document violates the serialization schema."""


@dataclass(frozen=True)
class TreeNode:
    """Leaf (symbol set) or internal node (children keyed by edge cost).

    ``children`` is kept sorted by ascending cost; a node is a leaf iff
    ``symbol`` is set, in which case it has no children.
    """

    symbol: str | None = None
    children: tuple[tuple[int, "TreeNode"], ...] = ()

    @staticmethod
    def leaf(symbol: str) -> "TreeNode":
        return TreeNode(symbol=symbol)

    @staticmethod
    def internal(children: Iterator[tuple[int, "TreeNode"]] | list[tuple[int, "TreeNode"]]) -> "TreeNode":
        kids = tuple(sorted(children, key=lambda c: c[0]))
        if not kids:
            raise TreeError("internal node must have at least one child")
        return TreeNode(children=kids)

    @property
    def is_leaf(self) -> bool:
        return self.symbol is not None

    def leaves(self) -> Iterator[tuple[Codeword, str]]:
        """Yield (codeword, symbol) pairs in ascending-cost DFS order."""
        if self.is_leaf:
            yield (), self.symbol  # type: ignore[misc]
            return
        for cost, child in self.children:
            for path, sym in child.leaves():
                yield (cost,) + path, sym

    def symbol_set(self) -> set[str]:
        return {sym for _, sym in self.leaves()}


def validate_tree(tree: TreeNode, prior: CharacterPrior) -> list[str]:
    """Return diagnostics (empty when the tree is valid for the prior).

    Checks: unique positive ascending edge costs per node, every node is
    exactly a leaf or an internal node, each prior symbol at exactly one
    leaf, no stray symbols, and a multi-symbol tree has an internal root.
    """
    diagnostics: list[str] = []
    seen: dict[str, str] = {}

    def walk(node: TreeNode, path: str) -> None:
        if node.symbol is not None and node.children:
            diagnostics.append(f"node {path or 'root'} is both leaf and internal")
            return
        if node.symbol is not None:
            if node.symbol in seen:
                diagnostics.append(
                    f"symbol {node.symbol!r} at {path or 'root'} already placed at {seen[node.symbol]}"
                )
            else:
                seen[node.symbol] = path or "root"
            return
        if not node.children:
            diagnostics.append(f"node {path or 'root'} has no symbol and no children")
            return
        prev = 0
        for cost, child in node.children:
            if not isinstance(cost, int) or cost < 1:
                diagnostics.append(f"node {path or 'root'} has non-positive edge cost {cost!r}")
            elif cost == prev:
                diagnostics.append(f"node {path or 'root'} has duplicate edge cost {cost}")
            elif cost < prev:
                diagnostics.append(f"node {path or 'root'} has out-of-order edge cost {cost}")
            prev = cost if isinstance(cost, int) else prev
            walk(child, f"{path}/{cost}" if path else f"/{cost}")

    walk(tree, "")

    expected = set(prior.symbols)
    placed = set(seen)
    for sym in sorted(expected - placed):
        diagnostics.append(f"missing symbol {sym!r}")
    for sym in sorted(placed - expected):
        diagnostics.append(f"extra symbol {sym!r} not in prior")
    if len(expected) > 1 and tree.is_leaf:
        diagnostics.append("root of a multi-symbol tree must be internal")
    return diagnostics


def ensure_valid_tree(tree: TreeNode, prior: CharacterPrior) -> None:
    diagnostics = validate_tree(tree, prior)
    if diagnostics:
        raise TreeValidationError(diagnostics)


def tree_to_codewords(tree: TreeNode) -> dict[str, Codeword]:
    """Map each leaf symbol to its codeword (root-to-leaf edge costs)."""
    out: dict[str, Codeword] = {}
    for path, sym in tree.leaves():
        if sym in out:
            raise TreeError(f"symbol {sym!r} appears at more than one leaf")
        out[sym] = path
    return out


def codewords_to_tree(codewords: Mapping[str, Codeword]) -> TreeNode:
    """Rebuild the tree for a prefix-free codeword set.

    Raises PrefixFreeError naming the offending pair when one codeword
    is a prefix of another (equal codewords included).
    """
    items = sorted(codewords.items())
    if len(items) == 1 and len(items[0][1]) == 0:
        return TreeNode.leaf(items[0][0])
    for a_sym, a_cw in items:
        for b_sym, b_cw in items:
            if a_sym != b_sym and len(a_cw) <= len(b_cw) and tuple(b_cw[: len(a_cw)]) == tuple(a_cw):
                raise PrefixFreeError(
                    f"codeword of {a_sym!r} {list(a_cw)} is a prefix of {b_sym!r} {list(b_cw)}"
                )

    def build(group: list[tuple[str, Codeword]], depth: int) -> TreeNode:
        if len(group) == 1 and len(group[0][1]) == depth:
            return TreeNode.leaf(group[0][0])
        by_cost: dict[int, list[tuple[str, Codeword]]] = {}
        for sym, cw in group:
            if len(cw) <= depth:
                # equal-length prefix clash was rejected above
                raise PrefixFreeError(f"codeword of {sym!r} ends at an internal node")
            cost = cw[depth]
            if not isinstance(cost, int) or cost < 1:
                raise TreeError(f"codeword of {sym!r} has invalid trial index {cost!r}")
            by_cost.setdefault(cost, []).append((sym, cw))
        return TreeNode.internal(
            (cost, build(members, depth + 1)) for cost, members in sorted(by_cost.items())
        )

    return build(items, 0)


def codeword_cost(codeword: Codeword) -> int:
    """Queries needed for the decision: the sum of trial indices."""
    total = 0
    for i in codeword:
        if i < 1:
            raise TreeError(f"trial index must be >= 1, got {i}")
        total += i
    return total


def eqpd(tree: TreeNode, prior: CharacterPrior) -> float:
    """Expected queries per decision under the prior."""
    ensure_valid_tree(tree, prior)
    probs = prior.as_dict()
    return sum(probs[sym] * codeword_cost(cw) for sym, cw in tree_to_codewords(tree).items())


def expected_trials(tree: TreeNode, prior: CharacterPrior) -> float:
    """Expected number of trials (positive intents) per decision."""
    ensure_valid_tree(tree, prior)
    probs = prior.as_dict()
    return sum(probs[sym] * len(cw) for sym, cw in tree_to_codewords(tree).items())


@dataclass(frozen=True)
class Layout:
    """A named decision tree as stored on disk and served to clients."""

    name: str
    tree: TreeNode
    alphabet: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.alphabet:
            object.__setattr__(
                self, "alphabet", tuple(sym for _, sym in self.tree.leaves())
            )


def _node_to_obj(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"leaf": node.symbol}
    return {"children": [{"cost": c, "node": _node_to_obj(ch)} for c, ch in node.children]}


def serialize_layout(tree: TreeNode, name: str) -> str:
    """Serialize to the layout JSON document (children in ascending cost order)."""
    alphabet = [sym for _, sym in tree.leaves()]
    doc = {
        "version": LAYOUT_SCHEMA_VERSION,
        "name": name,
        "alphabet": alphabet,
        "tree": _node_to_obj(tree),
    }
    return json.dumps(doc, indent=2) + "\n"


def _node_from_obj(obj: object, path: str) -> TreeNode:
    if not isinstance(obj, dict):
        raise LayoutFormatError(f"{path}: node must be an object")
    if "leaf" in obj:
        if "children" in obj:
            raise LayoutFormatError(f"{path}: node cannot be both leaf and internal")
        sym = obj["leaf"]
        if not isinstance(sym, str) or len(sym) != 1:
            raise LayoutFormatError(f"{path}.leaf: {sym!r} is not a single-character token")
        return TreeNode.leaf(sym)
    if "children" not in obj:
        raise LayoutFormatError(f"{path}: node needs 'leaf' or 'children'")
    kids = obj["children"]
    if not isinstance(kids, list) or not kids:
        raise LayoutFormatError(f"{path}.children: must be a non-empty array")
    out = []
    prev = 0
    for i, entry in enumerate(kids):
        epath = f"{path}.children[{i}]"
        if not isinstance(entry, dict) or "cost" not in entry or "node" not in entry:
            raise LayoutFormatError(f"{epath}: must be an object with 'cost' and 'node'")
        cost = entry["cost"]
        if not isinstance(cost, int) or isinstance(cost, bool) or cost < 1:
            raise LayoutFormatError(f"{epath}.cost: {cost!r} is not a positive integer")
        if cost <= prev:
            raise LayoutFormatError(
                f"{epath}.cost: {cost} does not strictly ascend (previous {prev})"
            )
        prev = cost
        out.append((cost, _node_from_obj(entry["node"], f"{epath}.node")))
    return TreeNode(children=tuple(out))


def parse_layout(text: str) -> Layout:
    """Parse a layout document, raising LayoutFormatError with a JSON path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LayoutFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise LayoutFormatError("top level: must be an object")
    if doc.get("version") != LAYOUT_SCHEMA_VERSION:
        raise LayoutFormatError(f"version: expected {LAYOUT_SCHEMA_VERSION}, got {doc.get('version')!r}")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise LayoutFormatError("name: must be a non-empty string")
    alphabet = doc.get("alphabet")
    if not isinstance(alphabet, list) or not all(isinstance(s, str) and len(s) == 1 for s in alphabet):
        raise LayoutFormatError("alphabet: must be an array of single-character tokens")
    tree = _node_from_obj(doc.get("tree"), "tree")
    leaf_syms = [sym for _, sym in tree.leaves()]
    if sorted(leaf_syms) != sorted(alphabet):
        raise LayoutFormatError("alphabet: does not match the tree's leaf symbols")
    return Layout(name=name, tree=tree, alphabet=tuple(alphabet))
