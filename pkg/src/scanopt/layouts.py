"""Builders for the baseline scanning-keyboard decision trees.

Six layouts are constructed here: alphabetical and EQPD-minimizing
row-item grids, alphabetical and EQPD-minimizing block-row-item grids,
an ACAT-style half-split grid, and a Hex-o-spell-style ring.  The
unconstrained optimum ("karp") is exposed through the same roster but
computed by :mod:`scanopt.karp`.

Grid cell costs follow the scan order: in a row-item grid the cell at
row r, item c takes r + c queries; a block level adds its block index.
The min-EQPD variants exhaustively search grid shapes and assign
symbols in descending probability to cells in ascending cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ScanoptError
from .priors import ALPHABET, CharacterPrior
from .tree import TreeNode

LAYOUT_NAMES = (
    "row-item-alpha",
    "row-item-opt",
    "bri-alpha",
    "bri-opt",
    "acat",
    "hex",
    "karp",
)


class LayoutError(ScanoptError):
    """Layout cannot be built for the given prior or parameters."""


@dataclass(frozen=True)
class GridShape:
    """Row lengths of a grid; block_shapes nests them per block."""

    row_lengths: tuple[int, ...] = ()
    block_shapes: tuple[tuple[int, ...], ...] = ()

    def cell_count(self) -> int:
        if self.block_shapes:
            return sum(sum(rows) for rows in self.block_shapes)
        return sum(self.row_lengths)


def describe_grid(tree: TreeNode) -> GridShape | None:
    """Recover the grid shape of a two- or three-level tree, if it is one."""
    kids = [child for _, child in tree.children]
    if kids and all(
        not k.is_leaf and all(g.is_leaf for _, g in k.children) for k in kids
    ):
        return GridShape(row_lengths=tuple(len(k.children) for k in kids))
    if kids and all(
        not k.is_leaf
        and all(
            not r.is_leaf and all(c.is_leaf for _, c in r.children)
            for _, r in k.children
        )
        for k in kids
    ):
        return GridShape(
            block_shapes=tuple(
                tuple(len(r.children) for _, r in k.children) for k in kids
            )
        )
    return None


def tree_from_rows(rows: Sequence[Sequence[str]]) -> TreeNode:
    """Two-level tree: rows at costs 1..k, items at costs 1..len(row)."""
    return TreeNode.internal(
        (r, TreeNode.internal((c, TreeNode.leaf(sym)) for c, sym in enumerate(row, 1)))
        for r, row in enumerate(rows, 1)
    )


def tree_from_blocks(blocks: Sequence[Sequence[Sequence[str]]]) -> TreeNode:
    """Three-level tree: blocks, then rows, then items."""
    return TreeNode.internal(
        (b, tree_from_rows(rows)) for b, rows in enumerate(blocks, 1)
    )


def _require_standard_alphabet(prior: CharacterPrior, layout: str) -> None:
    if set(prior.symbols) != set(ALPHABET):
        raise LayoutError(
            f"{layout} layout needs the standard {len(ALPHABET)}-symbol alphabet, "
            f"got {len(prior)} symbols"
        )


def _fill_rows(symbols: Sequence[str], lengths: Sequence[int]) -> list[list[str]]:
    rows, i = [], 0
    for n in lengths:
        rows.append(list(symbols[i : i + n]))
        i += n
    return rows


def build_row_item_alpha(prior: CharacterPrior) -> TreeNode:
    """5 x 6 grid, a..z then space then backspace, last two cells empty."""
    _require_standard_alphabet(prior, "row-item-alpha")
    return tree_from_rows(_fill_rows(ALPHABET, (6, 6, 6, 6, 4)))


def _partitions(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Non-increasing partitions of n, parts bounded by max_part."""
    cap = n if max_part is None else min(n, max_part)
    if n == 0:
        yield ()
        return
    for first in range(cap, 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _row_item_cells(lengths: Sequence[int]) -> list[tuple[int, int, int]]:
    """(cost, row, item) per cell, sorted ascending cost then row-major."""
    cells = [(r + c, r, c) for r, n in enumerate(lengths, 1) for c in range(1, n + 1)]
    cells.sort()
    return cells


def _assign_to_cells(
    prior: CharacterPrior, cells: Sequence[tuple]
) -> tuple[float, list[tuple]]:
    """Greedy fill: descending probability onto ascending cost."""
    ranked = prior.by_probability()
    value = 0.0
    placed = []
    for (cost, *pos), (sym, p) in zip(cells, ranked):
        value += p * cost
        placed.append((*pos, sym))
    return value, placed


def optimize_row_item(prior: CharacterPrior) -> TreeNode:
    """Search all row-length partitions for the min-EQPD row-item grid.

    Ties prefer fewer rows, then the lexicographically smaller partition.
    """
    n = len(prior)
    if n == 1:
        return TreeNode.leaf(prior.symbols[0])
    best: tuple[float, int, tuple[int, ...]] | None = None
    for part in _partitions(n):
        value, _ = _assign_to_cells(prior, _row_item_cells(part))
        key = (value, len(part), part)
        if best is None or key < best:
            best = key
    assert best is not None
    _, _, part = best
    _, placed = _assign_to_cells(prior, _row_item_cells(part))
    grid = [[""] * width for width in part]
    for r, c, sym in placed:
        grid[r - 1][c - 1] = sym
    return tree_from_rows(grid)


def build_block_row_item_alpha(prior: CharacterPrior) -> TreeNode:
    """3x3 blocks filled row-major a..z,_,<; the remainder forms a last block."""
    _require_standard_alphabet(prior, "bri-alpha")
    symbols = list(ALPHABET)
    blocks: list[list[list[str]]] = []
    i = 0
    while i < len(symbols):
        chunk = symbols[i : i + 9]
        i += 9
        blocks.append([chunk[j : j + 3] for j in range(0, len(chunk), 3)])
    return tree_from_blocks(blocks)


def _row_shape_fronts(
    size: int, max_rows: int, max_items: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pareto-minimal (partition, sorted cost multiset) for one block.

    Within a block the cell costs are r + c.  A shape whose sorted cost
    vector is dominated componentwise can never win under the greedy
    assignment, so only the frontier needs to enter the shape search.
    """
    candidates = []
    for part in _partitions(size, max_items):
        if len(part) > max_rows:
            continue
        costs = tuple(sorted(r + c for r, n in enumerate(part, 1) for c in range(1, n + 1)))
        candidates.append((part, costs))
    # fewer rows first so equal multisets keep the shortest shape
    candidates.sort(key=lambda pc: (len(pc[0]), pc[0]))
    front: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    for part, costs in candidates:
        dominated = False
        for _, kept in front:
            if all(k <= c for k, c in zip(kept, costs)):
                dominated = True
                break
        if not dominated:
            front = [(p, k) for p, k in front if not all(c <= x for c, x in zip(costs, k))]
            front.append((part, costs))
    return front


def optimize_block_row_item(
    prior: CharacterPrior,
    max_blocks: int = 5,
    max_rows: int = 5,
    max_items: int = 8,
) -> TreeNode:
    """Search nested non-increasing partitions for the min-EQPD block grid.

    Block sizes partition the alphabet (non-increasing, at most
    ``max_blocks``); each block is split into at most ``max_rows`` rows
    of at most ``max_items`` items.  Ties prefer fewer blocks, then
    fewer total rows, then the lexicographically smaller shape.
    """
    n = len(prior)
    if n == 1:
        return TreeNode.leaf(prior.symbols[0])
    if n > max_blocks * max_rows * max_items:
        raise LayoutError(
            f"caps ({max_blocks} blocks x {max_rows} rows x {max_items} items) "
            f"cannot hold {n} symbols"
        )
    ranked = prior.by_probability()
    probs = [p for _, p in ranked]
    fronts: dict[int, list[tuple[tuple[int, ...], tuple[int, ...]]]] = {}

    best: tuple[float, int, int, tuple[tuple[int, ...], ...]] | None = None
    for block_sizes in _partitions(n, max_rows * max_items):
        if len(block_sizes) > max_blocks:
            continue
        for size in block_sizes:
            if size not in fronts:
                fronts[size] = _row_shape_fronts(size, max_rows, max_items)
        if any(not fronts[size] for size in block_sizes):
            continue

        def search(i: int, shape: tuple[tuple[int, ...], ...], costs: list[int]) -> None:
            nonlocal best
            if i == len(block_sizes):
                value = 0.0
                for p, cost in zip(probs, sorted(costs)):
                    value += p * cost
                key = (value, len(shape), sum(len(rows) for rows in shape), shape)
                if best is None or key < best:
                    best = key
                return
            b = i + 1
            for part, cell_costs in fronts[block_sizes[i]]:
                search(i + 1, shape + (part,), costs + [b + c for c in cell_costs])

        search(0, (), [])

    assert best is not None
    _, _, _, shape = best
    cells = [
        (b + r + c, b, r, c)
        for b, rows in enumerate(shape, 1)
        for r, width in enumerate(rows, 1)
        for c in range(1, width + 1)
    ]
    cells.sort()
    _, placed = _assign_to_cells(prior, cells)
    blocks = [[[""] * width for width in rows] for rows in shape]
    for b, r, c, sym in placed:
        blocks[b - 1][r - 1][c - 1] = sym
    return tree_from_blocks(blocks)


def build_acat(prior: CharacterPrior, split_after_row: int = 3) -> TreeNode:
    """Half-split over the 5 x 6 alphabetical grid, then row-item scanning."""
    _require_standard_alphabet(prior, "acat")
    rows = _fill_rows(ALPHABET, (6, 6, 6, 6, 4))
    if not (1 <= split_after_row < len(rows)):
        raise LayoutError(f"split_after_row must be in 1..{len(rows) - 1}, got {split_after_row}")
    top, bottom = rows[:split_after_row], rows[split_after_row:]
    return TreeNode.internal(
        [(1, tree_from_rows(top)), (2, tree_from_rows(bottom))]
    )


def build_hexospell(prior: CharacterPrior) -> TreeNode:
    """Six alphabetical groups (5,5,5,5,5,3) scanned as a ring, then items."""
    _require_standard_alphabet(prior, "hex")
    groups = _fill_rows(ALPHABET, (5, 5, 5, 5, 5, 3))
    return TreeNode.internal(
        (g, TreeNode.internal((c, TreeNode.leaf(sym)) for c, sym in enumerate(group, 1)))
        for g, group in enumerate(groups, 1)
    )


def build_layout(name: str, prior: CharacterPrior) -> TreeNode:
    """Build any layout from the public roster by name."""
    if name == "row-item-alpha":
        return build_row_item_alpha(prior)
    if name == "row-item-opt":
        return optimize_row_item(prior)
    if name == "bri-alpha":
        return build_block_row_item_alpha(prior)
    if name == "bri-opt":
        return optimize_block_row_item(prior)
    if name == "acat":
        return build_acat(prior)
    if name == "hex":
        return build_hexospell(prior)
    if name == "karp":
        from .karp import karp_optimize_unbounded

        return karp_optimize_unbounded(prior).tree
    raise LayoutError(f"unknown layout {name!r}; known: {', '.join(LAYOUT_NAMES)}")
