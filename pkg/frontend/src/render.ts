import { ScanState, ScanStats, accuracy, highlightedSymbols, meanQueries, meanRollovers, meanTimeS, currentTarget } from "./scan.js";
import { leaves, TreeNode } from "./tree.js";

// Physical presentation of a layout.  Grid layouts (row-item, block
// variants, ACAT) come straight from the tree structure; hex renders as
// a ring; anything irregular (karp) lays its leaves out row-major in
// codeword-cost order with a colored outline per first-trial query set.

export interface Cell {
  symbol: string;
  row: number;
  col: number;
  group: number; // root-child index, used for query-set outlines
  ring?: { angle: number; radius: number };
}

function isTwoLevel(root: TreeNode): boolean {
  return root.children.every(({ node }) =>
    node.symbol === null && node.children.every((c) => c.node.symbol !== null));
}

function isThreeLevelGrid(root: TreeNode): boolean {
  return root.children.every(({ node }) =>
    node.symbol === null &&
    node.children.every(
      (r) => r.node.symbol === null && r.node.children.every((c) => c.node.symbol !== null),
    ));
}

export function physicalCells(name: string, root: TreeNode): Cell[] {
  if (name === "hex") {
    const cells: Cell[] = [];
    root.children.forEach(({ node }, g) => {
      const angle = (g / root.children.length) * 2 * Math.PI - Math.PI / 2;
      node.children.forEach(({ node: leaf }, i) => {
        cells.push({
          symbol: leaf.symbol ?? "?",
          row: g,
          col: i,
          group: g,
          ring: { angle, radius: i },
        });
      });
    });
    return cells;
  }
  if (isTwoLevel(root)) {
    return root.children.flatMap(({ node }, r) =>
      node.children.map(({ node: leaf }, c) => ({
        symbol: leaf.symbol ?? "?",
        row: r,
        col: c,
        group: r,
      })),
    );
  }
  if (isThreeLevelGrid(root)) {
    const cells: Cell[] = [];
    let rowOffset = 0;
    root.children.forEach(({ node: block }, b) => {
      block.children.forEach(({ node: row }, r) => {
        row.children.forEach(({ node: leaf }, c) => {
          cells.push({ symbol: leaf.symbol ?? "?", row: rowOffset + r, col: c, group: b });
        });
      });
      rowOffset += block.children.length;
    });
    return cells;
  }
  // irregular tree: leaves by ascending codeword cost, six per row
  const groupOf = new Map<string, number>();
  root.children.forEach(({ node }, g) => node.symbols.forEach((s) => groupOf.set(s, g)));
  const ordered = leaves(root)
    .map(({ symbol, cost }, i) => ({ symbol, cost, i }))
    .sort((a, b) => a.cost - b.cost || a.i - b.i);
  return ordered.map(({ symbol }, i) => ({
    symbol,
    row: Math.floor(i / 6),
    col: i % 6,
    group: groupOf.get(symbol) ?? 0,
  }));
}

export interface Board {
  container: HTMLElement;
  cells: Map<string, HTMLElement>;
}

export function buildBoard(container: HTMLElement, name: string, root: TreeNode): Board {
  container.textContent = "";
  container.classList.toggle("ring", name === "hex");
  const cells = new Map<string, HTMLElement>();
  for (const cell of physicalCells(name, root)) {
    const el = document.createElement("div");
    el.className = `cell group-${cell.group % 8}`;
    el.textContent = cell.symbol;
    if (cell.ring) {
      // groups sit around a circle; items in a group stack downward
      const cx = 46 + 36 * Math.cos(cell.ring.angle);
      const cy = 38 + 30 * Math.sin(cell.ring.angle);
      el.style.position = "absolute";
      el.style.left = `${cx}%`;
      el.style.top = `${cy + cell.ring.radius * 9}%`;
    } else {
      el.style.gridRow = `${cell.row + 1}`;
      el.style.gridColumn = `${cell.col + 1}`;
    }
    cells.set(cell.symbol, el);
    container.appendChild(el);
  }
  return { container, cells };
}

export function renderState(
  board: Board,
  state: ScanState,
  targetEl: HTMLElement,
  statsEl: HTMLElement,
  modeEl: HTMLElement,
): void {
  const highlighted = state.done ? new Set<string>() : highlightedSymbols(state);
  const target = state.done ? "" : currentTarget(state);
  for (const [symbol, el] of board.cells) {
    el.classList.toggle("highlight", highlighted.has(symbol));
    el.classList.toggle("target", symbol === target);
  }
  targetEl.textContent = state.done
    ? "session complete"
    : `type: ${target === "_" ? "space (_)" : target === "<" ? "backspace (<)" : target}`;
  modeEl.textContent = `${state.mode} mode` + (state.mode === "timed" ? ` (${state.scanDelayMs} ms)` : "");
  renderStats(statsEl, state.stats);
}

export function renderStats(statsEl: HTMLElement, stats: ScanStats): void {
  statsEl.textContent =
    `decisions ${stats.decisions} | accuracy ${(accuracy(stats) * 100).toFixed(1)}% | ` +
    `mean time ${meanTimeS(stats).toFixed(2)} s | mean queries ${meanQueries(stats).toFixed(2)} | ` +
    `rollovers/decision ${meanRollovers(stats).toFixed(2)}`;
}
