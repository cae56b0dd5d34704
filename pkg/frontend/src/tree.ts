import { LayoutDoc, NodeDoc } from "./types.js";

// Runtime view of a layout tree: children stay sorted by ascending edge
// cost and every node knows the symbols living under it.

export interface TreeNode {
  symbol: string | null;
  children: { cost: number; node: TreeNode }[];
  symbols: Set<string>;
}

export function buildTree(doc: NodeDoc): TreeNode {
  if ("leaf" in doc) {
    if (typeof doc.leaf !== "string" || doc.leaf.length !== 1) {
      throw new Error(`leaf token must be a single character, got ${JSON.stringify(doc.leaf)}`);
    }
    return { symbol: doc.leaf, children: [], symbols: new Set([doc.leaf]) };
  }
  if (!Array.isArray(doc.children) || doc.children.length === 0) {
    throw new Error("internal node needs a non-empty children array");
  }
  const children: { cost: number; node: TreeNode }[] = [];
  const symbols = new Set<string>();
  let prev = 0;
  for (const child of doc.children) {
    if (!Number.isInteger(child.cost) || child.cost <= prev) {
      throw new Error(`child costs must be strictly ascending positive integers (got ${child.cost})`);
    }
    prev = child.cost;
    const node = buildTree(child.node);
    node.symbols.forEach((s) => symbols.add(s));
    children.push({ cost: child.cost, node });
  }
  return { symbol: null, children, symbols };
}

export function parseLayout(doc: LayoutDoc): TreeNode {
  const tree = buildTree(doc.tree);
  const fromTree = [...tree.symbols].sort().join("");
  const fromDoc = [...doc.alphabet].sort().join("");
  if (fromTree !== fromDoc) {
    throw new Error("layout alphabet does not match the tree's leaves");
  }
  return tree;
}

export function nodeAtPath(root: TreeNode, costs: number[]): TreeNode {
  let node = root;
  for (const cost of costs) {
    const child = node.children.find((c) => c.cost === cost);
    if (!child) {
      throw new Error(`no child at cost ${cost} under path ${JSON.stringify(costs)}`);
    }
    node = child.node;
  }
  return node;
}

/** (codeword cost, symbol) pairs in depth-first ascending-cost order. */
export function leaves(root: TreeNode): { symbol: string; cost: number }[] {
  const out: { symbol: string; cost: number }[] = [];
  const walk = (node: TreeNode, depth: number): void => {
    if (node.symbol !== null) {
      out.push({ symbol: node.symbol, cost: depth });
      return;
    }
    for (const { cost, node: child } of node.children) {
      walk(child, depth + cost);
    }
  };
  walk(root, 0);
  return out;
}
