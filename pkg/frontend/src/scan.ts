import { TreeNode } from "./tree.js";
import { EventKind, Mode } from "./types.js";

// The scanning state machine.  Semantics mirror the service's decision
// simulator exactly: children are queried in ascending cost order, a yes
// descends (leaf ends the decision), a full pass with no yes wraps and
// bumps the pass count.  In timed mode queries auto-advance once the
// scan delay elapses; in binary mode only an explicit no advances.

export interface ScanEvent {
  kind: EventKind;
  payload: Record<string, unknown>;
}

export interface ScanStats {
  decisions: number;
  correct: number;
  totalQueries: number;
  totalTimeMs: number;
  rollovers: number;
}

export interface ScanState {
  root: TreeNode;
  mode: Mode;
  scanDelayMs: number;
  targets: string[];
  node: TreeNode;
  path: number[];
  queryIndex: number;
  passCount: number;
  decisionIndex: number;
  queryStartMs: number;
  decisionStartMs: number;
  decisionQueries: number;
  done: boolean;
  stats: ScanStats;
}

export function createScanState(
  root: TreeNode,
  mode: Mode,
  scanDelayMs: number,
  targets: string[],
  nowMs = 0,
): { state: ScanState; events: ScanEvent[] } {
  if (root.symbol !== null) {
    throw new Error("cannot scan a single-leaf layout");
  }
  if (targets.length === 0) {
    throw new Error("session needs at least one target");
  }
  const state: ScanState = {
    root,
    mode,
    scanDelayMs,
    targets,
    node: root,
    path: [],
    queryIndex: 1,
    passCount: 0,
    decisionIndex: 0,
    queryStartMs: nowMs,
    decisionStartMs: nowMs,
    decisionQueries: 0,
    done: false,
    stats: { decisions: 0, correct: 0, totalQueries: 0, totalTimeMs: 0, rollovers: 0 },
  };
  return { state, events: [queryShown(state)] };
}

export function currentTarget(state: ScanState): string {
  return state.targets[state.decisionIndex];
}

export function highlightedChild(state: ScanState): { cost: number; node: TreeNode } {
  return state.node.children[state.queryIndex - 1];
}

export function highlightedSymbols(state: ScanState): Set<string> {
  return highlightedChild(state).node.symbols;
}

function queryShown(state: ScanState): ScanEvent {
  return {
    kind: "query_shown",
    payload: {
      decision: state.decisionIndex,
      node_path: [...state.path],
      query_index: state.queryIndex,
    },
  };
}

function response(state: ScanState, yes: boolean, durationMs: number): ScanEvent {
  return {
    kind: "response",
    payload: {
      decision: state.decisionIndex,
      node_path: [...state.path],
      query_index: state.queryIndex,
      response: yes,
      duration_ms: durationMs,
    },
  };
}

function stepToNextQuery(state: ScanState, nowMs: number, events: ScanEvent[]): void {
  state.queryIndex += 1;
  if (state.queryIndex > state.node.children.length) {
    state.queryIndex = 1;
    state.passCount += 1;
  }
  state.queryStartMs = nowMs;
  events.push(queryShown(state));
}

/** Timed-mode clock: advance to the next query set once the delay elapses. */
export function advanceScan(state: ScanState, nowMs: number): ScanEvent[] {
  if (state.done || state.mode !== "timed") {
    return [];
  }
  const events: ScanEvent[] = [];
  if (nowMs - state.queryStartMs >= state.scanDelayMs) {
    state.decisionQueries += 1;
    state.stats.totalQueries += 1;
    events.push(response(state, false, nowMs - state.queryStartMs));
    stepToNextQuery(state, nowMs, events);
  }
  return events;
}

/** Switch input: yes descends, no (binary only) advances; extra keys are ignored. */
export function handleSwitch(state: ScanState, input: "yes" | "no", nowMs: number): ScanEvent[] {
  if (state.done) {
    return [];
  }
  const events: ScanEvent[] = [];
  if (input === "no") {
    if (state.mode !== "binary") {
      return []; // timed mode: no is signaled by the clock alone
    }
    state.decisionQueries += 1;
    state.stats.totalQueries += 1;
    events.push(response(state, false, nowMs - state.queryStartMs));
    stepToNextQuery(state, nowMs, events);
    return events;
  }

  state.decisionQueries += 1;
  state.stats.totalQueries += 1;
  events.push(response(state, true, nowMs - state.queryStartMs));
  const target = currentTarget(state);
  const chosen = highlightedChild(state);
  const targetPosition = state.node.children.findIndex((c) => c.node.symbols.has(target)) + 1;
  if (targetPosition === state.queryIndex && chosen.node.symbols.has(target)) {
    // same rule as the simulator: each fully missed pass of a trial that
    // ends with a yes on the target set is one rollover
    state.stats.rollovers += state.passCount;
  }

  if (chosen.node.symbol !== null) {
    const selected = chosen.node.symbol;
    const durationMs = nowMs - state.decisionStartMs;
    state.stats.decisions += 1;
    state.stats.totalTimeMs += durationMs;
    if (selected === target) {
      state.stats.correct += 1;
    }
    events.push({
      kind: "decision",
      payload: {
        decision: state.decisionIndex,
        target,
        selected,
        duration_ms: durationMs,
        correct: selected === target,
      },
    });
    state.decisionIndex += 1;
    if (state.decisionIndex >= state.targets.length) {
      state.done = true;
      events.push({ kind: "session_end", payload: {} });
      return events;
    }
    state.node = state.root;
    state.path = [];
    state.queryIndex = 1;
    state.passCount = 0;
    state.decisionQueries = 0;
    state.decisionStartMs = nowMs;
    state.queryStartMs = nowMs;
    events.push(queryShown(state));
    return events;
  }

  state.path = [...state.path, chosen.cost];
  state.node = chosen.node;
  state.queryIndex = 1;
  state.passCount = 0;
  state.queryStartMs = nowMs;
  events.push(queryShown(state));
  return events;
}

export function accuracy(stats: ScanStats): number {
  return stats.decisions === 0 ? 0 : stats.correct / stats.decisions;
}

export function meanTimeS(stats: ScanStats): number {
  return stats.decisions === 0 ? 0 : stats.totalTimeMs / 1000 / stats.decisions;
}

export function meanQueries(stats: ScanStats): number {
  return stats.decisions === 0 ? 0 : stats.totalQueries / stats.decisions;
}

export function meanRollovers(stats: ScanStats): number {
  return stats.decisions === 0 ? 0 : stats.rollovers / stats.decisions;
}
