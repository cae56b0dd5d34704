// Wire formats shared with the scanopt service.

export interface LeafDoc {
  leaf: string;
}

export interface ChildDoc {
  cost: number;
  node: NodeDoc;
}

export interface InternalDoc {
  children: ChildDoc[];
}

export type NodeDoc = LeafDoc | InternalDoc;

export interface LayoutDoc {
  version: number;
  name: string;
  alphabet: string[];
  tree: NodeDoc;
}

export interface RosterEntry {
  name: string;
  eqpd: number;
  expected_trials: number;
}

export interface Roster {
  scan_delay_s: number;
  layouts: RosterEntry[];
}

export interface SessionCreated {
  session_id: string;
  target_sequence: string[];
  scan_delay_s: number;
}

export type Mode = "timed" | "binary";

export type EventKind = "query_shown" | "response" | "decision" | "session_end";

export interface LogEntry {
  session_id: string;
  ts_ms: number;
  layout: string;
  mode: Mode;
  kind: EventKind;
  payload: Record<string, unknown>;
}

export interface ServerSummary {
  accuracy: number;
  mean_queries: number;
  mean_time_s: number;
  mean_rollovers: number;
  timeouts: number;
  num_decisions: number;
  session_id: string;
  layout: string;
  mode: Mode;
}
