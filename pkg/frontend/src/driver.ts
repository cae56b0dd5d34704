import { advanceScan, handleSwitch, highlightedSymbols, ScanEvent, ScanState, currentTarget } from "./scan.js";

// Scripted error-free responder (detection 1, false alarm 0): answers
// yes exactly when the highlighted set contains the target.  Used by the
// demo button and by tests to check traversal against the service.

export interface DriverOptions {
  tickMs?: number; // timed-mode clock resolution
  binaryNoMs?: number;
  yesMs?: number;
}

export function runScriptedSession(
  state: ScanState,
  onEvents: (events: ScanEvent[], nowMs: number) => void,
  options: DriverOptions = {},
): number {
  const tickMs = options.tickMs ?? 50;
  const binaryNoMs = options.binaryNoMs ?? 400;
  const yesMs = options.yesMs ?? 500;
  let now = 0;
  let guard = 0;
  while (!state.done) {
    if (guard++ > 1_000_000) {
      throw new Error("scripted session did not terminate");
    }
    const wantsYes = highlightedSymbols(state).has(currentTarget(state));
    if (wantsYes) {
      now += yesMs;
      onEvents(handleSwitch(state, "yes", now), now);
    } else if (state.mode === "binary") {
      now += binaryNoMs;
      onEvents(handleSwitch(state, "no", now), now);
    } else {
      // let the clock run in animation ticks until the scan advances
      const before = state.queryStartMs;
      while (state.queryStartMs === before && !state.done) {
        now += tickMs;
        onEvents(advanceScan(state, now), now);
      }
    }
  }
  return now;
}
