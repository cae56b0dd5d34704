import { ApiClient } from "./api.js";
import { runScriptedSession } from "./driver.js";
import { buildBoard, Board, renderState } from "./render.js";
import { advanceScan, createScanState, handleSwitch, ScanState } from "./scan.js";
import { SessionUploader } from "./session.js";
import { parseLayout, TreeNode } from "./tree.js";
import { Mode } from "./types.js";

// Page wiring: pick a layout/mode/seed, run a live session with the
// right-shift switch (left shift = no in binary mode), stream events to
// the service, and reconcile the stats panel with the server summary.

const api = new ApiClient("");

interface Live {
  state: ScanState;
  board: Board;
  uploader: SessionUploader;
  timer: number | null;
}

let live: Live | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

async function populateLayouts(): Promise<void> {
  const roster = await api.roster();
  const select = el<HTMLSelectElement>("layout");
  select.textContent = "";
  for (const entry of roster.layouts) {
    const option = document.createElement("option");
    option.value = entry.name;
    option.textContent = `${entry.name} (eqpd ${entry.eqpd.toFixed(2)})`;
    select.appendChild(option);
  }
  el<HTMLInputElement>("scan-delay").value = String(roster.scan_delay_s * 1000);
}

function stopLive(): void {
  if (live?.timer != null) {
    window.clearInterval(live.timer);
  }
  live = null;
}

function redraw(): void {
  if (!live) {
    return;
  }
  renderState(live.board, live.state, el("target"), el("stats"), el("mode-indicator"));
}

async function refreshServerSummary(): Promise<void> {
  if (!live) {
    return;
  }
  await live.uploader.drain();
  const summary = await api.summary(live.uploader.sessionId);
  el("server-summary").textContent =
    `server: decisions ${summary.num_decisions} | accuracy ${(summary.accuracy * 100).toFixed(1)}% | ` +
    `mean time ${summary.mean_time_s.toFixed(2)} s | rollovers/decision ${summary.mean_rollovers.toFixed(2)}`;
}

async function startSession(): Promise<void> {
  stopLive();
  const layoutName = el<HTMLSelectElement>("layout").value;
  const mode = el<HTMLSelectElement>("mode").value as Mode;
  const seed = Number(el<HTMLInputElement>("seed").value) || 0;
  const decisions = Number(el<HTMLInputElement>("decisions").value) || 20;
  const scanDelayMs = Math.min(3000, Math.max(400, Number(el<HTMLInputElement>("scan-delay").value) || 1200));

  const created = await api.createSession(layoutName, mode, seed, decisions);
  const doc = await api.layout(layoutName);
  const tree: TreeNode = parseLayout(doc);
  const board = buildBoard(el("board"), layoutName, tree);
  const started = createScanState(tree, mode, scanDelayMs, created.target_sequence, performance.now());
  const uploader = new SessionUploader(api, created.session_id, layoutName, mode);
  uploader.push(started.events, performance.now());

  live = { state: started.state, board, uploader, timer: null };
  if (mode === "timed") {
    live.timer = window.setInterval(() => {
      if (!live) {
        return;
      }
      const now = performance.now();
      const events = advanceScan(live.state, now);
      if (events.length > 0) {
        live.uploader.push(events, now);
        redraw();
      }
    }, 25);
  }
  el("server-summary").textContent = "server: (pending)";
  redraw();
}

function onKey(event: KeyboardEvent): void {
  if (!live || live.state.done) {
    return;
  }
  let input: "yes" | "no" | null = null;
  if (event.code === "ShiftRight" || event.code === "Space") {
    input = "yes";
  } else if (event.code === "ShiftLeft") {
    input = "no";
  }
  if (!input) {
    return;
  }
  event.preventDefault();
  const now = performance.now();
  const events = handleSwitch(live.state, input, now);
  if (events.length > 0) {
    live.uploader.push(events, now);
    redraw();
    if (live.state.done) {
      void refreshServerSummary();
    }
  }
}

async function runDemo(): Promise<void> {
  await startSession();
  if (!live) {
    return;
  }
  stopLiveTimerOnly();
  const uploader = live.uploader;
  runScriptedSession(live.state, (events, nowMs) => {
    if (events.length > 0) {
      uploader.push(events, nowMs);
    }
  });
  redraw();
  await refreshServerSummary();
}

function stopLiveTimerOnly(): void {
  if (live?.timer != null) {
    window.clearInterval(live.timer);
    live.timer = null;
  }
}

window.addEventListener("keydown", onKey);
el("start").addEventListener("click", () => void startSession());
el("demo").addEventListener("click", () => void runDemo());
el("sync").addEventListener("click", () => void refreshServerSummary());
void populateLayouts();
