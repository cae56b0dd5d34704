import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface ServiceHandle {
  base: string;
  port: number;
  logPath: string;
  proc: ChildProcess;
  stop: () => Promise<void>;
  killHard: () => void;
}

export function tempLogPath(): string {
  return join(mkdtempSync(join(tmpdir(), "scanopt-ui-")), "sessions.jsonl");
}

async function waitForReady(base: string, proc: ChildProcess, timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early with code ${proc.exitCode}`);
    }
    try {
      const resp = await fetch(`${base}/api/layouts`);
      if (resp.ok) {
        return;
      }
    } catch (err) {
      lastError = err;
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`service did not come up at ${base}: ${lastError}`);
}

export async function spawnService(logPath?: string): Promise<ServiceHandle> {
  const log = logPath ?? tempLogPath();
  const port = 20000 + Math.floor(Math.random() * 20000);
  const proc = spawn("python3", ["-m", "scanopt", "serve", "--port", String(port), "--log", log], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  const stderr: Buffer[] = [];
  proc.stderr?.on("data", (chunk: Buffer) => stderr.push(chunk));
  const base = `http://127.0.0.1:${port}`;
  try {
    await waitForReady(base, proc);
  } catch (err) {
    proc.kill("SIGKILL");
    throw new Error(`${err}\nstderr: ${Buffer.concat(stderr).toString()}`);
  }
  return {
    base,
    port,
    logPath: log,
    proc,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once("exit", () => resolve());
        proc.kill("SIGTERM");
        setTimeout(() => proc.kill("SIGKILL"), 2000).unref();
      }),
    killHard: () => {
      proc.kill("SIGKILL");
    },
  };
}
