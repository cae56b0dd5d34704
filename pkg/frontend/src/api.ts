import { LayoutDoc, LogEntry, Mode, Roster, ServerSummary, SessionCreated } from "./types.js";

export class ApiClient {
  constructor(readonly base: string) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.base}${path}`);
    if (!resp.ok) {
      throw new Error(`GET ${path} failed: ${resp.status} ${await resp.text()}`);
    }
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(`${this.base}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      throw new Error(`POST ${path} failed: ${resp.status} ${await resp.text()}`);
    }
    return (await resp.json()) as T;
  }

  roster(): Promise<Roster> {
    return this.getJson<Roster>("/api/layouts");
  }

  layout(name: string): Promise<LayoutDoc> {
    return this.getJson<LayoutDoc>(`/api/layouts/${encodeURIComponent(name)}`);
  }

  createSession(layout: string, mode: Mode, seed: number, decisions: number): Promise<SessionCreated> {
    return this.postJson<SessionCreated>("/api/sessions", { layout, mode, seed, decisions });
  }

  appendEvents(sessionId: string, events: LogEntry[]): Promise<{ appended: number }> {
    return this.postJson<{ appended: number }>(
      `/api/sessions/${encodeURIComponent(sessionId)}/events`,
      { events },
    );
  }

  summary(sessionId: string): Promise<ServerSummary> {
    return this.getJson<ServerSummary>(`/api/sessions/${encodeURIComponent(sessionId)}/summary`);
  }
}
