/** Thin fetch client for the gateway's JSON endpoints. */

import { StateView } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string,
    private token: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = {
      method,
      headers: { Authorization: `Bearer ${this.token}` },
    };
    if (body !== undefined) {
      init.headers = { ...init.headers, "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.base}${path}`, init);
    let doc: unknown = null;
    try {
      doc = await resp.json();
    } catch {
      /* non-JSON error body */
    }
    if (!resp.ok) {
      const detail = (doc as { error?: string } | null)?.error ?? resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return doc;
  }

  getState(): Promise<StateView> {
    return this.request("GET", "/api/v1/state") as Promise<StateView>;
  }

  setLight(deviceId: string, on: boolean): Promise<{ device: string; state: "ON" | "OFF" }> {
    return this.request("POST", `/api/v1/lights/${deviceId}`, { on }) as Promise<{
      device: string;
      state: "ON" | "OFF";
    }>;
  }

  setMode(mode: string): Promise<{ mode: "HOME" | "AWAY" }> {
    return this.request("POST", "/api/v1/mode", { mode }) as Promise<{ mode: "HOME" | "AWAY" }>;
  }

  ackAlert(alertId: number): Promise<unknown> {
    return this.request("POST", `/api/v1/alerts/${alertId}/ack`);
  }

  /** URL for the event stream; EventSource cannot set headers, so the token rides the query. */
  eventsUrl(lastEventId: number | null): string {
    const resume = lastEventId !== null ? `&last_event_id=${lastEventId}` : "";
    return `${this.base}/api/v1/events?token=${encodeURIComponent(this.token)}${resume}`;
  }
}
