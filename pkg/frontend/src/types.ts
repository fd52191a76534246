/** Wire types mirrored from the gateway's JSON contracts. */

export interface ReadingPayload {
  t_ms: number;
  device: string;
  raw: number;
  value: number;
  unit: string;
}

export interface AlertInfo {
  id: number;
  kind: string;
  device: string;
  raised_at: number;
  state: "ACTIVE" | "ACKED" | "CLEARED";
}

export interface AlertPayload {
  event: "raised" | "acked" | "cleared";
  alert: AlertInfo;
}

export interface StateView {
  t_ms: number;
  wall: string;
  mode: "HOME" | "AWAY";
  devices: Record<string, ReadingPayload>;
  lights: Record<string, "ON" | "OFF">;
  active_alerts: number;
}

/** One frame from GET /api/v1/events (data field, parsed). */
export interface StreamEvent {
  type: "reading" | "alert" | "mode" | "light";
  t_ms: number;
  wall: string;
  payload: ReadingPayload | AlertPayload | { mode: string } | { device: string; on: boolean };
}

export type ConnectionState = "connecting" | "live" | "reconnecting" | "unauthorized";
