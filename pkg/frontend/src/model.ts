/** Dashboard state derived only from gateway responses and stream events.
 *
 * The model never invents values: panels hold the last reading seen, alert
 * rows mirror ledger events in sequence order, and a monotone sequence guard
 * makes replays after a reconnect idempotent.
 */

import {
  AlertInfo,
  AlertPayload,
  ConnectionState,
  ReadingPayload,
  StateView,
  StreamEvent,
} from "./types.js";

export const SPARKLINE_CAPACITY = 100;
export const STALE_AFTER_TICKS = 5;

export interface Panel {
  device: string;
  value: number;
  unit: string;
  t_ms: number;
  history: number[]; // bounded at SPARKLINE_CAPACITY
  stale: boolean;
}

export interface AlertRow {
  seq: number; // ledger sequence of the raising event: list order
  alert: AlertInfo;
  pendingAck: boolean;
}

export interface LightState {
  state: "ON" | "OFF";
  pending: boolean;
}

export class DashboardModel {
  panels = new Map<string, Panel>();
  alerts = new Map<number, AlertRow>(); // keyed by alert id
  lights = new Map<string, LightState>();
  mode: "HOME" | "AWAY" = "HOME";
  modePending = false;
  connection: ConnectionState = "connecting";
  lastError: string | null = null;
  lastSeq = 0;
  latestTick = 0;

  constructor(private tickMs: number = 100) {}

  /** Seed everything from GET /state. */
  hydrate(state: StateView): void {
    this.mode = state.mode;
    this.latestTick = state.t_ms;
    for (const [device, reading] of Object.entries(state.devices)) {
      this.panels.set(device, {
        device,
        value: reading.value,
        unit: reading.unit,
        t_ms: reading.t_ms,
        history: [reading.value],
        stale: false,
      });
    }
    for (const [device, lightState] of Object.entries(state.lights)) {
      this.lights.set(device, { state: lightState, pending: false });
    }
    this.refreshStaleness();
  }

  /** Apply one stream frame; duplicates (seq <= lastSeq) are dropped. */
  apply(seq: number, event: StreamEvent): boolean {
    if (seq <= this.lastSeq) {
      return false;
    }
    this.lastSeq = seq;
    if (event.type === "reading") {
      this.applyReading(event.payload as ReadingPayload);
    } else if (event.type === "alert") {
      this.applyAlert(seq, event.payload as AlertPayload);
    } else if (event.type === "mode") {
      this.mode = (event.payload as { mode: "HOME" | "AWAY" }).mode;
      this.modePending = false;
    } else if (event.type === "light") {
      const { device, on } = event.payload as { device: string; on: boolean };
      this.lights.set(device, { state: on ? "ON" : "OFF", pending: false });
    }
    return true;
  }

  private applyReading(reading: ReadingPayload): void {
    let panel = this.panels.get(reading.device);
    if (!panel) {
      panel = {
        device: reading.device,
        value: reading.value,
        unit: reading.unit,
        t_ms: reading.t_ms,
        history: [],
        stale: false,
      };
      this.panels.set(reading.device, panel);
    }
    panel.value = reading.value;
    panel.unit = reading.unit;
    panel.t_ms = reading.t_ms;
    panel.history.push(reading.value);
    if (panel.history.length > SPARKLINE_CAPACITY) {
      panel.history.splice(0, panel.history.length - SPARKLINE_CAPACITY);
    }
    if (reading.t_ms > this.latestTick) {
      this.latestTick = reading.t_ms;
    }
    if (this.lights.has(reading.device)) {
      // a light's own reading is the authoritative confirmation
      this.lights.set(reading.device, {
        state: reading.value >= 1 ? "ON" : "OFF",
        pending: false,
      });
    }
    this.refreshStaleness();
  }

  private applyAlert(seq: number, payload: AlertPayload): void {
    const existing = this.alerts.get(payload.alert.id);
    if (payload.event === "raised" || !existing) {
      this.alerts.set(payload.alert.id, {
        seq,
        alert: payload.alert,
        pendingAck: false,
      });
    } else {
      existing.alert = payload.alert;
      existing.pendingAck = false;
    }
  }

  private refreshStaleness(): void {
    for (const panel of this.panels.values()) {
      panel.stale = this.latestTick - panel.t_ms > STALE_AFTER_TICKS * this.tickMs;
    }
  }

  /** Alert rows in ledger order (sequence of their raising event). */
  alertRows(): AlertRow[] {
    return [...this.alerts.values()].sort((a, b) => a.seq - b.seq);
  }

  activeAlertCount(): number {
    return this.alertRows().filter((row) => row.alert.state === "ACTIVE").length;
  }

  // -- optimistic mutations, reconciled by the stream ----------------------

  optimisticLight(device: string, on: boolean): LightState | undefined {
    const before = this.lights.get(device);
    this.lights.set(device, { state: on ? "ON" : "OFF", pending: true });
    return before;
  }

  revertLight(device: string, before: LightState | undefined): void {
    if (before) {
      this.lights.set(device, { ...before, pending: false });
    } else {
      this.lights.delete(device);
    }
  }

  optimisticMode(mode: "HOME" | "AWAY"): "HOME" | "AWAY" {
    const before = this.mode;
    this.mode = mode;
    this.modePending = true;
    return before;
  }

  revertMode(before: "HOME" | "AWAY"): void {
    this.mode = before;
    this.modePending = false;
  }

  optimisticAck(alertId: number): void {
    const row = this.alerts.get(alertId);
    if (row && row.alert.state === "ACTIVE") {
      row.alert = { ...row.alert, state: "ACKED" };
      row.pendingAck = true;
    }
  }

  revertAck(alertId: number): void {
    const row = this.alerts.get(alertId);
    if (row && row.pendingAck) {
      row.alert = { ...row.alert, state: "ACTIVE" };
      row.pendingAck = false;
    }
  }
}
