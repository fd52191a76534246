import { describe, expect, it } from "vitest";

import { DashboardModel, SPARKLINE_CAPACITY } from "../src/model.js";
import { StateView, StreamEvent } from "../src/types.js";

const baseState: StateView = {
  t_ms: 0,
  wall: "2000-01-01T00:00:00.000Z",
  mode: "HOME",
  devices: {
    temp1: { t_ms: 0, device: "temp1", raw: 450, value: 21, unit: "C" },
    light1: { t_ms: 0, device: "light1", raw: 0, value: 0, unit: "on" },
  },
  lights: { light1: "OFF" },
  active_alerts: 0,
};

function reading(seq: number, device: string, t_ms: number, value: number, unit = "C") {
  return {
    seq,
    event: {
      type: "reading",
      t_ms,
      wall: "w",
      payload: { t_ms, device, raw: 0, value, unit },
    } as StreamEvent,
  };
}

function alertEvent(
  seq: number,
  id: number,
  kind: string,
  state: "ACTIVE" | "ACKED" | "CLEARED",
  event: "raised" | "acked" | "cleared" = "raised",
): { seq: number; event: StreamEvent } {
  return {
    seq,
    event: {
      type: "alert",
      t_ms: 0,
      wall: "w",
      payload: { event, alert: { id, kind, device: "temp1", raised_at: 0, state } },
    } as StreamEvent,
  };
}

describe("DashboardModel", () => {
  it("hydrates panels, lights and mode from /state", () => {
    const model = new DashboardModel();
    model.hydrate(baseState);
    expect([...model.panels.keys()]).toEqual(["temp1", "light1"]);
    expect(model.lights.get("light1")).toEqual({ state: "OFF", pending: false });
    expect(model.mode).toBe("HOME");
  });

  it("updates panels from reading events and bounds the sparkline", () => {
    const model = new DashboardModel();
    model.hydrate(baseState);
    for (let i = 1; i <= SPARKLINE_CAPACITY + 20; i++) {
      const r = reading(i, "temp1", i * 100, 20 + (i % 5));
      expect(model.apply(r.seq, r.event)).toBe(true);
    }
    const panel = model.panels.get("temp1")!;
    expect(panel.history.length).toBe(SPARKLINE_CAPACITY);
    expect(panel.t_ms).toBe((SPARKLINE_CAPACITY + 20) * 100);
  });

  it("drops duplicate sequence numbers", () => {
    const model = new DashboardModel();
    const r = reading(5, "temp1", 100, 25);
    expect(model.apply(r.seq, r.event)).toBe(true);
    expect(model.apply(r.seq, r.event)).toBe(false);
    expect(model.panels.get("temp1")!.history.length).toBe(1);
  });

  it("orders alert rows by the ledger sequence of their raising event", () => {
    const model = new DashboardModel();
    const a = alertEvent(30, 2, "GAS_HIGH", "ACTIVE");
    const b = alertEvent(44, 3, "TEMP_HIGH", "ACTIVE");
    model.apply(a.seq, a.event);
    model.apply(b.seq, b.event);
    expect(model.alertRows().map((r) => r.alert.kind)).toEqual(["GAS_HIGH", "TEMP_HIGH"]);
    expect(model.activeAlertCount()).toBe(2);
  });

  it("lifecycle events update an existing row instead of adding one", () => {
    const model = new DashboardModel();
    const raised = alertEvent(10, 1, "INTRUSION", "ACTIVE");
    const acked = alertEvent(15, 1, "INTRUSION", "ACKED", "acked");
    model.apply(raised.seq, raised.event);
    model.apply(acked.seq, acked.event);
    expect(model.alertRows()).toHaveLength(1);
    expect(model.alertRows()[0].alert.state).toBe("ACKED");
  });

  it("marks a panel stale after more than five ticks of silence", () => {
    const model = new DashboardModel(100);
    model.hydrate(baseState);
    for (let i = 1; i <= 7; i++) {
      const r = reading(i, "light1", i * 100, 0, "on");
      model.apply(r.seq, r.event);
    }
    expect(model.panels.get("temp1")!.stale).toBe(true);
    expect(model.panels.get("light1")!.stale).toBe(false);
  });

  it("light readings confirm pending optimistic state", () => {
    const model = new DashboardModel();
    model.hydrate(baseState);
    model.optimisticLight("light1", true);
    expect(model.lights.get("light1")).toEqual({ state: "ON", pending: true });
    const r = reading(1, "light1", 100, 1, "on");
    model.apply(r.seq, r.event);
    expect(model.lights.get("light1")).toEqual({ state: "ON", pending: false });
  });

  it("reverting an optimistic light restores the previous state", () => {
    const model = new DashboardModel();
    model.hydrate(baseState);
    const before = model.optimisticLight("light1", true);
    model.revertLight("light1", before);
    expect(model.lights.get("light1")).toEqual({ state: "OFF", pending: false });
  });
});
