/** Dashboard state derived only from gateway responses and stream events.
 *
 * The model never invents values: panels hold the last reading seen, alert
 * rows mirror ledger events in sequence order, and a monotone sequence guard
 * makes replays after a reconnect idempotent.
 */
export const SPARKLINE_CAPACITY = 100;
export const STALE_AFTER_TICKS = 5;
export class DashboardModel {
    constructor(tickMs = 100) {
        this.tickMs = tickMs;
        this.panels = new Map();
        this.alerts = new Map(); // keyed by alert id
        this.lights = new Map();
        this.mode = "HOME";
        this.modePending = false;
        this.connection = "connecting";
        this.lastError = null;
        this.lastSeq = 0;
        this.latestTick = 0;
    }
    /** Seed everything from GET /state. */
    hydrate(state) {
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
    apply(seq, event) {
        if (seq <= this.lastSeq) {
            return false;
        }
        this.lastSeq = seq;
        if (event.type === "reading") {
            this.applyReading(event.payload);
        }
        else if (event.type === "alert") {
            this.applyAlert(seq, event.payload);
        }
        else if (event.type === "mode") {
            this.mode = event.payload.mode;
            this.modePending = false;
        }
        else if (event.type === "light") {
            const { device, on } = event.payload;
            this.lights.set(device, { state: on ? "ON" : "OFF", pending: false });
        }
        return true;
    }
    applyReading(reading) {
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
    applyAlert(seq, payload) {
        const existing = this.alerts.get(payload.alert.id);
        if (payload.event === "raised" || !existing) {
            this.alerts.set(payload.alert.id, {
                seq,
                alert: payload.alert,
                pendingAck: false,
            });
        }
        else {
            existing.alert = payload.alert;
            existing.pendingAck = false;
        }
    }
    refreshStaleness() {
        for (const panel of this.panels.values()) {
            panel.stale = this.latestTick - panel.t_ms > STALE_AFTER_TICKS * this.tickMs;
        }
    }
    /** Alert rows in ledger order (sequence of their raising event). */
    alertRows() {
        return [...this.alerts.values()].sort((a, b) => a.seq - b.seq);
    }
    activeAlertCount() {
        return this.alertRows().filter((row) => row.alert.state === "ACTIVE").length;
    }
    // -- optimistic mutations, reconciled by the stream ----------------------
    optimisticLight(device, on) {
        const before = this.lights.get(device);
        this.lights.set(device, { state: on ? "ON" : "OFF", pending: true });
        return before;
    }
    revertLight(device, before) {
        if (before) {
            this.lights.set(device, { ...before, pending: false });
        }
        else {
            this.lights.delete(device);
        }
    }
    optimisticMode(mode) {
        const before = this.mode;
        this.mode = mode;
        this.modePending = true;
        return before;
    }
    revertMode(before) {
        this.mode = before;
        this.modePending = false;
    }
    optimisticAck(alertId) {
        const row = this.alerts.get(alertId);
        if (row && row.alert.state === "ACTIVE") {
            row.alert = { ...row.alert, state: "ACKED" };
            row.pendingAck = true;
        }
    }
    revertAck(alertId) {
        const row = this.alerts.get(alertId);
        if (row && row.pendingAck) {
            row.alert = { ...row.alert, state: "ACTIVE" };
            row.pendingAck = false;
        }
    }
}
