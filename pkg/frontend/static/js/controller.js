/** Wires the API client, the event stream, and the model together.
 *
 * Every mutation is optimistic: the model flips immediately, the POST goes
 * out, and the next stream event (or an error response) reconciles it.
 */
import { ApiError } from "./api.js";
import { DashboardModel } from "./model.js";
import { EventStream } from "./stream.js";
export class Controller {
    constructor(api, options = {}) {
        this.api = api;
        this.options = options;
        this.stream = null;
        this.model = new DashboardModel(options.tickMs ?? 100);
        this.onChange = options.onChange ?? (() => { });
    }
    changed() {
        this.onChange();
    }
    async start() {
        try {
            const state = await this.api.getState();
            this.model.hydrate(state);
        }
        catch (err) {
            if (err instanceof ApiError && err.status === 401) {
                this.model.connection = "unauthorized";
                this.changed();
                return;
            }
            throw err;
        }
        this.model.connection = "live";
        this.stream = new EventStream((lastId) => this.api.eventsUrl(lastId), {
            onEvent: (seq, data) => {
                const event = JSON.parse(data);
                if (this.model.apply(seq, event)) {
                    this.changed();
                }
            },
            onStatus: (status) => {
                this.model.connection = status;
                this.changed();
            },
        }, this.options.factory, this.options.retryMs ?? 1000);
        this.stream.connect();
        this.changed();
    }
    stop() {
        this.stream?.close();
        this.stream = null;
    }
    async toggleLight(device) {
        const target = this.model.lights.get(device)?.state !== "ON";
        const before = this.model.optimisticLight(device, target);
        this.model.lastError = null;
        this.changed();
        try {
            await this.api.setLight(device, target);
        }
        catch (err) {
            this.model.revertLight(device, before);
            this.model.lastError = `light ${device}: ${err.message}`;
            this.changed();
        }
    }
    async setMode(mode) {
        const before = this.model.optimisticMode(mode);
        this.model.lastError = null;
        this.changed();
        try {
            await this.api.setMode(mode.toLowerCase());
        }
        catch (err) {
            this.model.revertMode(before);
            this.model.lastError = `mode: ${err.message}`;
            this.changed();
        }
    }
    async ack(alertId) {
        this.model.optimisticAck(alertId);
        this.model.lastError = null;
        this.changed();
        try {
            await this.api.ackAlert(alertId);
        }
        catch (err) {
            this.model.revertAck(alertId);
            this.model.lastError = `ack #${alertId}: ${err.message}`;
            this.changed();
        }
    }
}
