/** Wires the API client, the event stream, and the model together.
 *
 * Every mutation is optimistic: the model flips immediately, the POST goes
 * out, and the next stream event (or an error response) reconciles it.
 */

import { ApiClient, ApiError } from "./api.js";
import { DashboardModel } from "./model.js";
import { EventSourceFactory, EventStream } from "./stream.js";
import { StreamEvent } from "./types.js";

export interface ControllerOptions {
  tickMs?: number;
  retryMs?: number;
  factory?: EventSourceFactory;
  onChange?: () => void;
}

export class Controller {
  readonly model: DashboardModel;
  private stream: EventStream | null = null;
  private readonly onChange: () => void;

  constructor(private api: ApiClient, private options: ControllerOptions = {}) {
    this.model = new DashboardModel(options.tickMs ?? 100);
    this.onChange = options.onChange ?? (() => {});
  }

  private changed(): void {
    this.onChange();
  }

  async start(): Promise<void> {
    try {
      const state = await this.api.getState();
      this.model.hydrate(state);
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        this.model.connection = "unauthorized";
        this.changed();
        return;
      }
      throw err;
    }
    this.model.connection = "live";
    this.stream = new EventStream(
      (lastId) => this.api.eventsUrl(lastId),
      {
        onEvent: (seq, data) => {
          const event = JSON.parse(data) as StreamEvent;
          if (this.model.apply(seq, event)) {
            this.changed();
          }
        },
        onStatus: (status) => {
          this.model.connection = status;
          this.changed();
        },
      },
      this.options.factory,
      this.options.retryMs ?? 1000,
    );
    this.stream.connect();
    this.changed();
  }

  stop(): void {
    this.stream?.close();
    this.stream = null;
  }

  async toggleLight(device: string): Promise<void> {
    const target = this.model.lights.get(device)?.state !== "ON";
    const before = this.model.optimisticLight(device, target);
    this.model.lastError = null;
    this.changed();
    try {
      await this.api.setLight(device, target);
    } catch (err) {
      this.model.revertLight(device, before);
      this.model.lastError = `light ${device}: ${(err as Error).message}`;
      this.changed();
    }
  }

  async setMode(mode: "HOME" | "AWAY"): Promise<void> {
    const before = this.model.optimisticMode(mode);
    this.model.lastError = null;
    this.changed();
    try {
      await this.api.setMode(mode.toLowerCase());
    } catch (err) {
      this.model.revertMode(before);
      this.model.lastError = `mode: ${(err as Error).message}`;
      this.changed();
    }
  }

  async ack(alertId: number): Promise<void> {
    this.model.optimisticAck(alertId);
    this.model.lastError = null;
    this.changed();
    try {
      await this.api.ackAlert(alertId);
    } catch (err) {
      this.model.revertAck(alertId);
      this.model.lastError = `ack #${alertId}: ${(err as Error).message}`;
      this.changed();
    }
  }
}
