/** Reconnecting wrapper over EventSource with Last-Event-Id resume.
 *
 * The factory is injectable so tests can script the backend. Sequence ids
 * come from the frame's lastEventId (the ledger sequence); on connection
 * loss the wrapper reopens the stream with the last seen id in the query,
 * and the model's monotone guard drops any overlap the server replays.
 */

export interface EventSourceLike {
  onmessage: ((ev: MessageEvent<string>) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onopen: ((ev: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface StreamCallbacks {
  onEvent(seq: number, data: string): void;
  onStatus(status: "live" | "reconnecting"): void;
}

export class EventStream {
  lastEventId: number | null = null;
  private source: EventSourceLike | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private urlFor: (lastEventId: number | null) => string,
    private callbacks: StreamCallbacks,
    private factory: EventSourceFactory = (url) => new EventSource(url) as EventSourceLike,
    private retryMs: number = 1000,
  ) {}

  connect(): void {
    if (this.closed) {
      return;
    }
    this.source = this.factory(this.urlFor(this.lastEventId));
    this.source.onopen = () => this.callbacks.onStatus("live");
    this.source.onmessage = (ev) => {
      const seq = Number(ev.lastEventId);
      if (Number.isFinite(seq) && seq > 0) {
        this.lastEventId = seq;
      }
      this.callbacks.onEvent(seq, ev.data);
    };
    this.source.onerror = () => {
      if (this.closed) {
        return;
      }
      this.source?.close();
      this.source = null;
      this.callbacks.onStatus("reconnecting");
      this.timer = setTimeout(() => this.connect(), this.retryMs);
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.source?.close();
    this.source = null;
  }
}
