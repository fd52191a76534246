/** Reconnecting wrapper over EventSource with Last-Event-Id resume.
 *
 * The factory is injectable so tests can script the backend. Sequence ids
 * come from the frame's lastEventId (the ledger sequence); on connection
 * loss the wrapper reopens the stream with the last seen id in the query,
 * and the model's monotone guard drops any overlap the server replays.
 */
export class EventStream {
    constructor(urlFor, callbacks, factory = (url) => new EventSource(url), retryMs = 1000) {
        this.urlFor = urlFor;
        this.callbacks = callbacks;
        this.factory = factory;
        this.retryMs = retryMs;
        this.lastEventId = null;
        this.source = null;
        this.timer = null;
        this.closed = false;
    }
    connect() {
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
    close() {
        this.closed = true;
        if (this.timer !== null) {
            clearTimeout(this.timer);
        }
        this.source?.close();
        this.source = null;
    }
}
