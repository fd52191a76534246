/** Thin fetch client for the gateway's JSON endpoints. */
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
export class ApiClient {
    constructor(base, token, fetchImpl = (url, init) => fetch(url, init)) {
        this.base = base;
        this.token = token;
        this.fetchImpl = fetchImpl;
    }
    async request(method, path, body) {
        const init = {
            method,
            headers: { Authorization: `Bearer ${this.token}` },
        };
        if (body !== undefined) {
            init.headers = { ...init.headers, "Content-Type": "application/json" };
            init.body = JSON.stringify(body);
        }
        const resp = await this.fetchImpl(`${this.base}${path}`, init);
        let doc = null;
        try {
            doc = await resp.json();
        }
        catch {
            /* non-JSON error body */
        }
        if (!resp.ok) {
            const detail = doc?.error ?? resp.statusText;
            throw new ApiError(resp.status, detail);
        }
        return doc;
    }
    getState() {
        return this.request("GET", "/api/v1/state");
    }
    setLight(deviceId, on) {
        return this.request("POST", `/api/v1/lights/${deviceId}`, { on });
    }
    setMode(mode) {
        return this.request("POST", "/api/v1/mode", { mode });
    }
    ackAlert(alertId) {
        return this.request("POST", `/api/v1/alerts/${alertId}/ack`);
    }
    /** URL for the event stream; EventSource cannot set headers, so the token rides the query. */
    eventsUrl(lastEventId) {
        const resume = lastEventId !== null ? `&last_event_id=${lastEventId}` : "";
        return `${this.base}/api/v1/events?token=${encodeURIComponent(this.token)}${resume}`;
    }
}
