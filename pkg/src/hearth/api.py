"""Remote-control surface: HTTP/JSON endpoints plus a server-push stream.

Single-user bearer-token auth on everything under /api/. Handlers only read
immutable snapshots; every mutation goes through the gateway's serialized
command channel and is answered after the tick that applied it. The event
stream speaks text/event-stream with the ledger sequence as the event id, so
a client reconnecting with Last-Event-Id resumes without gaps or duplicates.
The dashboard's static files, when configured, are served under /ui.
"""

from __future__ import annotations

import hmac
import json
import logging
import mimetypes
import queue as queue_mod
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import (
    HearthError,
    InvalidInput,
    NotFound,
    SchemaError,
    UnknownDevice,
    UnsupportedActuator,
)
from .gateway import Gateway

log = logging.getLogger(__name__)

_READINGS = re.compile(r"^/api/v1/sensors/([^/]+)/readings$")
_LIGHTS = re.compile(r"^/api/v1/lights/([^/]+)$")
_ACK = re.compile(r"^/api/v1/alerts/(\d+)/ack$")

_STATUS_FOR = {
    UnknownDevice: 404,
    NotFound: 404,
    UnsupportedActuator: 409,
    InvalidInput: 400,
    SchemaError: 400,
}


class ApiServer:
    """Threaded HTTP server bound to one gateway."""

    def __init__(
        self,
        gateway: Gateway,
        host: str = "127.0.0.1",
        port: int = 0,
        token: str = "hearth-dev-token",
        ui_dir: str | Path | None = None,
    ):
        handler = type("Handler", (_Handler,), {})
        handler.gateway = gateway
        handler.token = token
        handler.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self.httpd.stopping = threading.Event()
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self.httpd.serve_forever, name="hearth-api", daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self.httpd.stopping.set()
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=10)
            self._thread = None


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    gateway: Gateway
    token: str
    ui_dir: Path | None

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, obj: dict) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _authorized(self, query: dict) -> bool:
        header = self.headers.get("Authorization", "")
        presented = header[len("Bearer "):] if header.startswith("Bearer ") else ""
        if not presented:
            # EventSource cannot set headers, so the stream may pass a query token
            presented = (query.get("token") or [""])[0]
        return bool(presented) and hmac.compare_digest(presented, self.token)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"body is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidInput("body must be a JSON object")
        return doc

    def _fail(self, exc: HearthError) -> None:
        self._send_json(_STATUS_FOR.get(type(exc), 500), {"error": str(exc)})

    # -- verbs -------------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        query = parse_qs(url.query)
        if url.path == "/" or url.path.startswith("/ui"):
            return self._serve_static(url.path)
        if not self._authorized(query):
            return self._send_json(401, {"error": "missing or invalid token"})
        try:
            if url.path == "/api/v1/state":
                return self._send_json(200, self.gateway.state_view())
            if m := _READINGS.match(url.path):
                return self._get_readings(m.group(1), query)
            if url.path == "/api/v1/alerts":
                since = int((query.get("since") or ["0"])[0])
                return self._send_json(200, {"alerts": self.gateway.alert_events_since(since)})
            if url.path == "/api/v1/events":
                return self._stream_events(query)
            return self._send_json(404, {"error": f"no route {url.path}"})
        except HearthError as exc:
            return self._fail(exc)
        except ValueError as exc:
            return self._send_json(400, {"error": str(exc)})

    def do_POST(self):
        url = urlparse(self.path)
        query = parse_qs(url.query)
        if not self._authorized(query):
            return self._send_json(401, {"error": "missing or invalid token"})
        try:
            body = self._read_body()
            if m := _LIGHTS.match(url.path):
                device_id = m.group(1)
                if not self.gateway.has_device(device_id):
                    raise UnknownDevice(f"no device {device_id!r} registered")
                if "on" not in body or not isinstance(body["on"], bool):
                    raise InvalidInput('body must be {"on": true|false}')
                result = self.gateway.submit_command("light", device_id, body["on"])
                return self._send_json(200, result)
            if url.path == "/api/v1/mode":
                if "mode" not in body or not isinstance(body["mode"], str):
                    raise InvalidInput('body must be {"mode": "home"|"away"}')
                result = self.gateway.submit_command("mode", body["mode"])
                return self._send_json(200, result)
            if m := _ACK.match(url.path):
                result = self.gateway.submit_command("ack", int(m.group(1)))
                return self._send_json(200, result)
            return self._send_json(404, {"error": f"no route {url.path}"})
        except HearthError as exc:
            return self._fail(exc)

    # -- endpoint bodies ------------------------------------------------------

    def _get_readings(self, device_id: str, query: dict) -> None:
        if not self.gateway.has_device(device_id):
            raise UnknownDevice(f"no device {device_id!r} registered")
        limit = int((query.get("limit") or ["100"])[0])
        if not 1 <= limit <= 1000:
            raise InvalidInput(f"limit must be in [1, 1000], got {limit}")
        rows = self.gateway.readings_for(device_id, limit)
        self._send_json(200, {"device": device_id, "readings": rows})

    def _stream_events(self, query: dict) -> None:
        last_id = int(
            self.headers.get("Last-Event-Id")
            or (query.get("last_event_id") or ["0"])[0]
        )
        sub = self.gateway.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Connection", "close")
            self.end_headers()
            seen = last_id
            for entry in self.gateway.stream_entries_since(last_id):
                self._write_event(entry)
                seen = entry.seq
            stopping = self.server.stopping
            while not stopping.is_set():
                try:
                    entry = sub.get(timeout=1.0)
                except queue_mod.Empty:
                    self.wfile.write(b": keep-alive\n\n")
                    self.wfile.flush()
                    continue
                if entry.seq <= seen:
                    continue  # already sent during replay
                self._write_event(entry)
                seen = entry.seq
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.gateway.unsubscribe(sub)
            self.close_connection = True

    def _write_event(self, entry) -> None:
        # default event name so EventSource.onmessage fires; the kind is in the data
        data = json.dumps(
            {"type": entry.kind, "t_ms": entry.t_ms, "wall": entry.wall, "payload": entry.payload}
        )
        frame = f"id: {entry.seq}\ndata: {data}\n\n"
        self.wfile.write(frame.encode("utf-8"))
        self.wfile.flush()

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            return self._send_json(404, {"error": "no dashboard bundled (ui_dir unset)"})
        if path in ("/", "/ui"):
            self.send_response(302)
            self.send_header("Location", "/ui/")
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        rel = path[len("/ui/"):] or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir)) or not target.is_file():
            return self._send_json(404, {"error": f"no such file {rel!r}"})
        body = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
