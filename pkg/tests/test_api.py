import http.client
import json
import time

import pytest
import requests

from hearth.api import ApiServer
from hearth.config import GatewayConfig
from hearth.gateway import STREAM_KINDS, Gateway
from hearth.home import load_scenario

TOKEN = "secret-token-1"


@pytest.fixture
def live(tmp_path):
    """Gateway with a latched-motion scenario, ticking fast behind a live API."""
    config = GatewayConfig(api_token=TOKEN)
    gw = Gateway(config, data_dir=tmp_path / "data")
    scenario = load_scenario([{"t_ms": 0, "target": "pir1", "motion": True}], gw.home)
    gw.set_scenario(scenario)
    server = ApiServer(gw, port=0, token=TOKEN)
    server.start()
    gw.start(speed=50.0)
    try:
        yield gw, f"http://127.0.0.1:{server.port}"
    finally:
        gw.stop()
        server.stop()


def auth():
    return {"Authorization": f"Bearer {TOKEN}"}


def wait_until(predicate, timeout=10.0, interval=0.02):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = predicate()
        if value:
            return value
        time.sleep(interval)
    raise AssertionError("condition not reached in time")


def sse_events(base, last_id=None, stop_when=None, max_time=8.0):
    """Collect parsed SSE frames until stop_when(events) or the time budget."""
    headers = {"Accept": "text/event-stream"}
    if last_id is not None:
        headers["Last-Event-Id"] = str(last_id)
    events = []
    with requests.get(
        f"{base}/api/v1/events?token={TOKEN}", stream=True, timeout=10, headers=headers
    ) as resp:
        assert resp.status_code == 200
        assert resp.headers["Content-Type"].startswith("text/event-stream")
        current = {}
        deadline = time.monotonic() + max_time
        for line in resp.iter_lines(decode_unicode=True, chunk_size=1):
            if line is None or time.monotonic() > deadline:
                break
            if line == "":
                if current:
                    events.append(current)
                    current = {}
                if stop_when and stop_when(events):
                    break
            elif line.startswith(":"):
                continue
            elif line.startswith("id: "):
                current["id"] = int(line[4:])
            elif line.startswith("data: "):
                current["data"] = json.loads(line[6:])
    return events


# --------------------------------------------------------------------------
# Auth


def test_endpoints_reject_missing_or_bad_tokens(live):
    _, base = live
    assert requests.get(f"{base}/api/v1/state", timeout=5).status_code == 401
    bad = {"Authorization": "Bearer nope"}
    assert requests.get(f"{base}/api/v1/state", headers=bad, timeout=5).status_code == 401
    assert requests.post(f"{base}/api/v1/mode", json={"mode": "away"}, timeout=5).status_code == 401
    assert requests.get(f"{base}/api/v1/events", timeout=5).status_code == 401
    body = requests.get(f"{base}/api/v1/state", timeout=5).json()
    assert "devices" not in body  # nothing leaks pre-auth


# --------------------------------------------------------------------------
# State and readings


def test_idle_state_view(live):
    _, base = live
    view = wait_until(
        lambda: (r := requests.get(f"{base}/api/v1/state", headers=auth(), timeout=5).json())
        and r.get("devices")
        and r
    )
    assert view["mode"] == "HOME"
    assert view["lights"] == {"light1": "OFF"}
    assert view["active_alerts"] == 0
    assert "wall" in view


def test_readings_limit_and_errors(live):
    _, base = live
    wait_until(lambda: requests.get(f"{base}/api/v1/state", headers=auth(), timeout=5).json().get("devices"))
    r = requests.get(f"{base}/api/v1/sensors/temp1/readings?limit=1", headers=auth(), timeout=5)
    assert r.status_code == 200
    rows = r.json()["readings"]
    assert len(rows) == 1 and rows[0]["device"] == "temp1"

    r = requests.get(f"{base}/api/v1/sensors/ghost/readings", headers=auth(), timeout=5)
    assert r.status_code == 404
    r = requests.get(f"{base}/api/v1/sensors/temp1/readings?limit=0", headers=auth(), timeout=5)
    assert r.status_code == 400
    r = requests.get(f"{base}/api/v1/sensors/temp1/readings?limit=2000", headers=auth(), timeout=5)
    assert r.status_code == 400


# --------------------------------------------------------------------------
# Lights


def test_light_toggle_round_trip(live):
    gw, base = live
    r = requests.post(f"{base}/api/v1/lights/light1", headers=auth(), json={"on": True}, timeout=5)
    assert r.status_code == 200
    assert r.json() == {"device": "light1", "state": "ON"}
    wait_until(
        lambda: requests.get(f"{base}/api/v1/state", headers=auth(), timeout=5).json()["lights"]["light1"] == "ON"
    )
    # idempotent: same command again changes nothing and logs nothing new
    r = requests.post(f"{base}/api/v1/lights/light1", headers=auth(), json={"on": True}, timeout=5)
    assert r.json()["state"] == "ON"
    light_events = [e for e in gw.ledger.entries if e.kind == "light"]
    assert len(light_events) == 1

    r = requests.post(f"{base}/api/v1/lights/light1", headers=auth(), json={"on": False}, timeout=5)
    assert r.json()["state"] == "OFF"


def test_light_validation_errors(live):
    _, base = live
    r = requests.post(f"{base}/api/v1/lights/pir1", headers=auth(), json={"on": True}, timeout=5)
    assert r.status_code == 409
    r = requests.post(f"{base}/api/v1/lights/ghost", headers=auth(), json={"on": True}, timeout=5)
    assert r.status_code == 404
    r = requests.post(f"{base}/api/v1/lights/light1", headers=auth(), json={"on": "yes"}, timeout=5)
    assert r.status_code == 400


# --------------------------------------------------------------------------
# Mode, alerts, ack


def test_mode_away_then_motion_raises_visible_intrusion(live):
    _, base = live
    r = requests.post(f"{base}/api/v1/mode", headers=auth(), json={"mode": "away"}, timeout=5)
    assert r.status_code == 200 and r.json() == {"mode": "AWAY"}

    raised = wait_until(
        lambda: [
            e
            for e in requests.get(f"{base}/api/v1/alerts", headers=auth(), timeout=5).json()["alerts"]
            if e["event"] == "raised" and e["alert"]["kind"] == "INTRUSION"
        ]
    )
    alert_id = raised[0]["alert"]["id"]

    r = requests.post(f"{base}/api/v1/alerts/{alert_id}/ack", headers=auth(), timeout=5)
    assert r.status_code == 200 and r.json()["alert"]["state"] == "ACKED"
    acked = [
        e
        for e in requests.get(f"{base}/api/v1/alerts", headers=auth(), timeout=5).json()["alerts"]
        if e["event"] == "acked"
    ]
    assert len(acked) == 1

    r = requests.post(f"{base}/api/v1/alerts/999/ack", headers=auth(), timeout=5)
    assert r.status_code == 404


def test_mode_validation(live):
    _, base = live
    r = requests.post(f"{base}/api/v1/mode", headers=auth(), json={"mode": "banana"}, timeout=5)
    assert r.status_code == 400
    r = requests.post(f"{base}/api/v1/mode", headers=auth(), json={}, timeout=5)
    assert r.status_code == 400


# --------------------------------------------------------------------------
# Event stream


def test_stream_orders_alert_before_next_ticks_readings(live):
    _, base = live
    requests.post(f"{base}/api/v1/mode", headers=auth(), json={"mode": "away"}, timeout=5)
    events = sse_events(
        base,
        stop_when=lambda evs: any(e["data"]["type"] == "alert" for e in evs[:-1]) and len(evs) > 12,
    )
    ids = [e["id"] for e in events]
    assert ids == sorted(ids) and len(set(ids)) == len(ids)
    alert = next(e for e in events if e["data"]["type"] == "alert")
    later_readings = [
        e for e in events if e["data"]["type"] == "reading" and e["id"] > alert["id"]
    ]
    assert later_readings, "stream should continue after the alert"
    assert all(e["data"]["t_ms"] >= alert["data"]["t_ms"] for e in later_readings)


def test_stream_resume_with_last_event_id_no_gaps_no_duplicates(live):
    gw, base = live
    first = sse_events(base, stop_when=lambda evs: len(evs) >= 8)
    assert len(first) >= 8
    last_seen = first[-1]["id"]
    second = sse_events(base, last_id=last_seen, stop_when=lambda evs: len(evs) >= 8)
    combined = [e["id"] for e in first + second]
    assert len(set(combined)) == len(combined), "duplicate event ids across reconnect"
    top = max(combined)
    expected = [e.seq for e in gw.ledger.since(0, STREAM_KINDS) if first[0]["id"] <= e.seq <= top]
    assert combined == expected, "gaps or reordering across reconnect"


def test_static_ui_serving_and_traversal_guard(tmp_path):
    ui = tmp_path / "ui"
    (ui / "js").mkdir(parents=True)
    (ui / "index.html").write_text("<html><body>hearth dashboard</body></html>")
    (ui / "js" / "main.js").write_text("console.log('hi');")
    (tmp_path / "secret.txt").write_text("nope")

    gw = Gateway(GatewayConfig(api_token=TOKEN), data_dir=tmp_path / "data")
    server = ApiServer(gw, port=0, token=TOKEN, ui_dir=ui)
    server.start()
    try:
        base = f"http://127.0.0.1:{server.port}"
        r = requests.get(f"{base}/", timeout=5, allow_redirects=False)
        assert r.status_code == 302 and r.headers["Location"] == "/ui/"
        r = requests.get(f"{base}/ui/", timeout=5)
        assert r.status_code == 200 and "hearth dashboard" in r.text
        r = requests.get(f"{base}/ui/js/main.js", timeout=5)
        assert r.status_code == 200
        assert r.headers["Content-Type"].startswith(("text/javascript", "application/javascript"))
        # requests normalizes "..", so send the raw traversal path ourselves
        conn = http.client.HTTPConnection("127.0.0.1", server.port, timeout=5)
        conn.request("GET", "/ui/../secret.txt")
        assert conn.getresponse().status == 404
        conn.close()
        r = requests.get(f"{base}/ui/missing.js", timeout=5)
        assert r.status_code == 404
    finally:
        gw.close()
        server.stop()


def test_idle_stream_carries_only_reading_events(tmp_path):
    config = GatewayConfig(api_token=TOKEN)
    gw = Gateway(config, data_dir=tmp_path / "data")
    server = ApiServer(gw, port=0, token=TOKEN)
    server.start()
    gw.start(speed=50.0)
    try:
        base = f"http://127.0.0.1:{server.port}"
        events = sse_events(base, stop_when=lambda evs: len(evs) >= 10)
        assert {e["data"]["type"] for e in events} == {"reading"}
    finally:
        gw.stop()
        server.stop()
