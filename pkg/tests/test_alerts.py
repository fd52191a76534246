import random

import pytest

from alert_oracle import drive_engine, rescan
from hearth.alerts import (
    AlertEngine,
    AlertKind,
    AlertState,
    HomeMode,
    RuleConfig,
    default_rules,
)
from hearth.errors import InvalidInput, NotFound
from hearth.home import SensorReading

CHANNELS = {
    "temp1": AlertKind.TEMP_HIGH,
    "gas1": AlertKind.GAS_HIGH,
    "pir1": AlertKind.INTRUSION,
    "leak1": AlertKind.WATER_LEAK,
    "light1": AlertKind.LIGHTS_LEFT_ON,
}


def engine(mode=HomeMode.HOME, k=3):
    return AlertEngine(default_rules(k=k), CHANNELS, mode=mode)


def reading(device, t_ms, value):
    return SensorReading(t_ms, device, 0, value, "")


def feed(eng, device, values, t0=0, dt=100):
    """Run one reading per tick; returns (raised, cleared) alert lists."""
    raised, cleared = [], []
    for i, v in enumerate(values):
        tick = [reading(device, t0 + i * dt, v)]
        raised += eng.evaluate(tick)
        cleared += eng.clear_check(tick)
    return raised, cleared


# --------------------------------------------------------------------------
# Debounce and raise


def test_temp_high_raised_on_third_qualifying_tick():
    eng = engine()
    raised, _ = feed(eng, "temp1", [26.0, 26.0, 26.0])
    assert [a.kind for a in raised] == [AlertKind.TEMP_HIGH]
    assert raised[0].raised_at == 200
    assert len(raised[0].evidence) == 3
    assert raised[0].state is AlertState.ACTIVE


def test_debounce_resets_on_non_triggering_sample():
    eng = engine()
    raised, _ = feed(eng, "temp1", [26.0, 26.0, 24.0, 26.0, 26.0])
    assert raised == []
    raised, _ = feed(eng, "temp1", [26.0], t0=500)
    assert len(raised) == 1


def test_no_second_alert_while_first_active():
    eng = engine(mode=HomeMode.AWAY)
    raised, _ = feed(eng, "light1", [1.0] * 10)
    assert len(raised) == 1
    assert raised[0].kind is AlertKind.LIGHTS_LEFT_ON


def test_boundary_value_does_not_trigger():
    # 25 is not "above 25"
    eng = engine()
    raised, _ = feed(eng, "temp1", [25.0] * 5)
    assert raised == []


def test_unknown_devices_ignored():
    eng = engine()
    assert eng.evaluate([reading("ghost", 0, 99.0)]) == []


# --------------------------------------------------------------------------
# Mode gating


def test_motion_at_home_never_intrudes():
    eng = engine(mode=HomeMode.HOME)
    raised, _ = feed(eng, "pir1", [1.0] * 20)
    assert raised == []


def test_motion_away_raises_intrusion():
    eng = engine(mode=HomeMode.AWAY)
    raised, _ = feed(eng, "pir1", [1.0, 1.0, 1.0])
    assert [a.kind for a in raised] == [AlertKind.INTRUSION]


def test_mode_change_restarts_debounce():
    eng = engine(mode=HomeMode.AWAY)
    feed(eng, "pir1", [1.0, 1.0])  # two of three
    eng.set_mode(HomeMode.HOME)
    eng.set_mode(HomeMode.AWAY)
    raised, _ = feed(eng, "pir1", [1.0, 1.0], t0=200)
    assert raised == []  # counter restarted, still only two
    raised, _ = feed(eng, "pir1", [1.0], t0=400)
    assert len(raised) == 1


def test_return_home_keeps_active_intrusion():
    eng = engine(mode=HomeMode.AWAY)
    raised, _ = feed(eng, "pir1", [1.0, 1.0, 1.0])
    eng.set_mode(HomeMode.HOME)
    assert raised[0].state is AlertState.ACTIVE


def test_set_mode_same_is_noop():
    eng = engine()
    assert eng.set_mode(HomeMode.HOME) is False
    assert eng.set_mode(HomeMode.AWAY) is True


# --------------------------------------------------------------------------
# Acknowledge


def test_ack_lifecycle():
    eng = engine(mode=HomeMode.AWAY)
    raised, _ = feed(eng, "pir1", [1.0, 1.0, 1.0])
    alert, changed = eng.acknowledge(raised[0].id)
    assert changed and alert.state is AlertState.ACKED
    alert, changed = eng.acknowledge(raised[0].id)
    assert not changed and alert.state is AlertState.ACKED


def test_ack_unknown_id():
    with pytest.raises(NotFound):
        engine().acknowledge(7)


# --------------------------------------------------------------------------
# Hysteresis clearing


def test_temp_clears_after_k_ticks_at_clear_level():
    eng = engine()
    raised, _ = feed(eng, "temp1", [26.0, 26.0, 26.0])
    _, cleared = feed(eng, "temp1", [23.0, 23.0, 23.0], t0=300)
    assert cleared == raised
    assert raised[0].state is AlertState.CLEARED


def test_oscillation_above_clear_level_stays_active():
    eng = engine()
    raised, _ = feed(eng, "temp1", [26.0, 26.0, 26.0])
    _, cleared = feed(eng, "temp1", [24.0, 26.0] * 6, t0=300)
    assert cleared == []
    assert raised[0].state is AlertState.ACTIVE


def test_intrusion_never_auto_clears():
    eng = engine(mode=HomeMode.AWAY)
    raised, _ = feed(eng, "pir1", [1.0, 1.0, 1.0])
    _, cleared = feed(eng, "pir1", [0.0] * 30, t0=300)
    assert cleared == []
    assert raised[0].state is AlertState.ACTIVE


def test_acked_analog_alert_still_clears():
    eng = engine()
    raised, _ = feed(eng, "temp1", [26.0] * 3)
    eng.acknowledge(raised[0].id)
    _, cleared = feed(eng, "temp1", [23.0] * 3, t0=300)
    assert raised[0].state is AlertState.CLEARED


def test_new_episode_after_clear():
    eng = engine()
    feed(eng, "temp1", [26.0] * 3)
    feed(eng, "temp1", [23.0] * 3, t0=300)
    raised, _ = feed(eng, "temp1", [26.0] * 3, t0=600)
    assert len(raised) == 1
    assert raised[0].id == 2


def test_lights_alert_clears_when_light_turned_off():
    eng = engine(mode=HomeMode.AWAY)
    raised, _ = feed(eng, "light1", [1.0] * 3)
    _, cleared = feed(eng, "light1", [0.0] * 3, t0=300)
    assert cleared == raised


# --------------------------------------------------------------------------
# Rule config validation


def test_rule_config_validation():
    with pytest.raises(InvalidInput):
        RuleConfig(AlertKind.TEMP_HIGH, 25.0, 23.0, k=0)
    with pytest.raises(InvalidInput):
        RuleConfig(AlertKind.TEMP_HIGH, 25.0, 25.0)
    with pytest.raises(InvalidInput):
        RuleConfig(AlertKind.GAS_HIGH, raise_level=1000.0, clear_level=None)


# --------------------------------------------------------------------------
# Brute-force oracle equivalence


ORACLE_RULES = {
    "TEMP_HIGH": (3, 25.0, 23.0),
    "GAS_HIGH": (3, 1000.0, 800.0),
    "SMOKE_HIGH": (3, 300.0, 240.0),
    "INTRUSION": (3, None, None),
    "WATER_LEAK": (3, 0.5, 0.4),
    "LIGHTS_LEFT_ON": (3, None, None),
}
ORACLE_CHANNELS = {d: k.value for d, k in CHANNELS.items()}


def random_script(rng, ticks, allow_mode_ops=True):
    script = []
    for i in range(ticks):
        ops = []
        if allow_mode_ops and rng.random() < 0.08:
            ops.append(("mode", rng.choice(["HOME", "AWAY"])))
        if rng.random() < 0.05:
            ops.append(("ack", rng.randint(1, 6)))
        readings = [
            ("temp1", i * 100, float(rng.randint(20, 30))),
            ("gas1", i * 100, float(rng.randint(500, 1500))),
            ("pir1", i * 100, float(rng.randint(0, 1))),
            ("leak1", i * 100, rng.choice([0.3, 0.45, 0.55, 0.7])),
            ("light1", i * 100, float(rng.randint(0, 1))),
        ]
        script.append((ops, readings))
    return script


@pytest.mark.parametrize("seed", range(40))
def test_engine_matches_brute_force_rescan(seed):
    rng = random.Random(seed)
    script = random_script(rng, ticks=rng.randint(1, 200))
    expected = rescan(ORACLE_RULES, ORACLE_CHANNELS, script)
    actual = drive_engine(engine(), script)
    assert actual == expected


@pytest.mark.parametrize("seed", range(10))
def test_home_only_traces_raise_no_gated_alerts(seed):
    rng = random.Random(1000 + seed)
    script = random_script(rng, ticks=150, allow_mode_ops=False)
    eng = engine()
    events = drive_engine(eng, script)
    kinds = {e[2] for e in events if e[0] == "raised"}
    assert "INTRUSION" not in kinds and "LIGHTS_LEFT_ON" not in kinds


@pytest.mark.parametrize("seed", range(10))
def test_at_most_one_active_per_kind_device_and_evidence_k(seed):
    rng = random.Random(2000 + seed)
    eng = engine()
    drive_engine(eng, random_script(rng, ticks=200))
    seen = set()
    for alert in eng.alerts:
        assert len(alert.evidence) == 3
        if alert.state is AlertState.ACTIVE:
            key = (alert.kind, alert.device)
            assert key not in seen
            seen.add(key)
