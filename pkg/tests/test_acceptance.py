"""Acceptance suite: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

import dataclasses
import functools
import itertools

import numpy as np
import pytest

from sepsim import actuator, experiments
from sepsim.actuator import (FORWARD, MODES, REVERSE, SURFACES,
                             LinearMotorState, run_plan, step_sequence)
from sepsim.cli import main as cli_main
from sepsim.constants import MODULE_SIDE, MU0, STEP_DISTANCE
from sepsim.errors import DemagnetizationFailed
from sepsim.magnetics import (Dipole, JaState, PRESET_TABLE1, PulseWaveform,
                              SolverConfig, apply_pulse, centered,
                              demagnetize, demagnetized_rod, dipole_force,
                              drive_sequence, flux_metrics, interaction_energy)
from sepsim.power import (CapacitorBank, DeadTimeConfig, GateSchedule,
                          build_multiplex, pulse_energy, recharge,
                          validate_schedule)

from test_power import _random_schedule, brute_force_violations


def criterion(number, name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {number:02d} {name}: FAIL")
                raise
            print(f"ACCEPTANCE {number:02d} {name}: PASS")
        return wrapper
    return deco


BENCH_COIL = centered(250, 8e-3, 1.5e-3, 0.2e-3)


def fresh_rod():
    return demagnetized_rod(PRESET_TABLE1, 1.5e-3, 8e-3)


@criterion(1, "commutation orders and exact round trip")
def test_criterion_01_commutation():
    fwd = step_sequence(FORWARD, 6)
    rev = step_sequence(REVERSE, 6)
    assert fwd.toggle_order == (3, 1, 2, 3, 1, 2)
    assert rev.toggle_order == (1, 3, 2, 1, 3, 2)
    state0 = LinearMotorState()
    bank = CapacitorBank()
    state, bank, _ = run_plan(state0, fwd, MODES["stable"], bank, 0.03)
    state, bank, _ = run_plan(state, rev, MODES["stable"], bank, 0.03)
    assert state == state0


@criterion(2, "six steps cover one module side exactly")
def test_criterion_02_stroke():
    state = LinearMotorState()
    for entry in step_sequence(FORWARD, 6).entries:
        state = state.toggled(entry)
    assert state.slider_steps == 6
    assert 6 * STEP_DISTANCE == MODULE_SIDE
    assert state.slider_pos == MODULE_SIDE


@criterion(3, "hysteresis loop properties")
def test_criterion_03_hysteresis():
    mat = PRESET_TABLE1
    cfg = SolverConfig()
    h_max = 5 * mat.hc

    def ramp(a, b, n=300):
        return np.linspace(a, b, n + 1)[1:]

    def cycle(state):
        hs = np.concatenate([ramp(h_max, -h_max), ramp(-h_max, h_max)])
        ms = np.empty_like(hs)
        for i, h in enumerate(hs):
            state = drive_sequence(mat, state, [float(h)], cfg)
            ms[i] = state.m
        return state, ms

    # loop closure within 1 % of saturation on the established loop
    state = drive_sequence(mat, JaState(), ramp(0, h_max), cfg)
    state, first = cycle(state)
    state, second = cycle(state)
    state, third = cycle(state)
    assert abs(second[-1] - first[-1]) < 0.01 * mat.ms
    assert np.max(np.abs(third - second)) < 0.01 * mat.ms

    # odd symmetry is exact
    rng = np.random.default_rng(7)
    for _ in range(10):
        drive = rng.uniform(-5 * mat.hc, 5 * mat.hc, size=12)
        pos = drive_sequence(mat, JaState(), drive, cfg)
        neg = drive_sequence(mat, JaState(), -drive, cfg)
        assert neg.m == -pos.m

    # |M| <= Ms always
    for _ in range(20):
        drive = rng.uniform(-8 * mat.hc, 8 * mat.hc, size=16)
        st = JaState()
        for h in drive:
            st = drive_sequence(mat, st, [float(h)], cfg)
            assert abs(st.m) <= mat.ms

    # halving the sampling step moves the final M by < 0.5 % of Ms
    rod = fresh_rod()
    a = apply_pulse(rod, BENCH_COIL, PulseWaveform(20.0), SolverConfig())
    b = apply_pulse(rod, BENCH_COIL, PulseWaveform(20.0),
                    SolverConfig(time_step=2.5e-7))
    assert np.max(np.abs(a.m - b.m)) < 0.005 * mat.ms


@criterion(4, "calibrated remanence from a single 20 A pulse")
def test_criterion_04_remanence():
    for polarity in (+1, -1):
        rod = apply_pulse(fresh_rod(), BENCH_COIL,
                          PulseWaveform(20.0, polarity=polarity))
        b_center = flux_metrics(rod)["b_center"]
        assert b_center == pytest.approx(polarity * 0.03, rel=0.10)


@criterion(5, "decaying-sine demagnetization")
def test_criterion_05_demagnetization():
    cfg = SolverConfig()
    assert cfg.demag_frequency == 2.0
    sat = apply_pulse(fresh_rod(), BENCH_COIL, PulseWaveform(20.0), cfg)
    erased = demagnetize(sat, BENCH_COIL, 20.0, cfg)
    assert np.max(np.abs(erased.m)) < 0.05 * PRESET_TABLE1.ms
    with pytest.raises(DemagnetizationFailed):
        demagnetize(sat, BENCH_COIL, 0.0, cfg)


@criterion(6, "pulse-peak sweep trend and saturation")
def test_criterion_06_pulse_sweep():
    _, rows = experiments.sweep_pulse_peak()
    peaks = [r[0] for r in rows]
    bc = np.array([r[1] for r in rows])
    ba = np.array([r[2] for r in rows])
    assert np.all(np.diff(bc) >= -1e-12)
    assert np.all(np.diff(ba) >= -1e-12)
    i20 = peaks.index(20.0)
    assert bc[i20] >= 0.95 * bc[-1]
    assert ba[i20] >= 0.95 * ba[-1]


@criterion(7, "turns sweep linearity and 200-300 turn band")
def test_criterion_07_turns_sweep():
    _, rows = experiments.sweep_turns()
    turns = np.array([r[0] for r in rows], dtype=float)
    h_center = np.array([r[1] for r in rows])
    b_rem = np.array([r[4] for r in rows])
    coeffs = np.polyfit(turns, h_center, 1)
    residual = h_center - np.polyval(coeffs, turns)
    r_squared = 1.0 - residual @ residual / np.sum(
        (h_center - h_center.mean()) ** 2)
    assert r_squared > 0.999
    b250 = b_rem[np.argmin(np.abs(turns - 260))]
    b300 = b_rem[np.argmin(np.abs(turns - 300))]
    assert b250 >= 0.95 * b300


@criterion(8, "coverage study qualitative profile")
def test_criterion_08_coverage():
    _, rows = experiments.coverage_study()
    ms = PRESET_TABLE1.ms
    mr = PRESET_TABLE1.mr
    groups = {}
    for row in rows:
        groups.setdefault(row[0], []).append(row)
    half_m = np.array([r[5] for r in groups["half"]])
    exact_m = np.array([r[5] for r in groups["exact"]])
    assert abs(half_m[0]) < 0.10 * ms and abs(half_m[-1]) < 0.10 * ms
    assert abs(half_m[len(half_m) // 2]) >= 0.9 * mr
    assert np.min(np.abs(exact_m)) >= 0.9 * mr
    h_peak = {name: max(r[4] for r in group) for name, group in groups.items()}
    assert h_peak["half"] > h_peak["exact"] > h_peak["extra"]


@criterion(9, "speed table within 2 mm/s cell-wise")
def test_criterion_09_speed_table():
    _, rows = experiments.speed_table()
    table2 = {"fastest": (20.0, 20.0, 18.0, 18.0),
              "stable": (13.0, 13.0, 12.0, 12.0),
              "enhanced": (9.0, 9.0, 9.0, 9.0)}
    for row in rows:
        cells = row[1:]
        for got, want in zip(cells, table2[row[0]]):
            assert abs(got - want) <= 2.0
        assert max(cells) - min(cells) <= 2.0
        if row[0] == "enhanced":
            assert len(set(cells)) == 1


@criterion(10, "holding-force anchors and monotonicity")
def test_criterion_10_holding_force():
    _, rows = experiments.holding_force_grid()
    grid = {(v, n): f for v, n, f in rows}
    voltages = sorted({v for v, _ in grid})
    counts = sorted({n for _, n in grid})
    assert grid[(16.0, 1)] == pytest.approx(75.0, rel=0.10)
    for (v, n), f in grid.items():
        if v < 4.0:
            assert f == 0.0
    for n in counts:
        col = [grid[(v, n)] for v in voltages]
        assert all(b >= a - 1e-9 for a, b in zip(col, col[1:]))
    for v in voltages:
        row = [grid[(v, n)] for n in counts]
        assert all(b >= a - 1e-9 for a, b in zip(row, row[1:]))
    assert grid[(16.0, 5)] - grid[(16.0, 2)] < 0.1  # saturation


@criterion(11, "electronics safety: fuzz plus exhaustive horizon")
def test_criterion_11_electronics_safety():
    mux = build_multiplex()
    dt = DeadTimeConfig(dead_time=40e-3)
    rng = np.random.default_rng(11)
    n_violating = 0
    for _ in range(10_000):
        sched = _random_schedule(rng)
        report = validate_schedule(sched, mux, dt)
        oracle = brute_force_violations(sched, mux, dt)
        assert report.ok == (not oracle)
        assert {v.kind for v in report.violations} == oracle
        n_violating += bool(oracle)
    assert n_violating > 100

    from sepsim.power import GateEvent
    options = [GateEvent(t, b, sw, act)
               for t in (0.0, 0.02, 0.06)
               for b in (1, 2, 3)
               for sw in ("high", "low")
               for act in ("on", "off")]
    for combo in itertools.product(options, repeat=3):
        if not (combo[0].time <= combo[1].time <= combo[2].time):
            continue
        sched = GateSchedule(tuple(combo))
        assert {v.kind for v in validate_schedule(sched, mux, dt).violations} \
            == brute_force_violations(sched, mux, dt)


@criterion(12, "energy contract")
def test_criterion_12_energy():
    coil = actuator.ROBOT_COIL
    for mode_name in ("stable", "enhanced"):
        mode = MODES[mode_name]
        state = LinearMotorState()
        bank0 = CapacitorBank()
        plan = step_sequence(FORWARD, 6)
        state, bank, results = run_plan(state, plan, mode, bank0, 0.03,
                                        surface=SURFACES["glass"])
        # reconstruct the drawn energy from the pulse train
        expected = 0.0
        v = bank0
        for r in results:
            window = r.duration if mode.waits_for_settle else mode.pulse_period
            v = recharge(v, window)
            expected += pulse_energy(v.voltage / coil.resistance, coil.resistance)
            v = dataclasses.replace(v, voltage=r.bank.voltage)
            if mode.continuous_current:
                expected += (mode.continuous_current**2 * coil.resistance
                             * r.duration)
        total = sum(r.energy for r in results)
        assert total == pytest.approx(expected, rel=1e-9)
    # holding costs nothing: no steps, no drawn energy, force still there
    from sepsim.world import Module, Trace, World
    w = World()
    w.add_module(Module("A", (0, 0)))
    w.add_module(Module("B", (0, -6)))
    w.connect("A", "B")
    assert Trace().total_energy == 0.0
    assert actuator.force_capability(LinearMotorState()) > 0
    assert MODES["stable"].continuous_current == 0.0


@criterion(13, "dipole force matches the energy gradient")
def test_criterion_13_dipole_force():
    rng = np.random.default_rng(13)
    for _ in range(100):
        p1 = rng.uniform(-2e-2, 2e-2, size=3)
        offset = rng.uniform(-3e-2, 3e-2, size=3)
        while np.linalg.norm(offset) < 5e-3:
            offset = rng.uniform(-3e-2, 3e-2, size=3)
        d1 = Dipole(rng.uniform(-5e-3, 5e-3, size=3), p1)
        d2 = Dipole(rng.uniform(-5e-3, 5e-3, size=3), p1 + offset)
        f = dipole_force(d1, d2)
        grad = np.zeros(3)
        eps = 1e-7
        for i in range(3):
            dp = np.zeros(3)
            dp[i] = eps
            up = Dipole(d2.moment, d2.position + dp)
            dn = Dipole(d2.moment, d2.position - dp)
            grad[i] = -(interaction_energy(d1, up)
                        - interaction_energy(d1, dn)) / (2 * eps)
        scale = max(np.linalg.norm(f), np.linalg.norm(grad))
        assert np.linalg.norm(f - grad) / scale < 1e-6


@criterion(14, "CLI sweeps byte-identical for a fixed seed")
def test_criterion_14_determinism(tmp_path):
    for command in ("sweep-pulse", "sweep-turns", "coverage", "speed-test",
                    "holding-force"):
        out_a = tmp_path / f"{command}-a"
        out_b = tmp_path / f"{command}-b"
        assert cli_main([command, "--out-dir", str(out_a), "--seed", "42"]) == 0
        assert cli_main([command, "--out-dir", str(out_b), "--seed", "42"]) == 0
        name = command.replace("-", "_")
        assert (out_a / f"{name}.csv").read_bytes() == \
            (out_b / f"{name}.csv").read_bytes()
