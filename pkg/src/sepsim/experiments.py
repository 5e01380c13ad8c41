"""Scripted studies and the calibration of every fitted constant.

Each sweep is deterministic for a fixed configuration and returns plain
column data; ``write_sweep`` serializes it as CSV plus a sidecar metadata
file recording the preset, seed, and calibration constants so any output
can be reproduced byte-for-byte.

``calibrate`` fits the free constants of the whole model to its anchor
set and reports residuals per anchor:

loop
    Hysteresis shape constants (a, k, c, alpha) per preset, least-squares
    on major-loop coercivity and remanence plus two remanence-after-peak
    shape points.
recharge
    Charge resistance so an empty bank reaches 95 % of the rail in 100 ms.
holding
    Effective contact gap so one full-voltage pulse holds 75 mN.
speeds
    Per-surface settle times from the fast-mode speed row, plus the
    surface-independent enhanced-mode settle.
"""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from . import actuator
from .actuator import (MODES, SURFACES, DriveMode, Surface, predict_speed)
from .constants import MU0, PIN_BR, PIN_LENGTH, PIN_RADIUS, ROD_LENGTH, ROD_RADIUS
from .errors import CalibrationMissing, FitDiverged
from .magnetics import (Coil, MaterialParams, PRESETS, PulseWaveform, RodState,
                        SolverConfig, apply_pulse, centered, cylinder_moment,
                        demagnetized_rod, drive_sequence, field_profile,
                        flux_metrics, JaState, load_material, rod_moment,
                        solenoid_h_field)
from .magnetics.hysteresis import run_currents
from .power import CapacitorBank, GATE_FUNCTIONAL_MIN, discharge_pulse, recharge
from .world import CONTACT_GAP, PIN_MOMENT, holding_force

# Bench geometry for the magnetization studies (rod and winding of the
# simulation setup; the exact-wrap coil matches the rod length).
BENCH_ROD_RADIUS = 1.5e-3
BENCH_ROD_LENGTH = 8.0e-3
BENCH_TURNS = 250
BENCH_WIRE = 0.2e-3

DEFAULT_SEED = 20230817


def bench_coil(turns: int = BENCH_TURNS, length: float = BENCH_ROD_LENGTH) -> Coil:
    return centered(turns, length, BENCH_ROD_RADIUS, BENCH_WIRE)


def bench_rod(preset: str = "table1", segments: int = 17) -> RodState:
    return demagnetized_rod(load_material(preset), BENCH_ROD_RADIUS,
                            BENCH_ROD_LENGTH, segments)


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """A 1-D parameter sweep request."""

    parameter: str
    minimum: float
    maximum: float
    steps: int
    preset: str = "table1"

    def __post_init__(self) -> None:
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        if not self.minimum < self.maximum:
            raise ValueError("minimum must be below maximum")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.steps)


def sweep_pulse_peak(spec: SweepSpec | None = None,
                     cfg: SolverConfig | None = None):
    """Remanent flux after one pulse vs pulse peak (fresh rod each point).

    Columns: peak_a, b_center_t, b_average_t.
    """
    spec = spec or SweepSpec("peak_current", 0.0, 30.0, 31)
    cfg = cfg or SolverConfig()
    coil = bench_coil()
    rod0 = bench_rod(spec.preset)
    rows = []
    for peak in spec.values:
        rod = apply_pulse(rod0, coil, PulseWaveform(float(peak)), cfg) \
            if peak > 0 else rod0
        fm = flux_metrics(rod)
        rows.append((float(peak), fm["b_center"], fm["b_average"]))
    return ["peak_a", "b_center_t", "b_average_t"], rows


def sweep_turns(spec: SweepSpec | None = None,
                cfg: SolverConfig | None = None, current: float = 20.0):
    """Flux vs turn count at fixed pulse current, exact-wrap winding.

    The applied center field during the pulse is exactly linear in the
    turn count; the remanent flux saturates once the field clears the
    full-magnetization threshold. Columns: turns, h_center_a_per_m,
    b_center_peak_t, b_average_peak_t, b_center_rem_t, b_average_rem_t.
    """
    spec = spec or SweepSpec("turns", 0.0, 500.0, 26)
    cfg = cfg or SolverConfig()
    rod0 = bench_rod(spec.preset)
    rows = []
    for turns_f in spec.values:
        turns = int(round(turns_f))
        coil = bench_coil(turns=turns)
        h_center = solenoid_h_field(coil, current, 0.0)
        if turns == 0:
            fm_peak = flux_metrics(rod0)
            fm_rem = fm_peak
        else:
            profile = field_profile(coil, rod0.segment_centers)
            # flux at the flat top: drive the rise only
            rise = np.linspace(0.0, current, 64)[1:]
            m, mirr, cur = run_currents(rod0.material, rod0.m, rod0.m_irr,
                                        0.0, rise, profile,
                                        cfg.dh_max(rod0.material))
            fm_peak = flux_metrics(rod0.with_state(m, mirr, cur),
                                   h_applied=profile * current)
            fm_rem = flux_metrics(apply_pulse(rod0, coil,
                                              PulseWaveform(current), cfg))
        rows.append((turns, float(h_center), fm_peak["b_center"],
                     fm_peak["b_average"], fm_rem["b_center"],
                     fm_rem["b_average"]))
    return ["turns", "h_center_a_per_m", "b_center_peak_t",
            "b_average_peak_t", "b_center_rem_t", "b_average_rem_t"], rows


COVERAGE_CONFIGS = {
    # winding length for a 8 mm rod: tight half wrap, exact wrap, and a
    # 10 mm loose wrap
    "half": 4.0e-3,
    "exact": 8.0e-3,
    "extra": 10.0e-3,
}


def coverage_study(cfg: SolverConfig | None = None, current: float = 20.0,
                   preset: str = "table1"):
    """Per-segment remanent profiles for the three wrap configurations.

    Columns: config, coil_length_m, segment, z_m, h_peak_a_per_m,
    m_rem_a_per_m, m_over_ms.
    """
    cfg = cfg or SolverConfig()
    rod0 = bench_rod(preset)
    ms = rod0.material.ms
    rows = []
    for name, length in COVERAGE_CONFIGS.items():
        coil = bench_coil(length=length)
        profile = field_profile(coil, rod0.segment_centers)
        rod = apply_pulse(rod0, coil, PulseWaveform(current), cfg)
        for i, z in enumerate(rod.segment_centers):
            rows.append((name, length, i, float(z),
                         float(profile[i] * current), float(rod.m[i]),
                         float(rod.m[i] / ms)))
    return ["config", "coil_length_m", "segment", "z_m", "h_peak_a_per_m",
            "m_rem_a_per_m", "m_over_ms"], rows


@dataclasses.dataclass(frozen=True)
class SpeedCalibration:
    """Settle times behind the speed model."""

    settle_times: dict[str, float]
    settle_enhanced: float

    def surfaces(self) -> dict[str, Surface]:
        return {name: dataclasses.replace(SURFACES[name],
                                          settle_time=self.settle_times[name])
                for name in self.settle_times}


DEFAULT_SPEED_CALIBRATION = SpeedCalibration(
    settle_times={name: s.settle_time for name, s in SURFACES.items()},
    settle_enhanced=actuator.SETTLE_ENHANCED,
)


def speed_table(calibration: SpeedCalibration | None = DEFAULT_SPEED_CALIBRATION):
    """Mode x surface speed table in mm/s.

    Columns: mode, glass, paper, wood, cement. Raises CalibrationMissing
    when no calibration is supplied.
    """
    if calibration is None or not calibration.settle_times:
        raise CalibrationMissing(
            "speed_table needs a SpeedCalibration; run calibrate() or pass "
            "DEFAULT_SPEED_CALIBRATION")
    surfaces = calibration.surfaces()
    modes = {}
    for name, mode in MODES.items():
        if mode.settle_override is not None:
            mode = dataclasses.replace(
                mode, settle_override=calibration.settle_enhanced)
        modes[name] = mode
    rows = []
    for mode_name in ("fastest", "stable", "enhanced"):
        row = [mode_name]
        for surf_name in ("glass", "paper", "wood", "cement"):
            row.append(round(predict_speed(modes[mode_name],
                                           surfaces[surf_name]), 3))
        rows.append(tuple(row))
    return ["mode", "glass", "paper", "wood", "cement"], rows


def holding_force_grid(voltages=None, pulse_counts=None,
                       gap: float = CONTACT_GAP,
                       cfg: SolverConfig | None = None):
    """Holding force in mN over supply voltage x pulse count.

    Each cell starts from a demagnetized rod; pulses below the
    gate-functional minimum are refused and leave the rod blank. The bank
    fully recharges between pulses (the holding test is slow).
    Columns: voltage_v, pulses, holding_mn.
    """
    voltages = voltages if voltages is not None else [2.0, 3.0, 4.0, 6.0, 8.0,
                                                      10.0, 12.0, 14.0, 16.0]
    pulse_counts = pulse_counts if pulse_counts is not None else [1, 2, 3, 4, 5]
    cfg = cfg or SolverConfig()
    coil = actuator.ROBOT_COIL
    rod0 = demagnetized_rod(PRESETS["datasheet"], ROD_RADIUS, ROD_LENGTH)
    rows = []
    for v in voltages:
        rod = rod0
        functional = v >= GATE_FUNCTIONAL_MIN
        count_done = 0
        for n in sorted(pulse_counts):
            if functional:
                for _ in range(n - count_done):
                    bank = CapacitorBank(voltage=v, supply_voltage=max(v, 16.0))
                    peak, wf, _ = discharge_pulse(bank, coil.resistance)
                    rod = apply_pulse(rod, coil, wf, cfg)
                count_done = n
                force = holding_force(rod, gap=gap)
            else:
                force = 0.0
            rows.append((float(v), n, force))
    return ["voltage_v", "pulses", "holding_mn"], rows


def hysteresis_trace(preset: str = "table1", h_max: float | None = None,
                     points: int = 400):
    """One major loop from the virgin state. Columns: h_a_per_m, m_a_per_m, b_t."""
    mat = load_material(preset)
    h_max = h_max if h_max is not None else 6.0 * mat.hc
    seq = np.concatenate([
        np.linspace(0.0, h_max, points)[1:],
        np.linspace(h_max, -h_max, 2 * points)[1:],
        np.linspace(-h_max, h_max, 2 * points)[1:],
    ])
    state = JaState()
    rows = []
    for h in seq:
        state = drive_sequence(mat, state, [float(h)])
        rows.append((float(h), state.m, MU0 * (h + state.m)))
    return ["h_a_per_m", "m_a_per_m", "b_t"], rows


# --- calibration -----------------------------------------------------------

ANCHORS = ("loop", "recharge", "holding", "speeds")

# Measured speed row the fast mode is anchored to, nudged 0.1 mm/s toward
# the row center so the cross-surface spread stays inside 2 mm/s.
FAST_ROW_TARGETS = {"glass": 19.9, "paper": 19.9, "wood": 18.1, "cement": 18.1}
ENHANCED_SPEED = 9.0  # mm/s, identical on every surface

LOOP_TARGETS = {
    # preset -> (psi probes): remanence after a virgin excursion to H as a
    # fraction of major-loop remanence; the pair shapes the onset so a
    # partially covered rod keeps unmagnetized ends while a covered one
    # saturates (probes at 2.7 Hc and 7.4 Hc).
    "table1": ((128.5e3, 0.45), (355e3, 0.95)),
    # square catalog loop: full remanence by 4 Hc per the 3-5 Hc rule
    "datasheet": ((192e3, 0.96),),
}


@dataclasses.dataclass(frozen=True)
class CalibrationReport:
    fitted: dict
    residuals: dict
    unfitted: tuple[str, ...]
    seed: int

    def max_residual(self) -> float:
        vals = [abs(v) for v in self.residuals.values()]
        return max(vals) if vals else 0.0


def loop_metrics(mat: MaterialParams, h_max: float, points: int = 1500):
    """(coercivity, remanence) from the descending branch of a major loop."""
    state = JaState()
    state = drive_sequence(mat, state, np.linspace(0.0, h_max, points + 1)[1:])
    h_desc = np.linspace(h_max, -h_max, 2 * points + 1)[1:]
    m_desc = np.empty_like(h_desc)
    for i, h in enumerate(h_desc):
        state = drive_sequence(mat, state, [float(h)])
        m_desc[i] = state.m
    mr = float(np.interp(0.0, -h_desc, m_desc))
    crossings = np.where(np.diff(np.sign(m_desc)) != 0)[0]
    if len(crossings) == 0:
        return math.nan, mr
    i = crossings[0]
    h0, h1 = h_desc[i], h_desc[i + 1]
    m0, m1 = m_desc[i], m_desc[i + 1]
    hc = abs(h0 - m0 * (h1 - h0) / (m1 - m0))
    return hc, mr


def remanence_after_peak(mat: MaterialParams, h_peak: float,
                         points: int = 1000) -> float:
    """Remanent M after a virgin excursion to ``h_peak`` and back to zero."""
    state = JaState()
    state = drive_sequence(mat, state, np.linspace(0.0, h_peak, points + 1)[1:])
    state = drive_sequence(mat, state, np.linspace(h_peak, 0.0, points + 1)[1:])
    return state.m


def fit_loop_shape(preset: str, h_max: float = 6e5) -> tuple[MaterialParams, dict]:
    """Least-squares fit of (a, k, c, alpha) for one preset.

    Deterministic: starts from the shipped constants and converges back to
    them (idempotent within the solver tolerance).
    """
    base = PRESETS[preset]
    mr_target = base.mr
    psi_targets = LOOP_TARGETS[preset]

    def unpack(x):
        a, k = math.exp(x[0]), math.exp(x[1])
        c = 1.0 / (1.0 + math.exp(-x[2]))
        alpha = math.exp(x[3])
        return base.replace(a=a, k=k, c=c, alpha=alpha)

    def residuals(x):
        try:
            mat = unpack(x)
        except (ValueError, OverflowError):
            return np.full(2 + len(psi_targets), 10.0)
        if mat.alpha * mat.ms / (3.0 * mat.a) >= 0.98:
            return np.full(2 + len(psi_targets), 10.0)
        hc, mr = loop_metrics(mat, h_max)
        if not math.isfinite(hc) or mr <= 0:
            return np.full(2 + len(psi_targets), 10.0)
        out = [hc / base.hc - 1.0, mr / mr_target - 1.0]
        for h_probe, frac in psi_targets:
            psi = remanence_after_peak(mat, h_probe) / mr
            out.append((psi - frac) * 0.5)
        return np.array(out)

    x0 = np.array([math.log(base.a), math.log(base.k),
                   math.log(base.c / (1.0 - base.c)), math.log(base.alpha)])
    sol = least_squares(residuals, x0, diff_step=0.02, xtol=1e-10, ftol=1e-12)
    if not sol.success or np.max(np.abs(sol.fun[:2])) > 0.02:
        raise FitDiverged(
            f"loop fit for {preset!r}: status={sol.status}, "
            f"residuals={sol.fun.tolist()}")
    fitted = unpack(sol.x)
    res = {f"{preset}_hc": float(sol.fun[0]), f"{preset}_mr": float(sol.fun[1])}
    for (h_probe, frac), r in zip(psi_targets, sol.fun[2:]):
        res[f"{preset}_psi_{h_probe:.0f}"] = float(r) * 2.0
    return fitted, res


def fit_recharge(capacitance: float = 2200e-6, target_time: float = 0.100,
                 target_fraction: float = 0.95) -> float:
    """Charge resistance so 0 -> target_fraction takes target_time."""
    return target_time / (capacitance * (-math.log(1.0 - target_fraction)))


def fit_contact_gap(voltage: float = 16.0, target_mn: float = 75.0,
                    cfg: SolverConfig | None = None) -> tuple[float, float]:
    """Contact gap so one full-voltage pulse holds ``target_mn``.

    Returns (gap, achieved_mn_at_that_gap). Closed form: holding scales as
    gap^-4, so one simulated pulse pins the scale.
    """
    cfg = cfg or SolverConfig()
    coil = actuator.ROBOT_COIL
    rod = demagnetized_rod(PRESETS["datasheet"], ROD_RADIUS, ROD_LENGTH)
    bank = CapacitorBank(voltage=voltage)
    peak, wf, _ = discharge_pulse(bank, coil.resistance)
    pulsed = apply_pulse(rod, coil, wf, cfg)
    m_rod = abs(rod_moment(pulsed))
    gap4 = 3.0 * MU0 * m_rod * PIN_MOMENT / (2.0 * math.pi * target_mn * 1e-3)
    gap = gap4**0.25
    return gap, holding_force(pulsed, gap=gap)


def fit_speed_settles() -> SpeedCalibration:
    """Settle times from the fast-row anchors plus the enhanced constant."""
    wf_width = 4.2e-4
    mech_fast = 2.0 * MODES["fastest"].dead_time + wf_width
    mech_stable = 2.0 * MODES["stable"].dead_time + wf_width
    step = MODES["stable"].step_distance
    settles = {name: step / (v * 1e-3) - mech_fast
               for name, v in FAST_ROW_TARGETS.items()}
    settle_enh = step / (ENHANCED_SPEED * 1e-3) - mech_stable
    return SpeedCalibration(settle_times=settles, settle_enhanced=settle_enh)


def calibrate(anchors=ANCHORS, seed: int = DEFAULT_SEED) -> CalibrationReport:
    """Fit the requested anchors; everything else stays at defaults.

    Raises ValueError on an empty anchor set and FitDiverged when a fit
    cannot reach its targets.
    """
    anchors = tuple(anchors)
    if not anchors:
        raise ValueError("anchor set is empty; nothing to calibrate")
    unknown = [a for a in anchors if a not in ANCHORS]
    if unknown:
        raise ValueError(f"unknown anchors: {unknown}; known: {ANCHORS}")
    fitted: dict = {}
    residuals: dict = {}
    if "loop" in anchors:
        for preset in ("table1", "datasheet"):
            mat, res = fit_loop_shape(preset)
            fitted[f"material_{preset}"] = {
                "a": mat.a, "k": mat.k, "c": mat.c, "alpha": mat.alpha}
            residuals.update(res)
    if "recharge" in anchors:
        r = fit_recharge()
        fitted["charge_resistance"] = r
        bank = CapacitorBank(voltage=0.0, charge_resistance=r)
        reached = recharge(bank, 0.100).voltage / bank.supply_voltage
        residuals["recharge_95pct_100ms"] = reached - 0.95
    if "holding" in anchors:
        gap, achieved = fit_contact_gap()
        fitted["contact_gap"] = gap
        residuals["holding_75mn"] = achieved / 75.0 - 1.0
    if "speeds" in anchors:
        cal = fit_speed_settles()
        fitted["settle_times"] = dict(cal.settle_times)
        fitted["settle_enhanced"] = cal.settle_enhanced
        _, rows = speed_table(cal)
        table2 = {"fastest": (20.0, 20.0, 18.0, 18.0),
                  "stable": (13.0, 13.0, 12.0, 12.0),
                  "enhanced": (9.0, 9.0, 9.0, 9.0)}
        worst = 0.0
        for row in rows:
            mode = row[0]
            for got, want in zip(row[1:], table2[mode]):
                worst = max(worst, abs(got - want))
        residuals["speed_worst_cell_mm_s"] = worst
        if worst > 2.0:
            raise FitDiverged(f"speed calibration worst cell {worst} mm/s")
    unfitted = tuple(a for a in ANCHORS if a not in anchors)
    return CalibrationReport(fitted=fitted, residuals=residuals,
                             unfitted=unfitted, seed=seed)


def report_to_text(report: CalibrationReport) -> str:
    lines = [f"seed {report.seed}"]
    for key, val in sorted(report.fitted.items()):
        lines.append(f"fitted {key} {val}")
    for key, val in sorted(report.residuals.items()):
        lines.append(f"residual {key} {val:.6g}")
    for name in report.unfitted:
        lines.append(f"unfitted {name} (defaults kept)")
    return "\n".join(lines) + "\n"


# --- CSV output ------------------------------------------------------------

def write_sweep(out_dir: str | Path, name: str, header: list[str], rows,
                meta: dict | None = None) -> Path:
    """Write ``name.csv`` and ``name.meta.txt``; returns the CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    csv_path.write_text("\n".join(lines) + "\n")
    meta = dict(meta or {})
    meta.setdefault("rows", len(rows))
    meta_lines = [f"{k} = {meta[k]}" for k in sorted(meta)]
    (out / f"{name}.meta.txt").write_text("\n".join(meta_lines) + "\n")
    return csv_path


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)
