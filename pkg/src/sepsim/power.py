"""Pulse supply and gate scheduling for the multiplexed half-bridges.

Four half-bridges drive three coils: neighbors in the chain share a leg
(coil 1 on HB1/HB2, coil 2 on HB2/HB3, coil 3 on HB3/HB4), so the board
needs four legs instead of six. The price is a scheduling constraint:
coils sharing a leg must be pulsed one at a time, and every leg needs a
dead-time guard between its high and low switch conducting.

``GateSchedule`` serializes to a line-oriented text format, one event per
line::

    <t_seconds> HB<id> <high|low> <on|off>

``validate_schedule`` checks a schedule against both constraints and
returns structured violation reports rather than raising.
"""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path

from .errors import InsufficientVoltage, ScenarioError
from .magnetics.rod import PulseWaveform

GATE_FUNCTIONAL_MIN = 4.0  # below this bank voltage pulses are refused [V]
LEGACY_DEAD_TIME = 0.130  # fixed dead-time of the uncontrolled bridge [s]

N_HALF_BRIDGES = 4
N_COILS = 3


@dataclasses.dataclass(frozen=True)
class HalfBridge:
    """Conduction state of one leg; both switches on is shoot-through."""

    id: int
    high_on: bool = False
    low_on: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.id <= N_HALF_BRIDGES:
            raise ValueError(f"half-bridge id out of range: {self.id}")
        if self.high_on and self.low_on:
            raise ValueError(f"HB{self.id}: high and low on simultaneously")


@dataclasses.dataclass(frozen=True)
class MultiplexAssignment:
    """coil index (1-based) -> ordered pair of half-bridge ids."""

    coil_to_bridges: dict[int, tuple[int, int]]

    def __post_init__(self) -> None:
        if sorted(self.coil_to_bridges) != list(range(1, N_COILS + 1)):
            raise ValueError("expected coils 1..3")
        used = set()
        for coil, (a, b) in self.coil_to_bridges.items():
            if a == b:
                raise ValueError(f"coil {coil}: bridges must be distinct")
            used.update((a, b))
        if used != set(range(1, N_HALF_BRIDGES + 1)):
            raise ValueError("assignment must use exactly half-bridges 1..4")

    def sharing(self, coil_a: int, coil_b: int) -> set[int]:
        """Half-bridges two coils have in common."""
        return set(self.coil_to_bridges[coil_a]) & set(self.coil_to_bridges[coil_b])


def build_multiplex() -> MultiplexAssignment:
    """The chain assignment: coil k on half-bridges (k, k+1)."""
    return MultiplexAssignment({k: (k, k + 1) for k in range(1, N_COILS + 1)})


@dataclasses.dataclass(frozen=True)
class DeadTimeConfig:
    """Guard interval between opposite switches of one leg conducting."""

    dead_time: float
    switch_offsets: dict[str, float] = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dead_time < 0:
            raise ValueError(f"dead_time invalid: {self.dead_time}")


@dataclasses.dataclass(frozen=True)
class GateEvent:
    time: float
    bridge: int
    switch: str  # "high" | "low"
    action: str  # "on" | "off"

    def __post_init__(self) -> None:
        if self.switch not in ("high", "low"):
            raise ValueError(f"switch invalid: {self.switch}")
        if self.action not in ("on", "off"):
            raise ValueError(f"action invalid: {self.action}")
        if not 1 <= self.bridge <= N_HALF_BRIDGES:
            raise ValueError(f"bridge invalid: {self.bridge}")
        if not math.isfinite(self.time):
            raise ValueError(f"time invalid: {self.time}")


@dataclasses.dataclass(frozen=True)
class GateSchedule:
    """Timed switch commands, times nondecreasing."""

    events: tuple[GateEvent, ...] = ()

    def __post_init__(self) -> None:
        times = [e.time for e in self.events]
        if any(t1 < t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("event times must be nondecreasing")

    @property
    def horizon(self) -> float:
        return self.events[-1].time if self.events else 0.0

    def extended(self, more: list[GateEvent]) -> "GateSchedule":
        return GateSchedule(tuple(sorted(
            list(self.events) + more, key=lambda e: e.time)))

    def to_text(self) -> str:
        lines = [f"{e.time:.9g} HB{e.bridge} {e.switch} {e.action}"
                 for e in self.events]
        return "\n".join(lines) + ("\n" if lines else "")


def parse_schedule(text: str) -> GateSchedule:
    """Parse the line format; raises ScenarioError with line numbers."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or not parts[1].startswith("HB"):
            raise ScenarioError(
                f"line {lineno}: expected '<t> HB<id> <high|low> <on|off>', got {raw!r}")
        try:
            t = float(parts[0])
            bridge = int(parts[1][2:])
            event = GateEvent(time=t, bridge=bridge, switch=parts[2], action=parts[3])
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from exc
        events.append(event)
    events.sort(key=lambda e: e.time)
    return GateSchedule(tuple(events))


def load_schedule(path: str | Path) -> GateSchedule:
    return parse_schedule(Path(path).read_text())


@dataclasses.dataclass(frozen=True)
class Violation:
    kind: str  # "ShootThrough" | "MultiplexConflict"
    time: float
    detail: str


@dataclasses.dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]


def _conduction_intervals(sched: GateSchedule):
    """(bridge, switch) -> list of [t_on, t_off) conduction intervals.

    An ``on`` that is never turned off conducts forever.
    """
    intervals: dict[tuple[int, str], list[tuple[float, float]]] = {}
    pending: dict[tuple[int, str], float] = {}
    for e in sched.events:
        key = (e.bridge, e.switch)
        if e.action == "on":
            if key not in pending:
                pending[key] = e.time
        else:
            if key in pending:
                intervals.setdefault(key, []).append((pending.pop(key), e.time))
    for key, t_on in pending.items():
        intervals.setdefault(key, []).append((t_on, math.inf))
    return intervals


def _overlap_or_gap(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Signed separation of two intervals: negative means overlap."""
    if a[0] > b[0]:
        a, b = b, a
    return b[0] - min(a[1], b[1]) if b[0] >= a[1] else -1.0


def validate_schedule(sched: GateSchedule, mux: MultiplexAssignment,
                      dt: DeadTimeConfig) -> ValidationReport:
    """Check a command stream for shoot-through and multiplex conflicts.

    ShootThrough: one leg's high and low switches conduct simultaneously or
    within less than the dead time of each other.

    MultiplexConflict: two coils sharing a leg are electrically driven at
    the same time (each coil counts as driven while one of its legs
    conducts high and the other conducts low).
    """
    intervals = _conduction_intervals(sched)
    violations: list[Violation] = []

    for bridge in range(1, N_HALF_BRIDGES + 1):
        highs = intervals.get((bridge, "high"), [])
        lows = intervals.get((bridge, "low"), [])
        for hi in highs:
            for lo in lows:
                sep = _overlap_or_gap(hi, lo)
                if sep < dt.dead_time:
                    t = max(hi[0], lo[0])
                    what = "overlap" if sep < 0 else f"gap {sep:.6g} s < dead time"
                    violations.append(Violation(
                        "ShootThrough", t, f"HB{bridge} high/low {what}"))

    driven: dict[int, list[tuple[float, float, int]]] = {}
    for coil, (a, b) in mux.coil_to_bridges.items():
        for sw_a, sw_b, pol in (("high", "low", +1), ("low", "high", -1)):
            for ia in intervals.get((a, sw_a), []):
                for ib in intervals.get((b, sw_b), []):
                    t0, t1 = max(ia[0], ib[0]), min(ia[1], ib[1])
                    if t1 > t0:
                        driven.setdefault(coil, []).append((t0, t1, pol))
    for coil_a in range(1, N_COILS + 1):
        for coil_b in range(coil_a + 1, N_COILS + 1):
            shared = mux.sharing(coil_a, coil_b)
            if not shared:
                continue
            for ta0, ta1, _ in driven.get(coil_a, []):
                for tb0, tb1, _ in driven.get(coil_b, []):
                    t0, t1 = max(ta0, tb0), min(ta1, tb1)
                    if t1 > t0:
                        violations.append(Violation(
                            "MultiplexConflict", t0,
                            f"coils {coil_a} and {coil_b} driven together on "
                            f"HB{sorted(shared)[0]}"))

    violations.sort(key=lambda v: (v.time, v.kind))
    return ValidationReport(ok=not violations, violations=tuple(violations))


@dataclasses.dataclass(frozen=True)
class CapacitorBank:
    """First-order pulse supply: capacitor charged through a resistor."""

    capacitance: float = 2200e-6  # [F]
    voltage: float = 16.0  # current capacitor voltage [V]
    supply_voltage: float = 16.0  # [V]
    charge_resistance: float = 15.173100031606099  # 0 -> 95 % in 100 ms [ohm]

    def __post_init__(self) -> None:
        if self.capacitance <= 0 or self.charge_resistance <= 0:
            raise ValueError("capacitance and charge_resistance must be positive")
        if not 0 <= self.voltage <= self.supply_voltage * (1 + 1e-12):
            raise ValueError(f"voltage out of range: {self.voltage}")

    @property
    def time_constant(self) -> float:
        return self.capacitance * self.charge_resistance

    @property
    def energy(self) -> float:
        return 0.5 * self.capacitance * self.voltage**2


def recharge(bank: CapacitorBank, dt: float) -> CapacitorBank:
    """Exponential approach to the supply rail over ``dt`` seconds."""
    if dt < 0:
        raise ValueError(f"dt invalid: {dt}")
    v = bank.supply_voltage + (bank.voltage - bank.supply_voltage) * math.exp(
        -dt / bank.time_constant)
    return dataclasses.replace(bank, voltage=min(v, bank.supply_voltage))


def recharge_time(bank: CapacitorBank, target_voltage: float) -> float:
    """Time to recharge to a target voltage; 0 if already there."""
    if target_voltage <= bank.voltage:
        return 0.0
    if target_voltage >= bank.supply_voltage:
        return math.inf
    return bank.time_constant * math.log(
        (bank.supply_voltage - bank.voltage)
        / (bank.supply_voltage - target_voltage))


def discharge_pulse(bank: CapacitorBank, coil_resistance: float):
    """Fire one trapezoidal pulse into a coil.

    The flat-top amplitude is the instantaneous V/R; the energy drawn over
    the trapezoid (I^2 R integrated: hold + 2/3 of each edge) comes out of
    the capacitor. Returns (peak_current, waveform, new_bank).
    """
    if coil_resistance <= 0:
        raise ValueError(f"coil_resistance invalid: {coil_resistance}")
    peak = bank.voltage / coil_resistance
    wf = PulseWaveform(peak_current=peak)
    if peak == 0.0:
        return 0.0, wf, bank
    width_eff = wf.hold_time + 2.0 * wf.rise_time / 3.0
    energy = peak**2 * coil_resistance * width_eff
    v_sq = max(bank.voltage**2 - 2.0 * energy / bank.capacitance, 0.0)
    return peak, wf, dataclasses.replace(bank, voltage=math.sqrt(v_sq))


def pulse_energy(peak_current: float, coil_resistance: float,
                 wf: PulseWaveform | None = None) -> float:
    """Resistive energy of one trapezoidal pulse [J]."""
    wf = wf or PulseWaveform(peak_current=abs(peak_current))
    width_eff = wf.hold_time + 2.0 * wf.rise_time / 3.0
    return peak_current**2 * coil_resistance * width_eff


def max_pulse_frequency(dead_time: float, pulse_width: float) -> float:
    """Highest pulse repetition rate with guard intervals both sides [Hz]."""
    return 1.0 / (pulse_width + 2.0 * dead_time)


def synth_pulse(coil: int, polarity: int, mux: MultiplexAssignment,
                dt: DeadTimeConfig, bank: CapacitorBank,
                pulse_width: float = 4.2e-4,
                schedule: GateSchedule | None = None) -> GateSchedule:
    """Append one coil pulse to a schedule, serialized on the timeline.

    The pulse conducts leg A high / leg B low for ``polarity`` +1 and the
    mirror for -1, with a dead-time guard before and after. Pulses are
    serialized after all prior activity: with shared legs, even coils that
    share no bridge can phantom-drive the one between them, so one pulse
    at a time is the safe policy on a single actuator timeline.

    Raises InsufficientVoltage when the bank cannot drive the gates.
    """
    if polarity not in (+1, -1):
        raise ValueError(f"polarity invalid: {polarity}")
    if coil not in mux.coil_to_bridges:
        raise ValueError(f"coil invalid: {coil}")
    if bank.voltage < GATE_FUNCTIONAL_MIN:
        raise InsufficientVoltage(
            f"bank at {bank.voltage:.2f} V, need >= {GATE_FUNCTIONAL_MIN} V")
    schedule = schedule or GateSchedule()
    a, b = mux.coil_to_bridges[coil]
    if polarity < 0:
        a, b = b, a

    t_free = 0.0
    for e in schedule.events:
        t_free = max(t_free, e.time + dt.dead_time)
    t_on = max(t_free, dt.dead_time)
    t_off = t_on + pulse_width
    return schedule.extended([
        GateEvent(t_on, a, "high", "on"),
        GateEvent(t_on, b, "low", "on"),
        GateEvent(t_off, a, "high", "off"),
        GateEvent(t_off, b, "low", "off"),
    ])
