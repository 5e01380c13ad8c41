"""The 3-rod / 2-pin linear motor: commutation, forces, and step timing.

Three switchable rods at a 5 mm pitch face two fixed pins 5 mm apart on
the sliding module. Toggling one rod polarity per step in the order
3-1-2-3-1-2 walks the slider forward 2.5 mm per step (1-3-2-1-3-2 walks it
back); six steps cover one module side. Stepping is quasi-static: the
slider settles before the next toggle, so each step is modeled as an exact
2.5 mm displacement gated by a force-capability check, and step timing is
what sets the module speed.

The force model is the full 6-pair dipole sum evaluated at an effective
normal gap between the rod and pin dipole planes. For capability checks
the slider offset is folded into one 15 mm pattern period (equivalent to
stepping along a repeating rod lattice), which keeps long strokes engaged.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .constants import (GRAVITY, MODULE_MASS, MU0, PIN_BR, PIN_LENGTH,
                        PIN_RADIUS, ROD_LENGTH, ROD_RADIUS, SEP_PITCH,
                        SLIDER_SPACING, STEP_DISTANCE)
from .errors import StallError
from .magnetics import (Coil, PRESET_DATASHEET, centered, cylinder_moment,
                        dipole_force, Dipole, field_profile)
from .power import (CapacitorBank, GATE_FUNCTIONAL_MIN, discharge_pulse,
                    pulse_energy, recharge, recharge_time)

FORWARD = +1
REVERSE = -1

# Toggle orders for one full 6-step travel (one module side).
FORWARD_ORDER = (3, 1, 2)
REVERSE_ORDER = (1, 3, 2)

# Canonical rod polarity pattern a motor starts from; the forward order
# cycles it through all six mixed patterns and back.
CANONICAL_POLARITIES = (+1, -1, -1)

SATURATION_FIELD_FACTOR = 3.0  # full magnetization needs >= 3 Hc at the rod

# Effective dipole-plane gap: 1 mm mechanical clearance between the two
# surface levels plus the pin half-length and the rod pole offset. A fitted
# stepping-geometry constant, not a measured distance.
DEFAULT_GAP = 2.2e-3

ROBOT_COIL: Coil = centered(250, 10.0e-3, 1.5e-3, 0.2e-3)

SEP_MOMENT = PRESET_DATASHEET.mr * math.pi * ROD_RADIUS**2 * ROD_LENGTH
PIN_MOMENT = cylinder_moment(PIN_RADIUS, PIN_LENGTH, PIN_BR)


@dataclasses.dataclass(frozen=True)
class DriveMode:
    """Operating mode: pulse cadence, dead time, continuous bias current.

    ``waits_for_settle`` distinguishes the smooth modes (next pulse only
    after the slider has settled, so the bank recharges fully) from the
    fast mode, which fires on the pulse cadence and outruns the mechanics.
    ``settle_override`` replaces the per-surface settle time when set; the
    enhanced mode uses it because the bias current dominates its stepping
    time regardless of surface.
    """

    name: str
    pulse_frequency: float  # [Hz]
    dead_time: float  # [s]
    continuous_current: float  # [A]
    step_distance: float = STEP_DISTANCE
    waits_for_settle: bool = True
    settle_override: float | None = None

    @property
    def pulse_period(self) -> float:
        return 1.0 / self.pulse_frequency


# Enhanced-mode settle constant comes from the speed calibration.
SETTLE_ENHANCED = 0.19735777777777778  # [s]

MODE_STABLE = DriveMode("stable", pulse_frequency=20.0, dead_time=40e-3,
                        continuous_current=0.0)
MODE_ENHANCED = DriveMode("enhanced", pulse_frequency=20.0, dead_time=40e-3,
                          continuous_current=0.8,
                          settle_override=SETTLE_ENHANCED)
MODE_FASTEST = DriveMode("fastest", pulse_frequency=200.0, dead_time=10e-6,
                         continuous_current=0.0, waits_for_settle=False)

MODES = {m.name: m for m in (MODE_STABLE, MODE_ENHANCED, MODE_FASTEST)}


@dataclasses.dataclass(frozen=True)
class Surface:
    """Floor material under the modules."""

    name: str
    friction_coeff: float
    settle_time: float  # mechanical settle per step [s], calibrated

    def __post_init__(self) -> None:
        if self.friction_coeff <= 0:
            raise ValueError(f"friction_coeff invalid: {self.friction_coeff}")

    def friction_force(self, mass: float) -> float:
        return self.friction_coeff * mass * GRAVITY


# Settle times calibrated against the measured mode/surface speed table;
# friction coefficients are fitted constants, not measurements.
SURFACES = {
    "glass": Surface("glass", 0.25, 0.12518814070351757),
    "paper": Surface("paper", 0.30, 0.12518814070351757),
    "wood": Surface("wood", 0.35, 0.13768154696132596),
    "cement": Surface("cement", 0.40, 0.13768154696132596),
}


@dataclasses.dataclass(frozen=True)
class PlanStep:
    """One commutation entry: which rod toggles, to what, moving where."""

    sep_index: int  # 1-based
    new_polarity: int
    displacement_steps: int  # +1 forward, -1 reverse

    def __post_init__(self) -> None:
        if self.sep_index not in (1, 2, 3):
            raise ValueError(f"sep_index invalid: {self.sep_index}")
        if self.new_polarity not in (+1, -1):
            raise ValueError(f"new_polarity invalid: {self.new_polarity}")
        if self.displacement_steps not in (+1, -1):
            raise ValueError(f"displacement invalid: {self.displacement_steps}")


@dataclasses.dataclass(frozen=True)
class StepPlan:
    direction: int
    entries: tuple[PlanStep, ...]

    @property
    def toggle_order(self) -> tuple[int, ...]:
        return tuple(e.sep_index for e in self.entries)


def step_sequence(direction: int, n_steps: int,
                  initial_polarities: tuple[int, int, int] = CANONICAL_POLARITIES,
                  ) -> StepPlan:
    """Commutation plan: forward cycles rods 3,1,2,...; reverse 1,3,2,...

    Exactly one rod toggles per entry; polarities are resolved against the
    given starting pattern (demagnetized rods magnetize to +1 first).
    """
    if direction not in (FORWARD, REVERSE):
        raise ValueError(f"direction invalid: {direction}")
    if n_steps < 0:
        raise ValueError(f"n_steps invalid: {n_steps}")
    order = FORWARD_ORDER if direction == FORWARD else REVERSE_ORDER
    pol = list(initial_polarities)
    entries = []
    for i in range(n_steps):
        sep = order[i % 3]
        new = -pol[sep - 1] if pol[sep - 1] != 0 else +1
        pol[sep - 1] = new
        entries.append(PlanStep(sep_index=sep, new_polarity=new,
                                displacement_steps=direction))
    return StepPlan(direction=direction, entries=tuple(entries))


@dataclasses.dataclass(frozen=True)
class LinearMotorState:
    """Polarity pattern plus slider position, in exact step counts.

    The slider coordinate is ``slider_origin + slider_steps * step pitch``
    (the position of the leading pin); keeping the step count integral
    makes round trips restore the state exactly.
    """

    polarities: tuple[int, int, int] = CANONICAL_POLARITIES
    slider_steps: int = 0
    slider_origin: float = 0.0
    sep_positions: tuple[float, float, float] = (0.0, SEP_PITCH, 2 * SEP_PITCH)
    slider_spacing: float = SLIDER_SPACING
    gap: float = DEFAULT_GAP
    sep_moment: float = SEP_MOMENT
    slider_moment: float = PIN_MOMENT

    def __post_init__(self) -> None:
        if any(p not in (-1, 0, +1) for p in self.polarities):
            raise ValueError(f"polarities invalid: {self.polarities}")
        if self.gap <= 0:
            raise ValueError(f"gap invalid: {self.gap}")

    @property
    def slider_pos(self) -> float:
        """Position of the leading pin [m]."""
        return self.slider_origin + self.slider_steps * STEP_DISTANCE

    def toggled(self, entry: PlanStep) -> "LinearMotorState":
        pol = list(self.polarities)
        pol[entry.sep_index - 1] = entry.new_polarity
        return dataclasses.replace(
            self, polarities=tuple(pol),
            slider_steps=self.slider_steps + entry.displacement_steps)


def _pair_axial_force(dx, g, m1, m2):
    """Axial force on the pin for moments normal to the motion axis [N]."""
    r2 = dx * dx + g * g
    return 3.0 * MU0 * m1 * m2 / (4.0 * math.pi * r2**2.5) * dx * (1.0 - 5.0 * g * g / r2)


def motor_force(state: LinearMotorState, extra_moment: float = 0.0,
                slider_pos: float | None = None) -> float:
    """Axial force on the slider from all six rod/pin dipole pairs [N].

    ``extra_moment`` adds a bias moment (signed with each rod's polarity),
    used by the enhanced mode's continuous coil current.
    """
    q = state.slider_pos if slider_pos is None else slider_pos
    total = 0.0
    for pol, xs in zip(state.polarities, state.sep_positions):
        if pol == 0:
            continue
        m_rod = pol * (state.sep_moment + extra_moment)
        for j in (0, 1):
            xn = q + j * state.slider_spacing
            f = dipole_force(
                Dipole(np.array([0.0, m_rod, 0.0]), np.array([xs, 0.0, 0.0])),
                Dipole(np.array([0.0, state.slider_moment, 0.0]),
                       np.array([xn, state.gap, 0.0])),
            )
            total += float(f[0])
    return total


def force_capability(state: LinearMotorState, extra_moment: float = 0.0,
                     samples: int = 121) -> float:
    """Peak |axial force| over one engaged pattern period [N].

    The commutation transient sweeps the slider through the period, so the
    usable drive force is the profile's peak, evaluated with the offset
    folded into the unit cell (long strokes stay engaged as on a repeating
    rod lattice).
    """
    array_center = sum(state.sep_positions) / len(state.sep_positions)
    period = len(state.sep_positions) * SEP_PITCH
    u = np.linspace(-period / 2.0, period / 2.0, samples)
    q = array_center + u - state.slider_spacing / 2.0
    total = np.zeros_like(q)
    for pol, xs in zip(state.polarities, state.sep_positions):
        if pol == 0:
            continue
        m_rod = pol * (state.sep_moment + extra_moment)
        for j in (0, 1):
            dx = q + j * state.slider_spacing - xs
            total += _pair_axial_force(dx, state.gap, m_rod, state.slider_moment)
    return float(np.max(np.abs(total)))


def equilibrium_force(state: LinearMotorState) -> float:
    """Force at the current slider position (zero at equilibria)."""
    return motor_force(state)


@dataclasses.dataclass(frozen=True)
class StepResult:
    """Outcome of one executed commutation step."""

    duration: float  # [s]
    reliable: bool
    energy: float  # electrical energy drawn [J]
    peak_current: float  # [A]
    peak_force: float  # drive capability used for the stall check [N]
    bank: CapacitorBank
    sep_index: int
    new_polarity: int
    slider_pos: float  # [m]


def pulse_field_reliable(coil: Coil, peak_current: float,
                         hc: float = PRESET_DATASHEET.hc,
                         rod_length: float = ROD_LENGTH,
                         segment_count: int = 17) -> bool:
    """True when the pulse field reaches 3 Hc at every rod segment."""
    edges = np.linspace(-rod_length / 2.0, rod_length / 2.0, segment_count + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    profile = field_profile(coil, centers)
    return bool(np.min(np.abs(profile)) * abs(peak_current)
                >= SATURATION_FIELD_FACTOR * hc)


def execute_step(state: LinearMotorState, entry: PlanStep, mode: DriveMode,
                 bank: CapacitorBank, friction_force: float,
                 surface: Surface | None = None,
                 coil: Coil = ROBOT_COIL) -> tuple[LinearMotorState, StepResult]:
    """Execute one commutation step.

    Timing: the bank recharges for the mode's pulse period (smooth modes
    wait out the full mechanical step instead), the pulse fires, and the
    step completes after dead-time guards plus the pulse plus the settle
    time. Raises StallError when the post-toggle force capability cannot
    beat the friction demand.
    """
    if state.polarities[entry.sep_index - 1] == entry.new_polarity:
        raise ValueError(
            f"rod {entry.sep_index} already at polarity {entry.new_polarity}")
    surface = surface or SURFACES["glass"]
    settle = mode.settle_override if mode.settle_override is not None \
        else surface.settle_time
    wf_width = 4.2e-4  # trapezoid rise + hold + fall
    mech_time = 2.0 * mode.dead_time + wf_width + settle
    duration = max(mode.pulse_period, mech_time)

    window = duration if mode.waits_for_settle else mode.pulse_period
    wait_functional = recharge_time(bank, GATE_FUNCTIONAL_MIN)
    window = max(window, wait_functional)
    duration = max(duration, window)
    bank = recharge(bank, window)

    peak, wf, bank = discharge_pulse(bank, coil.resistance)
    reliable = pulse_field_reliable(coil, peak)

    new_state = state.toggled(entry)
    boost = _bias_moment(coil, mode.continuous_current)
    capability = force_capability(new_state, extra_moment=boost)
    if capability <= friction_force:
        raise StallError(
            f"capability {capability * 1e3:.1f} mN <= friction "
            f"{friction_force * 1e3:.1f} mN")

    energy = pulse_energy(peak, coil.resistance, wf)
    if mode.continuous_current:
        energy += mode.continuous_current**2 * coil.resistance * duration
    result = StepResult(duration=duration, reliable=reliable, energy=energy,
                        peak_current=peak, peak_force=capability, bank=bank,
                        sep_index=entry.sep_index,
                        new_polarity=entry.new_polarity,
                        slider_pos=new_state.slider_pos)
    return new_state, result


def _bias_moment(coil: Coil, continuous_current: float) -> float:
    """Dipole moment of the coil itself at the bias current [A*m^2]."""
    if not continuous_current:
        return 0.0
    return coil.turns * continuous_current * math.pi * coil.mean_radius**2


def run_plan(state: LinearMotorState, plan: StepPlan, mode: DriveMode,
             bank: CapacitorBank, friction_force: float,
             surface: Surface | None = None,
             coil: Coil = ROBOT_COIL):
    """Execute a whole plan; returns (state, bank, [StepResult])."""
    results = []
    for entry in plan.entries:
        state, res = execute_step(state, entry, mode, bank, friction_force,
                                  surface=surface, coil=coil)
        bank = res.bank
        results.append(res)
    return state, bank, results


def predict_speed(mode: DriveMode, surface: Surface, n_steps: int = 12,
                  coil: Coil = ROBOT_COIL) -> float:
    """Mean module speed in mm/s over a fresh run of ``n_steps`` steps.

    Stepping semantics: the module starts and stops within every step, so
    speed is step distance over mean step duration with no carry-over.
    """
    state = LinearMotorState()
    bank = CapacitorBank()
    plan = step_sequence(FORWARD, n_steps)
    friction = surface.friction_force(MODULE_MASS)
    state, bank, results = run_plan(state, plan, mode, bank, friction,
                                    surface=surface, coil=coil)
    mean_duration = sum(r.duration for r in results) / len(results)
    return mode.step_distance / mean_duration * 1e3
