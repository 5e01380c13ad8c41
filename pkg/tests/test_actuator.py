"""Linear motor: commutation, force properties, stepping, speeds."""

import dataclasses

import numpy as np
import pytest

from sepsim.actuator import (CANONICAL_POLARITIES, FORWARD, MODES, REVERSE,
                             ROBOT_COIL, SURFACES, LinearMotorState, PlanStep,
                             execute_step, force_capability, motor_force,
                             predict_speed, pulse_field_reliable, run_plan,
                             step_sequence)
from sepsim.constants import MODULE_MASS, MODULE_SIDE, STEP_DISTANCE
from sepsim.errors import StallError
from sepsim.power import CapacitorBank


def bisect_equilibrium(state: LinearMotorState, lo: float, hi: float,
                       tol: float = 1e-12) -> float:
    """Oracle: bisection root of the axial force between two positions."""
    f_lo = motor_force(state, slider_pos=lo)
    f_hi = motor_force(state, slider_pos=hi)
    assert f_lo * f_hi < 0, "bracket must straddle the root"
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = motor_force(state, slider_pos=mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def test_forward_plan_is_312_cycle():
    plan = step_sequence(FORWARD, 6)
    assert plan.toggle_order == (3, 1, 2, 3, 1, 2)
    assert all(e.displacement_steps == +1 for e in plan.entries)


def test_reverse_plan_is_132_cycle():
    plan = step_sequence(REVERSE, 6)
    assert plan.toggle_order == (1, 3, 2, 1, 3, 2)
    assert all(e.displacement_steps == -1 for e in plan.entries)


def test_empty_plan():
    assert step_sequence(FORWARD, 0).entries == ()


def test_each_entry_toggles_exactly_one_rod():
    pol = list(CANONICAL_POLARITIES)
    for entry in step_sequence(FORWARD, 12).entries:
        changed = [i for i in range(3)
                   if (i == entry.sep_index - 1)]
        assert len(changed) == 1
        assert entry.new_polarity == -pol[entry.sep_index - 1]
        pol[entry.sep_index - 1] = entry.new_polarity


def test_plan_polarities_resolve_demagnetized_to_positive():
    plan = step_sequence(FORWARD, 1, initial_polarities=(0, 0, 0))
    assert plan.entries[0].new_polarity == +1


def test_six_steps_cover_one_module_side():
    state = LinearMotorState()
    for entry in step_sequence(FORWARD, 6).entries:
        state = state.toggled(entry)
    assert state.slider_steps == 6
    assert state.slider_pos == pytest.approx(MODULE_SIDE, abs=1e-18)
    assert 6 * STEP_DISTANCE == MODULE_SIDE


def test_round_trip_restores_exact_state():
    state0 = LinearMotorState()
    state = state0
    for entry in step_sequence(FORWARD, 6).entries:
        state = state.toggled(entry)
    assert state.polarities == state0.polarities  # parity: each rod twice
    for entry in step_sequence(REVERSE, 6).entries:
        state = state.toggled(entry)
    assert state == state0


def test_motor_force_zero_when_demagnetized():
    state = LinearMotorState(polarities=(0, 0, 0))
    assert motor_force(state) == 0.0
    assert force_capability(state) == 0.0


def test_equilibrium_is_zero_force_and_restoring():
    """The symmetric (+,-,+) pattern pins an equilibrium between the outer
    rods; bisection locates it and small displacements are opposed."""
    state = LinearMotorState(polarities=(+1, -1, +1))
    q_star = bisect_equilibrium(state, 2.0e-3, 3.0e-3)
    assert q_star == pytest.approx(2.5e-3, abs=1e-9)
    assert abs(motor_force(state, slider_pos=q_star)) < 1e-9  # newtons
    eps = 20e-6
    assert motor_force(state, slider_pos=q_star + eps) < 0
    assert motor_force(state, slider_pos=q_star - eps) > 0


def test_global_flip_with_mirror_negates_force():
    """Mirroring the whole motor about the array center (which also
    reverses the rod order) and flipping every polarity leaves the axial
    force equal: two sign flips cancel."""
    state = LinearMotorState(polarities=(+1, -1, -1))
    s1, s2, s3 = state.polarities
    mirrored_flipped = dataclasses.replace(state, polarities=(-s3, -s2, -s1))
    center = sum(state.sep_positions) / 3.0
    for q in np.linspace(-4e-3, 9e-3, 17):
        f = motor_force(state, slider_pos=q)
        # mirror the two-pin slider about the array center
        q_mirror = 2 * center - (q + state.slider_spacing)
        f_mirror = motor_force(mirrored_flipped, slider_pos=q_mirror)
        assert f_mirror == pytest.approx(f, rel=1e-9, abs=1e-15)


def test_flipping_all_polarities_negates_force_at_same_position():
    state = LinearMotorState(polarities=(+1, -1, -1))
    flipped = dataclasses.replace(state, polarities=(-1, +1, +1))
    for q in np.linspace(-4e-3, 9e-3, 9):
        assert motor_force(flipped, slider_pos=q) == \
            pytest.approx(-motor_force(state, slider_pos=q), rel=1e-12, abs=1e-18)


def test_capability_healthy_through_both_tours():
    for direction in (FORWARD, REVERSE):
        state = LinearMotorState()
        for entry in step_sequence(direction, 6).entries:
            state = state.toggled(entry)
            cap = force_capability(state)
            assert cap > 0.5  # newtons; friction demands are under 0.1 N


def test_execute_step_advances_and_reports(cfg):
    state = LinearMotorState()
    bank = CapacitorBank()
    entry = step_sequence(FORWARD, 1).entries[0]
    new_state, res = execute_step(state, entry, MODES["stable"], bank, 0.03,
                                  surface=SURFACES["glass"])
    assert new_state.slider_steps == 1
    assert new_state.polarities == (+1, -1, +1)
    assert res.reliable
    assert res.duration > 0.1
    assert res.energy > 0
    assert res.bank.voltage < bank.voltage


def test_execute_step_stalls_on_excess_friction():
    state = LinearMotorState()
    bank = CapacitorBank()
    entry = step_sequence(FORWARD, 1).entries[0]
    with pytest.raises(StallError):
        execute_step(state, entry, MODES["stable"], bank, friction_force=50.0)


def test_stable_mode_runs_reliable():
    state = LinearMotorState()
    bank = CapacitorBank()
    plan = step_sequence(FORWARD, 6)
    friction = SURFACES["glass"].friction_force(MODULE_MASS)
    _, _, results = run_plan(state, plan, MODES["stable"], bank, friction,
                             surface=SURFACES["glass"])
    assert all(r.reliable for r in results)


def test_fastest_mode_goes_unreliable_when_bank_sags():
    state = LinearMotorState()
    bank = CapacitorBank()
    plan = step_sequence(FORWARD, 12)
    friction = SURFACES["glass"].friction_force(MODULE_MASS)
    _, _, results = run_plan(state, plan, MODES["fastest"], bank, friction,
                             surface=SURFACES["glass"])
    assert not all(r.reliable for r in results)
    assert results[0].reliable  # fresh bank still saturates the rod
    peaks = [r.peak_current for r in results]
    assert all(b <= a + 1e-12 for a, b in zip(peaks, peaks[1:]))


def test_reliability_threshold_uses_weakest_segment():
    assert pulse_field_reliable(ROBOT_COIL, 9.5)
    assert not pulse_field_reliable(ROBOT_COIL, 5.5)


def test_enhanced_mode_boosts_attraction():
    """With the bias current the pull toward the engaged pattern grows."""
    state = LinearMotorState()
    coil = ROBOT_COIL
    boost = coil.turns * 0.8 * np.pi * coil.mean_radius**2
    base = force_capability(state)
    boosted = force_capability(state, extra_moment=boost)
    assert boosted > base


def test_enhanced_mode_energy_includes_continuous_current():
    state = LinearMotorState()
    entry = step_sequence(FORWARD, 1).entries[0]
    _, res_stable = execute_step(state, entry, MODES["stable"],
                                 CapacitorBank(), 0.03)
    _, res_enh = execute_step(state, entry, MODES["enhanced"],
                              CapacitorBank(), 0.03)
    extra = 0.8**2 * ROBOT_COIL.resistance * res_enh.duration
    assert res_enh.energy == pytest.approx(res_stable.energy + extra, rel=1e-6)


def test_zero_hold_power_semantics():
    # between steps no mode but enhanced drives any current, yet the
    # engaged pattern still pulls: holding needs no energy
    assert MODES["stable"].continuous_current == 0.0
    assert MODES["fastest"].continuous_current == 0.0
    state = LinearMotorState()
    assert force_capability(state) > 0


SPEED_TABLE = {
    ("fastest", "glass"): 20.0, ("fastest", "paper"): 20.0,
    ("fastest", "wood"): 18.0, ("fastest", "cement"): 18.0,
    ("stable", "glass"): 13.0, ("stable", "paper"): 13.0,
    ("stable", "wood"): 12.0, ("stable", "cement"): 12.0,
    ("enhanced", "glass"): 9.0, ("enhanced", "paper"): 9.0,
    ("enhanced", "wood"): 9.0, ("enhanced", "cement"): 9.0,
}


@pytest.mark.parametrize("mode_name,surface_name", sorted(SPEED_TABLE))
def test_speed_cells_within_tolerance(mode_name, surface_name):
    speed = predict_speed(MODES[mode_name], SURFACES[surface_name])
    assert speed == pytest.approx(SPEED_TABLE[(mode_name, surface_name)], abs=2.0)


def test_speed_ordering_per_surface():
    for surface in SURFACES.values():
        fastest = predict_speed(MODES["fastest"], surface)
        stable = predict_speed(MODES["stable"], surface)
        enhanced = predict_speed(MODES["enhanced"], surface)
        assert fastest > stable > enhanced


def test_enhanced_speed_identical_across_surfaces():
    speeds = [predict_speed(MODES["enhanced"], s) for s in SURFACES.values()]
    assert max(speeds) - min(speeds) < 1e-9
