"""Segmented-rod drive: pulses, coverage, demagnetization, flux metrics."""

import numpy as np
import pytest

from sepsim.errors import DemagnetizationFailed
from sepsim.constants import MU0
from sepsim.magnetics import (PulseWaveform, RodState, SolverConfig,
                              apply_pulse, centered, demagnetize,
                              demagnetized_rod, field_profile, flux_metrics)


def test_rod_segments_must_be_odd_and_enough(table1):
    with pytest.raises(ValueError):
        demagnetized_rod(table1, 1.5e-3, 8e-3, segment_count=4)
    with pytest.raises(ValueError):
        demagnetized_rod(table1, 1.5e-3, 8e-3, segment_count=1)
    rod = demagnetized_rod(table1, 1.5e-3, 8e-3, segment_count=17)
    assert rod.segment_count == 17
    assert len(rod.segment_centers) == 17
    np.testing.assert_allclose(rod.segment_centers[8], 0.0, atol=1e-15)


def test_waveform_samples_trapezoid():
    wf = PulseWaveform(peak_current=10.0)
    samples = wf.samples(5e-7)
    assert samples.max() == pytest.approx(10.0)
    assert samples[-1] == 0.0
    n_hold = np.sum(samples == 10.0)
    assert n_hold == pytest.approx(wf.hold_time / 5e-7, abs=2)
    neg = PulseWaveform(peak_current=10.0, polarity=-1).samples(5e-7)
    np.testing.assert_array_equal(neg, -samples)


def test_zero_amplitude_pulse_is_identity(fresh_rod, exact_coil, cfg):
    rod = apply_pulse(fresh_rod, exact_coil, PulseWaveform(0.0), cfg)
    assert rod is fresh_rod


def test_full_pulse_saturates_and_leaves_remanence(fresh_rod, exact_coil, cfg,
                                                   fine_cfg, table1):
    """20 A exact wrap: every segment reaches the remanence plateau; the
    values agree with the fine-step oracle."""
    rod = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0), cfg)
    oracle = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0), fine_cfg)
    np.testing.assert_allclose(rod.m, oracle.m, atol=2e-3 * table1.ms)
    # all segments hold at least 90 % of the calibrated remanence
    assert np.min(np.abs(rod.m)) >= 0.9 * table1.mr
    fm = flux_metrics(rod)
    assert fm["b_center"] == pytest.approx(table1.br, rel=0.02)


def test_negative_pulse_mirrors_positive(fresh_rod, exact_coil, cfg):
    pos = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0, polarity=+1), cfg)
    neg = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0, polarity=-1), cfg)
    np.testing.assert_array_equal(neg.m, -pos.m)


def test_half_coverage_leaves_ends_unmagnetized(fresh_rod, cfg, table1):
    # winding over only the central 5 mm of the 8 mm rod
    coil5 = centered(250, 5e-3, 1.5e-3, 0.2e-3)
    rod = apply_pulse(fresh_rod, coil5, PulseWaveform(20.0), cfg)
    assert abs(rod.m[0]) < 0.10 * table1.ms
    assert abs(rod.m[-1]) < 0.10 * table1.ms
    assert abs(rod.m[rod.segment_count // 2]) >= 0.9 * table1.mr


def test_fringe_field_is_what_end_segments_see(fresh_rod, cfg):
    coil5 = centered(250, 5e-3, 1.5e-3, 0.2e-3)
    profile = field_profile(coil5, fresh_rod.segment_centers)
    assert profile[0] < 0.35 * profile[len(profile) // 2]
    assert profile[0] > 0.0


def test_demagnetize_erases_saturated_rod(fresh_rod, exact_coil, cfg, table1):
    sat = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0), cfg)
    erased = demagnetize(sat, exact_coil, 20.0, cfg)
    assert np.max(np.abs(erased.m)) < 0.05 * table1.ms


def test_demagnetize_matches_fine_oracle(fresh_rod, exact_coil, cfg, fine_cfg,
                                         table1):
    sat = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0), cfg)
    a = demagnetize(sat, exact_coil, 20.0, cfg)
    b = demagnetize(sat, exact_coil, 20.0, fine_cfg)
    np.testing.assert_allclose(a.m, b.m, atol=5e-3 * table1.ms)


def test_demagnetize_idempotent_on_clean_rod(fresh_rod, exact_coil, cfg, table1):
    erased = demagnetize(fresh_rod, exact_coil, 20.0, cfg)
    assert np.max(np.abs(erased.m)) < 0.05 * table1.ms


def test_demagnetize_zero_amplitude_fails_on_saturated(fresh_rod, exact_coil, cfg):
    sat = apply_pulse(fresh_rod, exact_coil, PulseWaveform(20.0), cfg)
    with pytest.raises(DemagnetizationFailed):
        demagnetize(sat, exact_coil, 0.0, cfg)


def test_flux_metrics_demagnetized_is_zero(fresh_rod):
    fm = flux_metrics(fresh_rod)
    assert fm["b_center"] == 0.0
    assert fm["b_average"] == 0.0


def test_flux_metrics_uniform_rod(table1):
    m = np.full(17, 0.5 * table1.ms)
    rod = RodState(material=table1, radius=1.5e-3, length=8e-3,
                   m=m, m_irr=m.copy())
    fm = flux_metrics(rod)
    assert fm["b_center"] == pytest.approx(MU0 * 0.5 * table1.ms, rel=1e-12)
    assert fm["b_average"] == pytest.approx(fm["b_center"], rel=1e-12)


def test_flux_metrics_average_below_center_for_half_wrap(fresh_rod, cfg):
    coil4 = centered(250, 4e-3, 1.5e-3, 0.2e-3)
    rod = apply_pulse(fresh_rod, coil4, PulseWaveform(20.0), cfg)
    fm = flux_metrics(rod)
    assert fm["b_average"] < fm["b_center"]


def test_flux_metrics_include_applied_field(fresh_rod, exact_coil):
    h = field_profile(exact_coil, fresh_rod.segment_centers) * 5.0
    fm = flux_metrics(fresh_rod, h_applied=h)
    assert fm["b_center"] == pytest.approx(MU0 * h[8], rel=1e-12)


def test_rod_state_validation(table1):
    with pytest.raises(ValueError):
        RodState(material=table1, radius=1.5e-3, length=8e-3,
                 m=np.full(17, 2 * table1.ms), m_irr=np.zeros(17))
