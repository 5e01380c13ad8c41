"""Axially segmented switchable rod: pulse drive and flux metrics.

The rod is split into an odd number of segments along its axis; each keeps
its own hysteresis state and sees the coil field at its segment center.
That is enough to capture the coverage effect (a winding shorter than the
rod leaves the ends unmagnetized) without a 2D field solution.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..constants import MU0
from ..errors import DemagnetizationFailed
from .hysteresis import SolverConfig, run_currents
from .materials import MaterialParams
from .solenoid import Coil, field_profile


@dataclasses.dataclass(frozen=True)
class PulseWaveform:
    """Trapezoidal drive pulse: linear rise, flat hold, linear fall.

    peak_current : flat-top amplitude [A]
    rise_time : rise and fall edge width [s]
    hold_time : flat-top duration [s]
    period_positive / period_negative : bookkeeping period per polarity [s]
    polarity : +1 or -1
    """

    peak_current: float
    rise_time: float = 1.0e-5
    hold_time: float = 4.0e-4
    period_positive: float = 4.0e-4
    period_negative: float = 4.0e-4
    polarity: int = +1

    def __post_init__(self) -> None:
        if self.rise_time <= 0:
            raise ValueError(f"rise_time invalid: {self.rise_time}")
        if self.hold_time < 0:
            raise ValueError(f"hold_time invalid: {self.hold_time}")
        if self.peak_current < 0:
            raise ValueError(f"peak_current invalid: {self.peak_current}")
        if self.polarity not in (+1, -1):
            raise ValueError(f"polarity invalid: {self.polarity}")

    @property
    def duration(self) -> float:
        """Rise + hold + fall [s]."""
        return 2.0 * self.rise_time + self.hold_time

    def samples(self, time_step: float) -> np.ndarray:
        """Current samples over the pulse at the solver step, ending at 0 A."""
        amp = self.polarity * self.peak_current
        n_edge = max(1, int(round(self.rise_time / time_step)))
        n_hold = max(1, int(round(self.hold_time / time_step))) if self.hold_time else 0
        rise = amp * np.arange(1, n_edge + 1) / n_edge
        hold = np.full(n_hold, amp)
        fall = amp * np.arange(n_edge - 1, -1, -1) / n_edge
        return np.concatenate([rise, hold, fall])


@dataclasses.dataclass(frozen=True)
class RodState:
    """Magnetization state of the whole rod.

    m / m_irr : per-segment magnetization [A/m], index 0 at z = -length/2
    current_prev : drive current the state was left at [A]
    """

    material: MaterialParams
    radius: float
    length: float
    m: np.ndarray
    m_irr: np.ndarray
    current_prev: float = 0.0

    def __post_init__(self) -> None:
        if self.radius <= 0 or self.length <= 0:
            raise ValueError("rod geometry must be positive")
        n = len(self.m)
        if n < 3 or n % 2 == 0:
            raise ValueError(f"segment count must be odd and >= 3, got {n}")
        if len(self.m_irr) != n:
            raise ValueError("m and m_irr must have the same length")
        if np.max(np.abs(self.m)) > self.material.ms * (1 + 1e-9):
            raise ValueError("|m| exceeds ms")
        object.__setattr__(self, "m", np.asarray(self.m, dtype=np.float64))
        object.__setattr__(self, "m_irr", np.asarray(self.m_irr, dtype=np.float64))

    @property
    def segment_count(self) -> int:
        return len(self.m)

    @property
    def segment_centers(self) -> np.ndarray:
        """Axial segment-center positions, rod centered on 0 [m]."""
        n = self.segment_count
        edges = np.linspace(-self.length / 2.0, self.length / 2.0, n + 1)
        return 0.5 * (edges[:-1] + edges[1:])

    @property
    def volume(self) -> float:
        return float(np.pi * self.radius**2 * self.length)

    def with_state(self, m: np.ndarray, m_irr: np.ndarray,
                   current_prev: float) -> "RodState":
        return dataclasses.replace(self, m=m, m_irr=m_irr, current_prev=current_prev)


def demagnetized_rod(material: MaterialParams, radius: float, length: float,
                     segment_count: int = 17) -> RodState:
    """Fresh rod with zero magnetization everywhere."""
    zeros = np.zeros(segment_count)
    return RodState(material=material, radius=radius, length=length,
                    m=zeros, m_irr=zeros.copy())


def apply_pulse(rod: RodState, coil: Coil, wf: PulseWaveform,
                cfg: SolverConfig | None = None) -> RodState:
    """Drive the rod through one trapezoidal pulse.

    Every segment is advanced through the full waveform with the field the
    coil produces at its own center; segments outside the winding see the
    weaker fringe field.
    """
    cfg = cfg or SolverConfig()
    if wf.peak_current == 0.0:
        return rod
    scales = field_profile(coil, rod.segment_centers)
    currents = wf.samples(cfg.time_step)
    m, mirr, cur = run_currents(rod.material, rod.m, rod.m_irr,
                                rod.current_prev, currents, scales,
                                cfg.dh_max(rod.material))
    return rod.with_state(m, mirr, cur)


def demagnetize(rod: RodState, coil: Coil, start_amplitude: float,
                cfg: SolverConfig | None = None) -> RodState:
    """Erase the rod with a decaying alternating drive.

    The drive is the decaying sinusoid of the configured demagnetization
    frequency, sampled at its peaks and zero crossings. The hysteresis
    model is rate-independent, so the reversal peaks are all that matter;
    the sub-step cap fills in the path between samples.

    Raises DemagnetizationFailed if any segment keeps more than the
    configured residual once the amplitude has decayed away.
    """
    cfg = cfg or SolverConfig()
    material = rod.material
    scales = field_profile(coil, rod.segment_centers)
    stop_current = 0.02 * material.hc / max(np.max(np.abs(scales)), 1e-30)

    peaks = []
    amp = float(start_amplitude)
    sign = 1.0
    cycles = 0
    while amp > stop_current and cycles < cfg.demag_max_cycles:
        peaks.extend([sign * amp, 0.0, -sign * amp, 0.0])
        amp *= cfg.demag_decay
        cycles += 1
    peaks.append(0.0)

    m, mirr, cur = run_currents(material, rod.m, rod.m_irr, rod.current_prev,
                                np.asarray(peaks), scales, cfg.dh_max(material))
    result = rod.with_state(m, mirr, cur)
    residual = float(np.max(np.abs(result.m))) / material.ms
    if residual >= cfg.remanence_tolerance:
        raise DemagnetizationFailed(
            f"residual |M| = {residual:.3f} ms after {cycles} cycles "
            f"(start {start_amplitude} A, decay {cfg.demag_decay})")
    return result


def flux_metrics(rod: RodState, h_applied: np.ndarray | None = None) -> dict[str, float]:
    """Center and average flux density, B = mu0 (H + M) per segment [T].

    ``h_applied`` is the per-segment applied field at sampling time; omit it
    when reporting remanence.
    """
    h = np.zeros(rod.segment_count) if h_applied is None else np.asarray(h_applied)
    b = MU0 * (h + rod.m)
    return {
        "b_center": float(b[rod.segment_count // 2]),
        "b_average": float(np.mean(b)),
    }
