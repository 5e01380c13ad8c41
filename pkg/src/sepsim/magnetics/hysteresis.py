"""Scalar hysteresis state and the drive front-end.

The numerical work happens in one of two interchangeable kernels: a numba
``@njit`` build (default) and a pure-numpy build. Set ``SEPSIM_NO_NUMBA=1``
to force the numpy path; the package also falls back to it silently when
numba is not importable. ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import dataclasses
import math
import os

import numpy as np

from ..errors import NonFiniteField
from .materials import MaterialParams

from . import _kernel_numpy

USE_NUMBA = os.environ.get("SEPSIM_NO_NUMBA", "") not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from . import _kernel_numba as _kernel
    except ImportError:
        USE_NUMBA = False
        _kernel = _kernel_numpy
else:
    _kernel = _kernel_numpy


def kernel_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


@dataclasses.dataclass(frozen=True)
class JaState:
    """Magnetization state of one rod segment.

    m : total magnetization [A/m]
    m_irr : irreversible component [A/m]
    h_prev : last applied field [A/m]
    """

    m: float = 0.0
    m_irr: float = 0.0
    h_prev: float = 0.0


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Drive integration settings.

    time_step : waveform sampling step [s]
    dh_max_fraction : field sub-step cap as a fraction of coercivity
    demag_frequency : decaying-sine demagnetization frequency [Hz]
    demag_decay : amplitude factor per demagnetization cycle
    demag_max_cycles : give up after this many cycles
    remanence_tolerance : acceptable residual |M| after demagnetization,
        as a fraction of ms
    """

    time_step: float = 5.0e-7
    dh_max_fraction: float = 1.0 / 50.0
    demag_frequency: float = 2.0
    demag_decay: float = 0.85
    demag_max_cycles: int = 200
    remanence_tolerance: float = 0.05

    def __post_init__(self) -> None:
        if self.time_step <= 0:
            raise ValueError(f"time_step invalid: {self.time_step}")
        if not 0 < self.demag_decay < 1:
            raise ValueError(f"demag_decay invalid: {self.demag_decay}")
        if self.dh_max_fraction <= 0:
            raise ValueError(f"dh_max_fraction invalid: {self.dh_max_fraction}")

    def dh_max(self, material: MaterialParams) -> float:
        return material.hc * self.dh_max_fraction


def run_currents(material: MaterialParams, m: np.ndarray, mirr: np.ndarray,
                 current_prev: float, currents: np.ndarray, scales: np.ndarray,
                 dh_max: float):
    """Advance raw state arrays through a current waveform (kernel dispatch)."""
    if not np.all(np.isfinite(currents)):
        raise NonFiniteField("drive waveform contains non-finite samples")
    return _kernel.ja_run(
        material.ms, material.a, material.k, material.c, material.alpha,
        np.asarray(m, dtype=np.float64), np.asarray(mirr, dtype=np.float64),
        float(current_prev), np.asarray(currents, dtype=np.float64),
        np.asarray(scales, dtype=np.float64), float(dh_max),
    )


def ja_update(material: MaterialParams, state: JaState, h_next: float,
              cfg: SolverConfig | None = None) -> JaState:
    """Advance one segment state to a new applied field.

    The move is sub-stepped internally so no increment exceeds the
    configured cap; the result depends on the drive path, not on time.
    """
    if not math.isfinite(h_next):
        raise NonFiniteField(f"h_next is not finite: {h_next}")
    cfg = cfg or SolverConfig()
    m, mirr, h = run_currents(
        material,
        np.array([state.m]), np.array([state.m_irr]),
        state.h_prev, np.array([float(h_next)]), np.array([1.0]),
        cfg.dh_max(material),
    )
    return JaState(m=float(m[0]), m_irr=float(mirr[0]), h_prev=float(h))


def drive_sequence(material: MaterialParams, state: JaState, h_values,
                   cfg: SolverConfig | None = None) -> JaState:
    """Advance one segment through a sequence of applied-field targets."""
    cfg = cfg or SolverConfig()
    h_arr = np.asarray(h_values, dtype=float)
    if not np.all(np.isfinite(h_arr)):
        raise NonFiniteField("drive sequence contains non-finite samples")
    m, mirr, h = run_currents(
        material,
        np.array([state.m]), np.array([state.m_irr]),
        state.h_prev, h_arr, np.array([1.0]),
        cfg.dh_max(material),
    )
    return JaState(m=float(m[0]), m_irr=float(mirr[0]), h_prev=float(h))


def anhysteretic(material: MaterialParams, he) -> np.ndarray | float:
    """Anhysteretic magnetization at effective field ``he`` [A/m]."""
    return material.ms * _kernel_numpy.langevin(np.asarray(he, dtype=float) / material.a)


def consistency_residual(material: MaterialParams, state: JaState) -> float:
    """|m - c*man(he) - (1-c)*m_irr| / ms; should stay near zero."""
    he = state.h_prev + material.alpha * state.m
    man = float(anhysteretic(material, he))
    return abs(state.m - material.c * man - (1 - material.c) * state.m_irr) / material.ms
