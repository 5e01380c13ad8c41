#!/usr/bin/env python3
"""Benchmark the numba hysteresis kernel against the pure-numpy fallback.

The hot loop of the whole simulator is the sub-stepped hysteresis update:
every pulse or demagnetization drive advances all rod segments through a
current waveform with per-segment fields. This script times the identical
workload on both kernels (and checks they agree).

Usage:
    python3 benchmarks/bench_kernels.py [repeats]

Selecting the kernel at runtime elsewhere in the package:
    SEPSIM_NO_NUMBA=1  -> pure-numpy path
"""

import sys
import time

import numpy as np

from sepsim.magnetics import PRESET_TABLE1 as MAT
from sepsim.magnetics import _kernel_numba, _kernel_numpy


def workload():
    """A demagnetization-sized drive: 17 segments, decaying reversals."""
    seg = 17
    rng = np.random.default_rng(42)
    scales = np.linspace(18e3, 29e3, seg)
    amps = 20.0 * 0.85 ** np.arange(24)
    currents = np.empty(amps.size * 4)
    currents[0::4] = amps
    currents[1::4] = 0.0
    currents[2::4] = -amps
    currents[3::4] = 0.0
    m0 = rng.uniform(-0.5, 0.5, seg) * MAT.ms * 0.2
    return (MAT.ms, MAT.a, MAT.k, MAT.c, MAT.alpha, m0, np.zeros(seg), 0.0,
            currents, scales, MAT.hc / 50.0)


def bench(kernel, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.ja_run(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    args = workload()

    # compile outside the timed region
    _kernel_numba.ja_run(*args)

    t_numba, r_numba = bench(_kernel_numba, args, repeats)
    t_numpy, r_numpy = bench(_kernel_numpy, args, repeats)

    np.testing.assert_allclose(r_numba[0], r_numpy[0], rtol=1e-10,
                               atol=1e-9 * MAT.ms)

    print(f"segments=17  waveform samples={args[8].size}  repeats={repeats}")
    print(f"numba kernel : {t_numba * 1e3:8.2f} ms")
    print(f"numpy kernel : {t_numpy * 1e3:8.2f} ms")
    print(f"speedup      : {t_numpy / t_numba:8.1f}x")


if __name__ == "__main__":
    main()
