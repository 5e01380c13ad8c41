"""Numba-accelerated hysteresis kernel.

Same arithmetic as ``_kernel_numpy`` (same sub-step counts, same branches,
same Langevin evaluation), compiled per segment instead of vectorized. The
two must stay in lockstep; the parity test compares them on random drives.
"""

import math

import numpy as np
from numba import njit

_SERIES_CUTOFF = 1e-2


@njit(cache=True)
def _langevin(x):
    ax = abs(x)
    if ax < _SERIES_CUTOFF:
        out = ax / 3.0 - ax**3 / 45.0
    else:
        out = 1.0 / math.tanh(ax) - 1.0 / ax
    if x < 0.0:
        return -out
    if x > 0.0:
        return out
    return 0.0


@njit(cache=True)
def ja_run(ms, a, k, c, alpha, m, mirr, current_prev, currents, scales, dh_max):
    m = m.copy()
    mirr = mirr.copy()
    n_seg = scales.shape[0]
    scale_amp = 0.0
    for s in range(n_seg):
        if abs(scales[s]) > scale_amp:
            scale_amp = abs(scales[s])
    one_minus_c = 1.0 - c
    i_cur = current_prev
    for t in range(currents.shape[0]):
        i_next = currents[t]
        di = i_next - i_cur
        if di == 0.0:
            continue
        n_sub = max(1, int(math.ceil(scale_amp * abs(di) / dh_max)))
        di_sub = di / n_sub
        for s in range(n_seg):
            dh = scales[s] * di_sub
            if dh > 0.0:
                delta = 1.0
            elif dh < 0.0:
                delta = -1.0
            else:
                delta = 0.0
            m_s = m[s]
            mirr_s = mirr[s]
            for j in range(n_sub):
                i_mid = i_cur + di_sub * (j + 1)
                h_new = scales[s] * i_mid
                h_old = h_new - dh
                he = h_old + alpha * m_s
                man = ms * _langevin(he / a)
                gap = man - mirr_s
                if delta * gap > 0.0:
                    denom = k * delta - alpha * gap
                    if delta * denom > 0.0:
                        step = gap / denom * dh
                    else:
                        step = gap
                    if abs(step) > abs(gap):
                        step = gap
                    mirr_s = mirr_s + step
                man_new = ms * _langevin((h_new + alpha * m_s) / a)
                m_tmp = c * man_new + one_minus_c * mirr_s
                man_new = ms * _langevin((h_new + alpha * m_tmp) / a)
                m_s = c * man_new + one_minus_c * mirr_s
            m[s] = m_s
            mirr[s] = mirr_s
        i_cur = i_next
    return m, mirr, i_cur
