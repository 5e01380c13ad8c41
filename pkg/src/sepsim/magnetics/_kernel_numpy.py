"""Pure-numpy hysteresis kernel.

Reference implementation of the scalar Jiles-Atherton update, vectorized
over rod segments. The numba kernel in ``_kernel_numba`` mirrors this
arithmetic exactly (same sub-step counts, same branch structure) so the two
paths agree to floating-point noise.

State per segment: total magnetization ``m`` and irreversible component
``mirr``. One call advances every segment through a shared current waveform;
segment fields are ``scales[s] * current`` (the coil field profile is fixed
in shape, its amplitude follows the drive current).

The update for one field increment ``dh``:

    he    = h + alpha*m
    man   = ms * L(he/a)                       L = Langevin
    dmirr = (man - mirr) / (k*delta - alpha*(man - mirr)) * dh
    m     = c*man + (1-c)*mirr

with ``delta = sign(dh)``. Irreversible motion is only allowed toward the
anhysteretic (``delta*(man - mirr) > 0``) and never past it, which keeps
``|m| <= ms`` unconditionally. The Langevin function factors out the sign of
its argument so the whole update is exactly odd-symmetric in the drive.
"""

import numpy as np

_SERIES_CUTOFF = 1e-2


def langevin(x):
    """L(x) = coth(x) - 1/x, elementwise, exactly odd in x."""
    ax = np.abs(x)
    sign = np.sign(x)
    out = np.empty_like(ax)
    small = ax < _SERIES_CUTOFF
    xs = ax[small]
    out[small] = xs / 3.0 - xs**3 / 45.0
    xb = ax[~small]
    out[~small] = 1.0 / np.tanh(xb) - 1.0 / xb
    return sign * out


def ja_run(ms, a, k, c, alpha, m, mirr, current_prev, currents, scales, dh_max):
    """Advance all segments through a current waveform.

    Parameters
    ----------
    m, mirr : float64[S] magnetization state (inputs are not mutated)
    current_prev : starting drive current [A]
    currents : float64[T] waveform samples [A]
    scales : float64[S] field per unit current at each segment [A/m/A]
    dh_max : largest allowed field increment per sub-step [A/m]

    Returns ``(m, mirr, current_final)``; callers must use the returned
    arrays rather than the ones passed in.
    """
    scale_amp = float(np.max(np.abs(scales))) if scales.size else 0.0
    i_cur = float(current_prev)
    one_minus_c = 1.0 - c
    for t in range(currents.shape[0]):
        i_next = float(currents[t])
        di = i_next - i_cur
        if di == 0.0:
            continue
        n_sub = max(1, int(np.ceil(scale_amp * abs(di) / dh_max)))
        di_sub = di / n_sub
        dh = scales * di_sub
        delta = np.sign(dh)
        for j in range(n_sub):
            i_mid = i_cur + di_sub * (j + 1)
            h_new = scales * i_mid
            h_old = h_new - dh
            he = h_old + alpha * m
            man = ms * langevin(he / a)
            gap = man - mirr
            active = delta * gap > 0.0
            denom = k * delta - alpha * gap
            # Avalanche guard: when the denominator loses the sign of delta
            # the model susceptibility diverges; jump straight to man.
            safe = delta * denom > 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(safe, gap / denom * dh, gap)
            step = np.where(active, step, 0.0)
            # Never relax past the anhysteretic.
            step = np.where(np.abs(step) > np.abs(gap), gap, step)
            mirr = mirr + step
            man_new = ms * langevin((h_new + alpha * m) / a)
            m_tmp = c * man_new + one_minus_c * mirr
            man_new = ms * langevin((h_new + alpha * m_tmp) / a)
            m = c * man_new + one_minus_c * mirr
        i_cur = i_next
    return m, mirr, i_cur
