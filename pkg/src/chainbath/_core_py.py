"""Pure-numpy implementation of the reduced-covariance window tables.

For each sample time t the evolved system coordinates are linear
combinations of the initial normal coordinates with trigonometric
factors c = cos(w t), s = sin(w t)/w, d = -w sin(w t).  The initial
covariance splits into a rank-2 oscillator part and a bath part that is
diagonal in the bare-chain modes, so the 4x4 system covariance at every
(t, T) grid point reduces to the tables computed here:

  Mc/Ms/Md  (nt, 3)      oscillator-projected trig overlaps
                         (entries 11, 12, 22 of the symmetric 2x2)
  C         (nt, nT, 10) bath contribution to the ten unique entries of
                         the (X1, P1, X2, P2) covariance, already
                         contracted with the thermal weights

The compiled extension in _core.pyx computes the same quantities with a
fused loop; results agree to rounding.
"""

from __future__ import annotations

import numpy as np

_SINC_GUARD = 1e-6

# B-vector slots: 0:c1 1:s1 2:d1 3:c2 4:s2 5:d2
# entry order: X1X1 X1P1 X1X2 X1P2 P1P1 P1X2 P1P2 X2X2 X2P2 P2P2
PAIRS_Q = ((0, 0), (0, 2), (0, 3), (0, 5), (2, 2), (2, 3), (2, 5), (3, 3), (3, 5), (5, 5))
PAIRS_P = ((1, 1), (1, 0), (1, 4), (1, 3), (0, 0), (0, 4), (0, 3), (4, 4), (4, 3), (3, 3))


def _trig_block(omega: np.ndarray, times: np.ndarray):
    phase = times[:, None] * omega[None, :]
    c = np.cos(phase)
    s = np.sin(phase)
    sw = np.where(np.abs(phase) < _SINC_GUARD, times[:, None], s / omega[None, :])
    return c, sw, -s * omega[None, :]


def window_tables(omega, o1, o2, overlap, times, wq, wp, num_threads: int = 1):
    """Tables for the reduced covariance over a time/temperature grid.

    omega:   (n,) coupled-model frequencies
    o1, o2:  (n,) system rows of the coupled mode matrix
    overlap: (n, m) coupled-mode x bath-mode overlap
    times:   (nt,) sample times
    wq, wp:  (m, nT) thermal position/momentum weights per bath mode
    Returns (Mc, Ms, Md, C); num_threads is accepted for interface
    parity with the compiled kernel.
    """
    omega = np.ascontiguousarray(omega, dtype=float)
    o1 = np.ascontiguousarray(o1, dtype=float)
    o2 = np.ascontiguousarray(o2, dtype=float)
    overlap = np.ascontiguousarray(overlap, dtype=float)
    times = np.ascontiguousarray(times, dtype=float)
    wq = np.ascontiguousarray(wq, dtype=float)
    wp = np.ascontiguousarray(wp, dtype=float)

    nt = times.size
    n = omega.size
    n_temp = wq.shape[1]
    oo = np.stack([o1 * o1, o1 * o2, o2 * o2])  # (3, n)

    mc = np.empty((nt, 3))
    ms = np.empty((nt, 3))
    md = np.empty((nt, 3))
    bath = np.empty((nt, n_temp, 10))

    # block over times to bound the (block, n) temporaries
    block = max(1, min(nt, int(4e6 / max(n, 1))))
    for start in range(0, nt, block):
        stop = min(start + block, nt)
        c, sw, d = _trig_block(omega, times[start:stop])
        mc[start:stop] = c @ oo.T
        ms[start:stop] = sw @ oo.T
        md[start:stop] = d @ oo.T
        b = (
            (c * o1) @ overlap,
            (sw * o1) @ overlap,
            (d * o1) @ overlap,
            (c * o2) @ overlap,
            (sw * o2) @ overlap,
            (d * o2) @ overlap,
        )
        for e in range(10):
            iq, jq = PAIRS_Q[e]
            ip, jp = PAIRS_P[e]
            bath[start:stop, :, e] = (b[iq] * b[jq]) @ wq + (b[ip] * b[jp]) @ wp
    return mc, ms, md, bath
