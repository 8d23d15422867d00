"""Pure numpy versions of the hot loops.  Same interface as ``_ckernels``."""
import math

import numpy as np

from .logspace import log1mexp_array, phi_array, psi_array

NAME = "python"


def factor_sum(log_w, shift, mult, below):
    """sum_j m_j h_j(log_w + shift_j) with h = log(1 - e^{-u}) below, log(1 - e^u) above."""
    log_w = np.asarray(log_w, dtype=complex)
    re = np.zeros(log_w.shape)
    im = np.zeros(log_w.shape)
    for s, m, b in zip(shift, mult, below):
        u = log_w + s
        h = log1mexp_array(-u if b else u)
        re += m * h.real
        im += m * h.imag
    return re + 1j * im


def logderiv_sum(log_w, shift, mult, below):
    """(sum_below m phi(-u) - sum_above m phi(u),  -sum m psi(u))."""
    log_w = np.asarray(log_w, dtype=complex)
    g = np.zeros(log_w.shape, dtype=complex)
    dg = np.zeros(log_w.shape, dtype=complex)
    for s, m, b in zip(shift, mult, below):
        u = log_w + s
        if b:
            g += m * phi_array(-u)
        else:
            g -= m * phi_array(u)
        dg -= m * psi_array(u)
    return g, dg


def orbit_layers(table, base0, lw0, max_iter, target, stuck_log):
    """Iterate f on scaled points until the ring index reaches ``target``.

    Returns (layer, status) arrays; status 0 escaped, 1 stuck at 0,
    2 overflow, 3 still running after max_iter.
    """
    (ptr, shift, mult, below, M, const, gap, L, theta, first, nbase) = table
    n = len(base0)
    base = np.array(base0, dtype=np.int64)
    lw = np.array(lw0, dtype=complex)
    layer = np.full(n, -1, dtype=np.int64)
    status = np.full(n, 3, dtype=np.int64)
    active = np.ones(n, dtype=bool)

    def ring_of(b, x):
        r = np.where(x >= 0, b, b - 1)
        return np.where(r < 0, -1, r + first)

    r = ring_of(base, lw.real)
    hit = r >= target
    layer[hit] = 0
    status[hit] = 0
    active &= ~hit
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cur = base[idx]            # snapshot: points moved this step must not be seen again
        for b in np.unique(cur):
            sel = idx[cur == b]
            if b >= nbase:
                status[sel] = 2
                active[sel] = False
                continue
            lo, hi = ptr[b], ptr[b + 1]
            o = M[b] * lw[sel] + const[b] + factor_sum(lw[sel], shift[lo:hi], mult[lo:hi], below[lo:hi])
            delta = o.real - gap[b]
            nb = np.full(sel.size, b + 1, dtype=np.int64)
            x = delta.copy()           # log|z'| - L[nb]
            # move to the nearest base
            for _ in range(len(L)):
                up = (nb + 1 < len(L))
                up &= x > 0.5 * (L[np.minimum(nb + 1, len(L) - 1)] - L[nb])
                dn = (nb > 0)
                dn &= x < -0.5 * (L[nb] - L[np.maximum(nb - 1, 0)])
                if not (up.any() or dn.any()):
                    break
                x = np.where(up, x - (L[np.minimum(nb + 1, len(L) - 1)] - L[nb]), x)
                nb = np.where(up, nb + 1, nb)
                x = np.where(dn, x + (L[nb] - L[np.maximum(nb - 1, 0)]), x)
                nb = np.where(dn, nb - 1, nb)
            ang = np.mod(o.imag - theta[nb] + math.pi, 2 * math.pi) - math.pi
            base[sel] = nb
            lw[sel] = x + 1j * ang
            stuck = ~(x > -math.inf) | ((nb == 0) & (x + L[0] < stuck_log))
            r = ring_of(nb, x)
            esc = (r >= target) & ~stuck
            layer[sel[esc]] = it
            status[sel[esc]] = 0
            status[sel[stuck]] = 1
            active[sel[esc | stuck]] = False
    return layer, status
