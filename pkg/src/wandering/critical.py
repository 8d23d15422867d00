"""Critical points c_k = w a_k near each zero and the quantities derived from them.

Near a_k write g(w) = z f'(z)/f(z) at z = w a_k.  Splitting off the base
factor gives the exact identity

    g(w) = m_k (n - 1/(1 - w)) + E(w),     n = 1 + (N + sum_{j<k} m_j)/m_k,

where E collects every other zero and is tiny for large k.  So the root is
w = 1 - 1/(n + delta) with delta = E(w)/m_k; delta is read off from E
directly instead of from 1/(1 - w) - n, which would cancel.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import BracketFailed, LeftAnnulus, NoConvergence, ValidationError
from .evaluator import DEFAULT, EvalConfig, circle_angles, frame, log_f, logderiv
from .families import ZeroSequence


@dataclass(frozen=True)
class CriticalPoint:
    k: int
    w: complex
    residual: float          # |z f'/f| relative to the largest cancelling term
    delta_k: float
    log_fc: float
    ratio_next: float        # log|f(c_k)| - log r_{k+1}
    base: int                # c_k = w * a_base
    delta_imag: float = 0.0
    abs_residual: float = 0.0
    iterations: int = 0
    method: str = "newton"
    unique: bool | None = None


def search_band(seq: ZeroSequence, k: int) -> tuple:
    """Re log w limits of B_k = ann(sqrt(r_{k-1} r_k), sqrt(r_k r_{k+1})) around a_k."""
    lo = 0.5 * (seq.L(k - 1) - seq.L(k)) if seq.has(k - 1) else -math.inf
    hi = 0.5 * (seq.L(k + 1) - seq.L(k)) if seq.has(k + 1) else math.inf
    return lo, hi


def _split(fr):
    """Indices of the frame's factors other than the base zero."""
    base = np.flatnonzero((~fr.below) & (fr.shift == 0))
    keep = np.ones(len(fr.shift), dtype=bool)
    keep[base[:1]] = False
    return keep


def _parts(seq, k, w, cfg):
    """(g, dg/dw, E, n, m_k) at w (base k)."""
    lw = complex(np.log(complex(w)))
    g, dg, fr = logderiv(seq, k, lw, cfg)
    keep = _split(fr)
    E, _ = kernels.logderiv_sum(np.array([lw]), fr.shift[keep], fr.mult[keep], fr.below[keep])
    mk = float(seq.mult_f[seq.pos(k)])
    n = 1.0 + fr.M / mk
    return complex(g[0]), complex(dg[0]) / w, complex(E[0]), n, mk, fr.M


def _finish(seq, k, base, w, cfg, it, method, delta=math.nan, delta_imag=0.0):
    lw = complex(np.log(complex(w)))
    g, _, fr = logderiv(seq, base, lw, cfg)
    g = complex(g[0])
    anchor, o, _ = log_f(seq, base, lw, cfg)
    o = complex(o[0])
    gap = float(seq.gap[seq.pos(base)])
    return CriticalPoint(k=k, w=complex(w), residual=abs(g) / max(1.0, fr.M),
                         delta_k=delta, log_fc=anchor + o.real, ratio_next=o.real - gap,
                         base=base, delta_imag=delta_imag, abs_residual=abs(g),
                         iterations=it, method=method)


def locate_thm4(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT, max_steps: int = 50,
                check_unique: bool = False) -> CriticalPoint:
    """Newton on z f'/f inside B_k from w0 = 1 - 1/n, then the delta fixed point."""
    if not seq.has(k + 1):
        raise ValidationError(f"k = {k} needs the zero a_{k + 1}")
    lo, hi = search_band(seq, k)
    _, _, _, n, mk, _ = _parts(seq, k, 0.5, cfg)
    w = complex(1.0 - 1.0 / n)
    it = 0
    for it in range(1, max_steps + 1):
        g, dg, _, _, _, _ = _parts(seq, k, w, cfg)
        step = g / dg
        for _ in range(9):
            nw = w - step
            if nw != 0 and lo <= math.log(abs(nw)) <= hi:
                break
            step *= 0.5
        else:
            raise LeftAnnulus(f"Newton iterate left B_{k} (w = {w - step!r})")
        w = nw
        if abs(step) < 1e-13:
            break
    else:
        raise NoConvergence(f"Newton did not converge at k = {k} after {max_steps} steps")
    # polish with w = 1 - 1/(n + E(w)/m_k); the map is a strong contraction here
    for _ in range(5):
        _, _, E, _, _, _ = _parts(seq, k, w, cfg)
        nw = 1.0 - 1.0 / (n + E / mk)
        done = abs(nw - w) <= 1e-16 * abs(w)
        w = nw
        if done:
            break
    _, _, E, _, _, _ = _parts(seq, k, w, cfg)
    delta = E / mk
    cp = _finish(seq, k, k, w, cfg, it, "newton", delta.real, delta.imag)
    if check_unique:
        cp = _with_unique(cp, critical_count(seq, k, cfg) == 1 if seq.has(k - 1) else None)
    return cp


def _with_unique(cp, flag):
    d = dict(cp.__dict__)
    d["unique"] = flag
    return CriticalPoint(**d)


def _real_g(seq, base, w, cfg, log_w=None):
    lw = complex(math.log(w) if log_w is None else log_w)
    g, _, _ = logderiv(seq, base, lw, cfg)
    return float(g[0].real)


def locate_bisect(seq: ZeroSequence, base: int, w_lo: float, w_hi: float,
                  cfg: EvalConfig = DEFAULT, k: int | None = None) -> CriticalPoint:
    """Bisection for a sign change of real z f'/f on w in [w_lo, w_hi] (real, positive)."""
    g_lo = _real_g(seq, base, w_lo, cfg)
    g_hi = _real_g(seq, base, w_hi, cfg)
    if not (g_lo > 0 > g_hi or g_lo < 0 < g_hi):
        raise BracketFailed(f"no sign change on [{w_lo!r}, {w_hi!r}] around a_{base}",
                            values=(g_lo, g_hi))
    s_lo = g_lo > 0
    it = 0
    while w_hi - w_lo > 1e-13 * w_hi and it < 200:
        mid = 0.5 * (w_lo + w_hi)
        gm = _real_g(seq, base, mid, cfg)
        if gm == 0:
            w_lo = w_hi = mid
            break
        if (gm > 0) == s_lo:
            w_lo = mid
        else:
            w_hi = mid
        it += 1
    w = 0.5 * (w_lo + w_hi)
    return _finish(seq, base if k is None else k, base, w, cfg, it, "bisection")


def thm2_bracket(seq: ZeroSequence, j: int) -> tuple:
    """w-coordinates of x_j = q_{j-1}/(2 q_j) a_j and y_j = 2 q_{j-1}/q_j a_j."""
    if seq.kind != "theorem2":
        raise ValidationError("bracket defined for theorem2 families")
    if j < 1 or not seq.has(j):
        raise ValidationError(f"bracket index {j} outside [1, {seq.last}]")
    q0, q1 = seq.m(j - 1), seq.m(j)
    return float(Fraction(q0, 2 * q1)), float(Fraction(2 * q0, q1))


def thm2_bracket_signs(seq: ZeroSequence, j: int, cfg: EvalConfig = DEFAULT) -> tuple:
    """Real z f'/f at x_j and y_j."""
    x, y = thm2_bracket(seq, j)
    return _real_g(seq, j, x, cfg), _real_g(seq, j, y, cfg)


def locate_thm2(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT) -> CriticalPoint:
    """c_k by bisection on (x_{k+1}, y_{k+1}); returned with base k+1."""
    x, y = thm2_bracket(seq, k + 1)
    try:
        return locate_bisect(seq, k + 1, x, y, cfg, k=k)
    except BracketFailed as exc:
        gx, gy = exc.values
        if gx > 0 > gy:
            raise
        raise BracketFailed(f"sign conditions fail at k = {k}: g(x) = {gx:.6g}, g(y) = {gy:.6g}",
                            values=(gx, gy)) from None


def locate(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT) -> CriticalPoint:
    if seq.kind == "theorem2":
        return locate_thm2(seq, k, cfg)
    return locate_thm4(seq, k, cfg)


def critical_value_ratio(seq: ZeroSequence, cp: CriticalPoint) -> float:
    """log|f(c_k)|/r_{k+1} minus the log of its predicted asymptotic constant."""
    kind = seq.kind
    k = cp.k
    if kind in ("theorem4", "baker1976"):
        spec = seq.family
        pred = spec.C.log_mod - math.log(2.0) - 1.0 - math.log(k) - spec.p_rule.log_value(k)
    elif kind == "baker1988":
        pred = -math.log(4.0 * math.e * k)
    else:
        raise ValidationError(f"no asymptotic critical value for kind {kind!r}")
    return cp.ratio_next - pred


def critical_count(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT) -> int:
    """Zeros of f' in B_k that are not zeros of f, by the argument principle on z f'/f."""
    lo, hi = search_band(seq, k)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("B_k needs both neighbouring zeros")
    t = circle_angles(cfg.samples)
    turns = []
    for rel in (lo, hi):
        lw = rel + 1j * (np.append(t, 2 * math.pi) - seq.th(k))
        g, _, _ = logderiv(seq, k, lw, cfg)
        steps = np.diff(np.angle(g))
        steps = (steps + math.pi) % (2 * math.pi) - math.pi
        turns.append(steps.sum() / (2 * math.pi))
    # g has one simple pole in B_k (at a_k)
    return int(round(turns[1] - turns[0])) + 1


def sign_changes(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT, n: int = 256) -> int:
    """Sign changes of real z f'/f between |a_k| and |a_{k+1}| on the ray of the zeros.

    Samples are log-spaced in the distance (in log |z|) from the nearer
    endpoint, so structure next to either zero is resolved however far
    apart the two zeros are.
    """
    gap = seq.L(k + 1) - seq.L(k)
    d = np.geomspace(1e-6, 0.5 * gap, n // 2)
    vals = [_real_g(seq, k, None, cfg, log_w=x) for x in d]
    vals += [_real_g(seq, k + 1, None, cfg, log_w=-x) for x in d[::-1]]
    s = np.sign(vals)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def critical_csv(points) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["k", "base", "re_w", "im_w", "delta_k", "delta_imag", "log_fc", "ratio_next", "residual"])
    for cp in points:
        wr.writerow([cp.k, cp.base, repr(cp.w.real), repr(cp.w.imag), repr(cp.delta_k),
                     repr(cp.delta_imag), repr(cp.log_fc), repr(cp.ratio_next), repr(cp.residual)])
    return buf.getvalue()
