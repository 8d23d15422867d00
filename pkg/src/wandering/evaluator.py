"""Evaluation of log f and z f'/f at scaled points z = w a_k.

Around a base zero a_k the product splits as

    log f(w a_k) = anchor_k + M_k log w + c_k + sum_j m_j h_j(w)

with M_k = N + sum_{j<k} m_j, a constant phase c_k and h_j = log(1 - a_j/z)
for zeros below the base, log(1 - z/a_j) for the others.  Every h_j is
O(1) or tiny, so the only large number is the real anchor, which never
takes part in a subtraction.  Points are described by (base, log w), so
|w| itself may be far outside the double range.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (CountUnreliable, FamilyOverflowError, HorizonError, PoleError,
                     RadiusOnZero, RebaseError, ValidationError)
from .families import ZeroSequence
from .logspace import TWO_PI, LogComplex, cexpm1, log1mexp_array

BAND = (1e-3, 1e3)
HEAD_TOL = 1e-20


@dataclass(frozen=True)
class EvalConfig:
    tail_tol: float = 1e-12
    samples: int = 4096

    def __post_init__(self):
        if not 0 < self.tail_tol <= 1e-6:
            raise ValidationError("tail_tol must lie in (0, 1e-6]")
        s = self.samples
        if int(s) != s or s < 256 or s & (s - 1):
            raise ValidationError("samples must be a power of two >= 256")


DEFAULT = EvalConfig()


@dataclass(frozen=True)
class ScaledPoint:
    """The point z = w * a_{base_k}."""

    base_k: int
    w: complex

    def __post_init__(self):
        w = complex(self.w)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)) or w == 0:
            raise ValidationError("w must be finite and nonzero")
        object.__setattr__(self, "w", w)

    @property
    def log_w(self) -> complex:
        return cmath.log(self.w)

    @property
    def in_band(self) -> bool:
        return BAND[0] <= abs(self.w) <= BAND[1]


@dataclass(frozen=True)
class Frame:
    """Everything needed to evaluate near one base, for Re log w in [lo, hi]."""

    base: int | None
    L: float
    theta: float
    M: float
    const: complex
    shift: np.ndarray
    mult: np.ndarray
    below: np.ndarray
    anchor: float
    gap: float
    log_bound: float     # log of the truncation bound (-inf if nothing dropped)

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound) if self.log_bound > -math.inf else 0.0


def _phase(m, dtheta):
    """m * (dtheta + pi) reduced mod 2 pi, exact for integer m and dtheta = 0."""
    t = math.pi if m % 2 else 0.0
    if dtheta:
        t += math.fmod(float(m) * dtheta, TWO_PI)
    return t


def frame(seq: ZeroSequence, base, lo: float, hi: float, tail_tol: float = 1e-12,
          head_tol: float = HEAD_TOL) -> Frame:
    """Build (and cache) the evaluation frame for base ``base`` (an index or None).

    ``lo``/``hi`` bound Re log w of every point that will be evaluated; they
    decide which factors are negligible.  ``base=None`` means the reference
    point 1, i.e. w = z.
    """
    key = (base, lo, hi, tail_tol, head_tol)
    fr = seq._frames.get(key)
    if fr is not None:
        return fr
    if base is None:
        Lb, tb = 0.0, 0.0
        split = int(np.searchsorted(seq.log_r, 0.0, side="left"))
        c = seq.constant.log_mod
        anchor = c + sum(float(m) * (-L) for m, L in zip(seq.mult_f[:split], seq.log_r[:split]))
        gap = math.nan
    else:
        p = seq.pos(base)
        Lb, tb = float(seq.log_r[p]), float(seq.theta[p])
        split = p
        anchor = float(seq.anchor[p])
        gap = float(seq.gap[p])
    if not math.isfinite(anchor):
        raise FamilyOverflowError(f"anchor at index {base} exceeds the double range", index=base)
    M = float(seq.origin_mult)
    const = seq.constant.arg + seq.origin_mult * tb
    shift, mult, below = [], [], []
    log_bound = -math.inf
    log_head = math.log(head_tol) if head_tol > 0 else -math.inf
    for i in range(split):
        d = Lb - float(seq.log_r[i])
        m = seq.mult[i]
        mf = float(seq.mult_f[i])
        M += mf
        const += _phase(m, tb - float(seq.theta[i]))
        # |a_j / z| <= exp(-(lo + d)); the factor is log(1 - a_j/z)
        lm = math.log(mf) - (lo + d) + math.log(2.0)
        if lm < log_head:
            log_bound = np.logaddexp(log_bound, lm)
            continue
        shift.append(complex(d, tb - float(seq.theta[i])))
        mult.append(mf)
        below.append(True)
    if not math.isfinite(M):
        raise FamilyOverflowError(f"multiplicity sum below index {base} overflows", index=base)
    log_tol = math.log(tail_tol)
    n = len(seq.log_r)
    for i in range(split, n):
        d = Lb - float(seq.log_r[i])
        if hi + d < log_tol and not (base is not None and i == split):
            lb = math.log(2.0) + math.log(seq.mult[i]) + hi + d
            log_bound = np.logaddexp(log_bound, lb)
            break
        mf = float(seq.mult_f[i])
        if not math.isfinite(mf):
            raise FamilyOverflowError(f"multiplicity of zero {seq.first + i} exceeds the double range",
                                      index=seq.first + i)
        shift.append(complex(d, tb - float(seq.theta[i])))
        mult.append(mf)
        below.append(False)
    else:
        if seq.family is not None and math.isfinite(hi):
            raise HorizonError(f"evaluation near index {base} needs zeros beyond index {seq.last}",
                               index=seq.last + 1)
    fr = Frame(base, Lb, tb, M, complex(0.0, math.fmod(const, TWO_PI)),
               np.array(shift, dtype=complex), np.array(mult, dtype=float),
               np.array(below, dtype=bool), anchor, gap, float(log_bound))
    if len(seq._frames) > 4096:
        seq._frames.clear()
    seq._frames[key] = fr
    return fr


def offsets(fr: Frame, log_w) -> np.ndarray:
    """log f(w a_base) - anchor, for an array of log w."""
    log_w = np.asarray(log_w, dtype=complex)
    s = kernels.factor_sum(log_w, fr.shift, fr.mult, fr.below)
    re = fr.M * log_w.real + s.real
    im = fr.M * log_w.imag + fr.const.imag + s.imag
    return re + 1j * im


def log_f(seq: ZeroSequence, base, log_w, cfg: EvalConfig = DEFAULT):
    """(anchor, offsets, truncation bound) for points w a_base, any |w|."""
    lw = np.atleast_1d(np.asarray(log_w, dtype=complex))
    fr = frame(seq, base, float(lw.real.min()), float(lw.real.max()), cfg.tail_tol)
    return fr.anchor, offsets(fr, lw), fr.bound


def logderiv(seq: ZeroSequence, base, log_w, cfg: EvalConfig = DEFAULT, head_tol: float = 0.0):
    """(z f'/f, w d/dw (z f'/f), frame) at points w a_base.  No head terms are dropped by default."""
    lw = np.atleast_1d(np.asarray(log_w, dtype=complex))
    fr = frame(seq, base, float(lw.real.min()), float(lw.real.max()), cfg.tail_tol, head_tol)
    g, dg = kernels.logderiv_sum(lw, fr.shift, fr.mult, fr.below)
    return fr.M + g, dg, fr


def nearest_base(seq: ZeroSequence, log_mod: float) -> int:
    """Index whose |a_k| is nearest to e^log_mod on the log scale."""
    L = seq.log_r
    i = int(np.searchsorted(L, log_mod))
    if i == 0:
        return seq.first
    if i >= len(L):
        return seq.last
    return seq.first + (i if L[i] - log_mod < log_mod - L[i - 1] else i - 1)


def rebase(seq: ZeroSequence, base: int, log_w: complex) -> tuple:
    """Move (base, log w) to the nearest base, using only differences of log r."""
    b = base
    x = log_w.real
    while True:
        if b < seq.last and x > 0.5 * (seq.L(b + 1) - seq.L(b)):
            x -= seq.L(b + 1) - seq.L(b)
            b += 1
        elif b > seq.first and x < -0.5 * (seq.L(b) - seq.L(b - 1)):
            x += seq.L(b) - seq.L(b - 1)
            b -= 1
        else:
            break
    y = log_w.imag + seq.th(base) - seq.th(b)
    return b, complex(x, y)


@dataclass(frozen=True)
class FValue:
    value: LogComplex
    bound: float
    base: int
    anchor: float
    offset: complex


def eval_f(seq: ZeroSequence, p: ScaledPoint, cfg: EvalConfig = DEFAULT) -> FValue:
    """log f at z = w a_base; the result carries the truncation bound."""
    b, lw = rebase(seq, p.base_k, p.log_w)
    if not BAND[0] <= math.exp(lw.real) <= BAND[1]:
        raise RebaseError(f"|w| = {math.exp(lw.real):.3g} outside [1e-3, 1e3] after rebasing to {b}")
    anchor, o, bound = log_f(seq, b, lw, cfg)
    o = complex(o[0])
    if o.real == -math.inf:
        return FValue(LogComplex(-math.inf), bound, b, anchor, o)
    return FValue(LogComplex(anchor + o.real, o.imag), bound, b, anchor, o)


def eval_logderiv(seq: ZeroSequence, p: ScaledPoint, cfg: EvalConfig = DEFAULT) -> complex:
    """z f'(z)/f(z) at the scaled point."""
    b, lw = rebase(seq, p.base_k, p.log_w)
    if not BAND[0] <= math.exp(lw.real) <= BAND[1]:
        raise RebaseError(f"|w| = {math.exp(lw.real):.3g} outside [1e-3, 1e3] after rebasing to {b}")
    check_pole(seq, b, lw)
    g, _, _ = logderiv(seq, b, lw, cfg)
    return complex(g[0])


def check_pole(seq: ZeroSequence, base: int, lw: complex):
    for j in (base - 1, base, base + 1):
        if seq.has(j):
            u = lw + complex(seq.L(base) - seq.L(j), seq.th(base) - seq.th(j))
            if abs(u.real) < 1 and abs(cexpm1(u)) < 1e-14:
                raise PoleError(f"point coincides with zero {j}")


@dataclass(frozen=True)
class CircleExtrema:
    min_log: float
    max_log: float
    samples: int
    sample_gap: float
    base: int | None
    min_offset: float
    max_offset: float
    gap: float           # log r_{base+1} - anchor (nan if unknown)
    bound: float

    @property
    def min_rel(self) -> float:
        """min log|f| - log r_{base+1}."""
        return self.min_offset - self.gap

    @property
    def max_rel(self) -> float:
        return self.max_offset - self.gap


def circle_angles(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def circle_extrema_rel(seq: ZeroSequence, base, rel: float, cfg: EvalConfig = DEFAULT) -> CircleExtrema:
    """Extrema of log|f| on |z| = e^rel |a_base|, sampled at cfg.samples angles."""
    n = cfg.samples
    tb = 0.0 if base is None else seq.th(base)
    lw = rel + 1j * (circle_angles(n) - tb)
    anchor, o, bound = log_f(seq, base, lw, cfg)
    re = o.real
    lo, hi = float(re.min()), float(re.max())
    with np.errstate(invalid="ignore"):
        steps = np.abs(np.diff(np.append(re, re[0])))
    sgap = float(steps.max()) if np.all(np.isfinite(re)) else math.inf
    gap = math.nan if base is None else float(seq.gap[seq.pos(base)])
    return CircleExtrema(anchor + lo, anchor + hi, n, sgap, base, lo, hi, gap, bound)


def circle_extrema(seq: ZeroSequence, log_radius: float, cfg: EvalConfig = DEFAULT) -> CircleExtrema:
    """Extrema of log|f| on the circle |z| = e^log_radius."""
    if len(seq) == 0:
        return circle_extrema_rel(seq, None, log_radius, cfg)
    b = nearest_base(seq, log_radius)
    return circle_extrema_rel(seq, b, log_radius - seq.L(b), cfg)


def _winding(u_re: float, theta: float, n: int) -> float:
    """Unwrapped turn count of 1 - e^{u_re + i(t - theta)} as t runs once round."""
    while True:
        t = circle_angles(n)
        h = log1mexp_array(u_re + 1j * (np.append(t, TWO_PI) - theta))
        steps = np.diff(h.imag)
        steps = (steps + math.pi) % TWO_PI - math.pi
        if np.abs(steps).max() <= 0.5 * math.pi:
            return float(steps.sum()) / TWO_PI
        n *= 2
        if n > 1 << 24:
            raise CountUnreliable(f"argument steps stay above pi/2 at {n >> 1} samples")


def zero_count(seq: ZeroSequence, log_radius: float, cfg: EvalConfig = DEFAULT) -> int:
    """Zeros of f inside |z| = e^log_radius by the argument principle.

    The argument of f is the sum of the arguments of its factors, so the
    total variation is accumulated factor by factor and each factor's
    winding is weighted by its (exact integer) multiplicity.
    """
    L = seq.log_r
    if len(L) and np.min(np.abs(L - log_radius)) < 1e-6:
        raise RadiusOnZero(f"log radius {log_radius!r} is within 1e-6 of a zero modulus")
    if len(L) and log_radius > L[-1]:
        raise HorizonError("radius beyond the generated zeros", index=seq.last + 1)
    total = seq.origin_mult       # z^N turns N times
    for i in range(len(L)):
        u = log_radius - float(L[i])
        if u < -40.0:
            break   # |z/a_j| < e^-40: argument variation below 1e-17
        wind = _winding(u, float(seq.theta[i]), cfg.samples)
        k = round(wind)
        if abs(wind - k) >= 0.01:
            raise CountUnreliable(f"factor {seq.first + i} winds {wind:.4f} times")
        total += seq.mult[i] * int(k)
    return total
