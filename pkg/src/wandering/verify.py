"""Sampled checks of the ring-mapping inclusions.

Each check reduces an annulus inclusion to lower/upper bounds for |f| on the
two boundary circles (no zeros lie inside, so the minimum and maximum
principles apply) and reports the bounds as margins in log units.  A check
passes when every margin is positive and larger than the largest jump of
log|f| between adjacent samples on the circle it was measured on.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .critical import locate_thm2, locate_thm4, thm2_bracket
from .errors import BracketFailed, SkippedSmallK, ValidationError, WanderingError
from .evaluator import DEFAULT, EvalConfig, circle_extrema_rel, nearest_base
from .families import ZeroSequence

LOG2 = math.log(2.0)
LOG4 = math.log(4.0)
EPS_GRID = (0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10, 0.05, 0.02, 0.01)


@dataclass(frozen=True)
class RingVerification:
    k: int
    epsilon: float | None
    margins: dict
    sample_gap: float
    passed: bool
    kind: str = "theorem4"
    sampled: dict = field(default_factory=dict)   # margin name -> gap of its circle
    extras: dict = field(default_factory=dict)

    @property
    def min_margin(self) -> float:
        return min(self.margins.values())

    def to_dict(self) -> dict:
        return {"k": self.k, "epsilon": self.epsilon, "kind": self.kind,
                "margins": dict(self.margins), "sample_gap": self.sample_gap,
                "pass": self.passed, "extras": dict(self.extras)}


def _judge(margins, sampled):
    """Every margin positive; sampled ones also above the sample gap of their circle."""
    ok = all(m > 0 for m in margins.values())
    return ok and all(margins[name] > g for name, g in sampled.items())


def verify_ring_thm4(seq: ZeroSequence, k: int, epsilon: float,
                     cfg: EvalConfig = DEFAULT) -> RingVerification:
    """Bounds on |z| = (1 +- eps) r_k:  |f| >= 2 r_{k+1} and <= r_{k+2}/2 outside,
    |f| <= r_{k+1}/2 and >= 2 r_k inside."""
    if not 0 < epsilon <= 0.5:
        raise ValidationError(f"epsilon must lie in (0, 1/2], got {epsilon!r}")
    if not (seq.has(k - 1) and seq.has(k + 2)):
        raise SkippedSmallK(f"k = {k} needs zeros k-1 .. k+2")
    lo, hi = math.log1p(-epsilon), math.log1p(epsilon)
    if seq.L(k - 1) - seq.L(k) >= lo or seq.L(k + 1) - seq.L(k) <= hi:
        raise SkippedSmallK(f"circles (1 +- {epsilon}) r_{k} reach a neighbouring zero")
    outer = circle_extrema_rel(seq, k, hi, cfg)
    inner = circle_extrema_rel(seq, k, lo, cfg)
    d1 = seq.L(k + 1) - seq.L(k)
    d2 = seq.L(k + 2) - seq.L(k + 1)
    margins = {
        "m_e": outer.min_rel - LOG2,
        "m_f": -LOG2 - inner.max_rel,
        "m_g": inner.min_rel + d1 - LOG2,
        "m_h": d2 - LOG2 - outer.max_rel,
    }
    gap = max(outer.sample_gap, inner.sample_gap)
    sampled = {"m_e": outer.sample_gap, "m_f": inner.sample_gap,
               "m_g": inner.sample_gap, "m_h": outer.sample_gap}
    return RingVerification(k, epsilon, margins, gap, _judge(margins, sampled),
                            kind=seq.kind, sampled=sampled)


def find_epsilon(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT, grid=EPS_GRID):
    """Smallest grid epsilon whose verification passes, or None."""
    best = None
    for eps in grid:
        try:
            ok = verify_ring_thm4(seq, k, eps, cfg).passed
        except SkippedSmallK:
            ok = False
        if ok and (best is None or eps < best):
            best = eps
    return best


def verify_thm2(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT) -> RingVerification:
    """f(ann(4a_k, a_{k+1}/4)) in ann(4a_{k+1}, a_{k+2}/4), the sqrt-annulus version,
    the bracket for c_k, and sqrt(a_{k+2}) < f(c_k) < a_{k+2}/4."""
    if seq.kind != "theorem2":
        raise ValidationError("verify_thm2 needs a theorem2 family")
    if not seq.has(k + 2):
        raise SkippedSmallK(f"k = {k} needs a_{k + 2}")
    qk, qk1 = seq.m(k), seq.m(k + 1)
    Lk1, Lk2 = seq.L(k + 1), seq.L(k + 2)
    c4 = circle_extrema_rel(seq, k, LOG4, cfg)            # |z| = 4 a_k
    c14 = circle_extrema_rel(seq, k + 1, -LOG4, cfg)      # |z| = a_{k+1}/4
    circles = [c4, c14]
    # log f on each circle relative to log a_{k+1} is offset - gap
    margins = {
        "lo_4ak": c4.min_rel - LOG4,
        "hi_4ak": (Lk2 - Lk1) - LOG4 - c4.max_rel,
        "lo_ak1_4": c14.min_offset + (seq.anchor[seq.pos(k + 1)] - Lk1) - LOG4,
        "hi_ak1_4": (Lk2 - LOG4) - (seq.anchor[seq.pos(k + 1)] + c14.max_offset),
    }
    margins = {n: float(v) for n, v in margins.items()}
    sampled = {"lo_4ak": c4.sample_gap, "hi_4ak": c4.sample_gap,
               "lo_ak1_4": c14.sample_gap, "hi_ak1_4": c14.sample_gap}
    extras = {}
    if k >= 1:
        # |z| = sqrt(a_{k+1}) = e^{q_k/2}, nearest to a_k
        b = nearest_base(seq, qk / 2)
        rel = float(Fraction(qk, 2) - Fraction(seq.L(b)))
        cs = circle_extrema_rel(seq, b, rel, cfg)
        circles.append(cs)
        anchor_b = float(seq.anchor[seq.pos(b)])
        margins["lo_sqrt"] = (anchor_b - Lk1) + cs.min_offset - LOG4
        margins["hi_sqrt"] = Lk2 / 2 - (anchor_b + cs.max_offset)
        margins["hi_4ak_sqrt"] = Lk2 / 2 - (Lk1 - c4.gap + c4.max_offset)
        sampled.update(lo_sqrt=cs.sample_gap, hi_sqrt=cs.sample_gap, hi_4ak_sqrt=c4.sample_gap)
    else:
        extras["sqrt_annulus"] = "empty: 4 a_0 > sqrt(a_1)"
    try:
        cp = locate_thm2(seq, k, cfg)
        x, y = thm2_bracket(seq, k + 1)
        margins["bracket"] = min(math.log(cp.w.real / x), math.log(y / cp.w.real))
        margins["3d"] = min(cp.log_fc - qk1 / 2, qk1 - LOG4 - cp.log_fc)
        extras["log_fc"] = cp.log_fc
        extras["w"] = cp.w.real
    except BracketFailed as exc:
        margins["bracket"] = -math.inf
        margins["3d"] = -math.inf
        extras["bracket_values"] = list(exc.values)
    gap = max(c.sample_gap for c in circles)
    return RingVerification(k, None, margins, gap, _judge(margins, sampled),
                            kind="theorem2", sampled=sampled, extras=extras)


def verify_baker1988(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT) -> RingVerification:
    """f(B_k) in B_{k+1} for B_k = ann(r_k^2, s_k), s_k = (k+1)/(k+2) r_{k+1}."""
    if seq.kind != "baker1988":
        raise ValidationError("verify_baker1988 needs a baker1988 family")
    if not seq.has(k + 3):
        raise SkippedSmallK(f"k = {k} needs r_{k + 3}")
    Lk, Lk1, Lk2 = seq.L(k), seq.L(k + 1), seq.L(k + 2)
    log_s_next = math.log((k + 2) / (k + 3))          # log s_{k+1} - log r_{k+2}
    rel_s = math.log((k + 1) / (k + 2))
    if 2 * Lk >= Lk1 + rel_s:
        raise SkippedSmallK(f"B_{k} is empty: r_k^2 >= s_k")
    b = nearest_base(seq, 2 * Lk)
    inner = circle_extrema_rel(seq, b, 2 * Lk - seq.L(b), cfg)
    outer = circle_extrema_rel(seq, k + 1, rel_s, cfg)
    a_b = float(seq.anchor[seq.pos(b)])
    a_k1 = Lk2 - outer.gap                              # anchor at k+1
    margins = {
        "inner_lo": a_b + inner.min_offset - 2 * Lk1,
        "inner_hi": Lk2 + log_s_next - (a_b + inner.max_offset),
        "outer_lo": a_k1 + outer.min_offset - 2 * Lk1,
        "outer_hi": log_s_next - outer.max_rel,
    }
    sampled = {"inner_lo": inner.sample_gap, "inner_hi": inner.sample_gap,
               "outer_lo": outer.sample_gap, "outer_hi": outer.sample_gap}
    extras = {}
    try:
        cp = locate_thm4(seq, k + 1, cfg)
        lw = math.log(abs(cp.w))
        margins["crit"] = min(rel_s - lw, Lk1 + lw - 2 * Lk)
        extras["crit_imag"] = cp.w.imag
        extras["separation"] = cp.log_fc - 2 * Lk1      # log(|f(c_{k+1})| / r_{k+1}^2)
        extras["critical_value"] = cp.ratio_next + math.log(4 * math.e * (k + 1))
    except WanderingError as exc:
        margins["crit"] = -math.inf
        extras["crit_error"] = str(exc)
    margins["growth"] = math.fsum([Lk1, -2 * Lk, -k * LOG2])
    gap = max(inner.sample_gap, outer.sample_gap)
    return RingVerification(k, None, margins, gap, _judge(margins, sampled),
                            kind="baker1988", sampled=sampled, extras=extras)


def verify_any(seq: ZeroSequence, k: int, cfg: EvalConfig = DEFAULT, epsilon=None):
    """The natural check for the family kind (searching epsilon for theorem4 kinds)."""
    if seq.kind == "theorem2":
        return verify_thm2(seq, k, cfg)
    if seq.kind == "baker1988":
        return verify_baker1988(seq, k, cfg)
    eps = epsilon if epsilon is not None else find_epsilon(seq, k, cfg)
    if eps is None:
        try:
            rv = verify_ring_thm4(seq, k, EPS_GRID[0], cfg)
        except SkippedSmallK:
            return RingVerification(k, None, {}, math.nan, False, kind=seq.kind,
                                    extras={"skipped": True})
        return RingVerification(k, None, rv.margins, rv.sample_gap, False, kind=seq.kind,
                                sampled=rv.sampled, extras={"found": False})
    return verify_ring_thm4(seq, k, eps, cfg)


def summary_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "epsilon", "min_margin", "pass"])
    for r in reports:
        mm = r.min_margin if r.margins else math.nan
        w.writerow([r.k, "" if r.epsilon is None else repr(r.epsilon), repr(mm), int(r.passed)])
    return buf.getvalue()
