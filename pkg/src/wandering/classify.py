"""Windowed evidence for connectivity, uniform perfectness and boundary clustering.

Limits cannot be computed, so every verdict is read off a finite window of
k with an explicit relative margin and is labelled as evidence.  Two
independent signals are combined: the sequence k P_k against the threshold
T = |C|/(2e), and the ring geometry of the critical values f(c_k).
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .critical import CriticalPoint, locate
from .errors import DegenerateAnnulus, MissingCriticalPoint, ValidationError, WanderingError
from .evaluator import DEFAULT, EvalConfig
from .families import ZeroSequence
from .geometry import RoundAnnulus, annulus_modulus
from .verify import find_epsilon

TWO_PI = 2.0 * math.pi
LOG4 = math.log(4.0)


@dataclass(frozen=True)
class SeparatingAnnulus:
    k: int                 # index of the domain containing the annulus
    log_inner: float
    log_outer: float
    modulus: float
    denominator: int       # n - m for the preceding domain
    shape: str

    def __post_init__(self):
        if not self.modulus > 0:
            raise DegenerateAnnulus(f"annulus at k = {self.k} has modulus {self.modulus!r}")

    @property
    def criterion(self) -> float:
        return self.modulus / self.denominator


@dataclass
class Classification:
    threshold: float | None
    kp_stats: dict | None
    connectivity: str
    uniformly_perfect: str
    moduli: list
    counts: list
    clustering: str
    evidence: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "kp_stats": self.kp_stats,
                "connectivity": self.connectivity, "uniformly_perfect": self.uniformly_perfect,
                "moduli": [list(m) for m in self.moduli], "counts": [list(c) for c in self.counts],
                "clustering": self.clustering, "evidence": dict(self.evidence),
                "geometry": dict(self.geometry), "notes": list(self.notes)}


# ---------------------------------------------------------------------------
# counts

def m_count(seq: ZeroSequence, k: int) -> int:
    """Zeros in |z| <= r_k with multiplicity."""
    return seq.origin_mult + sum(seq.mult[: seq.pos(k) + 1])


def zero_counts(seq: ZeroSequence, k: int, eps_seq, crit) -> tuple:
    """(l_k, m_k, n_k) in the ring model; n_k counts zeros through index k+1."""
    m = m_count(seq, k)
    n = m_count(seq, k + 1)
    kind = seq.kind
    ck = k + 1 if kind == "baker1988" else k
    if ck not in crit:
        raise MissingCriticalPoint(f"no critical point for k = {ck}")
    cp = crit[ck]
    if kind == "theorem2":
        # c_k is stored relative to a_{k+1}; compare with 4 a_{k+1} directly
        l = int(cp.log_fc - seq.L(k + 1) >= LOG4)
    elif kind == "baker1988":
        l = int(cp.log_fc >= 2.0 * seq.L(k + 1))
    else:
        eps = eps_seq.get(k + 1)
        if eps is None:
            raise MissingCriticalPoint(f"no epsilon for k = {k + 1}")
        l = int(cp.ratio_next >= math.log1p(eps))
    return l, m, n


# ---------------------------------------------------------------------------
# separating annuli

def separating_annulus(seq: ZeroSequence, k: int, crit, eps_seq) -> SeparatingAnnulus:
    """The annulus whose modulus feeds the non-uniform-perfectness criterion at k."""
    kind = seq.kind
    if kind == "theorem2":
        qk, qk1 = seq.m(k), seq.m(k + 1)
        # ann(4 a_{k+1}, sqrt(a_{k+2})):  log radii q_k + log 4 and q_{k+1}/2
        width = (qk1 / 2 - LOG4 - qk)
        a = RoundAnnulus(seq.L(k + 1) + LOG4, seq.L(k + 1) + LOG4 + width)
        return SeparatingAnnulus(k + 1, a.log_inner, a.log_outer, width / TWO_PI, qk1, "sqrt")
    cp = crit.get(k + 1 if kind == "baker1988" else k)
    if cp is None:
        raise MissingCriticalPoint(f"no critical point for k = {k}")
    if kind == "baker1988":
        L1 = seq.L(k + 1)
        width = cp.log_fc - 2.0 * L1
        return SeparatingAnnulus(k + 1, 2.0 * L1, cp.log_fc, width / TWO_PI,
                                 seq.m(k + 1), "square")
    phi = cp.ratio_next
    e1 = eps_seq.get(k + 1)
    if e1 is None:
        raise MissingCriticalPoint(f"no epsilon for k = {k + 1}")
    if phi > math.log1p(e1):
        # f(c_k) beyond ring k+1's inner circle: ann((1+eps_{k+1}) r_{k+1}, |f(c_k)|)
        width = phi - math.log1p(e1)
        return SeparatingAnnulus(k + 1, seq.L(k + 1) + math.log1p(e1), cp.log_fc,
                                 width / TWO_PI, seq.m(k + 1), "critical_value")
    e0 = eps_seq.get(k)
    if e0 is None:
        raise MissingCriticalPoint(f"no epsilon for k = {k}")
    # f(c_k) stays in ring k: ann((1+eps_k) r_k, min(k r_k, |f(c_k)|))
    rel_fc = phi + (seq.L(k + 1) - seq.L(k))
    outer = min(math.log(k), rel_fc)
    width = outer - math.log1p(e0)
    return SeparatingAnnulus(k, seq.L(k) + math.log1p(e0), seq.L(k) + outer,
                             width / TWO_PI, seq.m(k), "k_r_k")


def diverging(values) -> bool:
    """Windowed test for an unbounded increasing sequence.

    Needs the last five values strictly increasing and either a doubling
    over the median or growth at least half of (log k)/(2 pi) between the
    median and the last entry; the second form catches logarithmic growth.
    """
    if len(values) < 6:
        return False
    ks = np.array([k for k, _ in values], dtype=float)
    v = np.array([x for _, x in values])
    if not np.all(np.diff(v[-5:]) > 0):
        return False
    mid = len(v) // 2
    med = float(np.median(v))
    if v[-1] > 2.0 * med:
        return True
    return v[-1] - v[mid] >= math.log(ks[-1] / ks[mid]) / (4.0 * math.pi)


def separating_annuli(seq, crit, eps_seq, window) -> tuple:
    """(annuli, degenerate indices, diverging flag) over the window."""
    out, bad = [], []
    for k in range(window[0], window[1] + 1):
        try:
            out.append(separating_annulus(seq, k, crit, eps_seq))
        except DegenerateAnnulus:
            bad.append(k)
        except MissingCriticalPoint:
            continue
    crit_vals = [(a.k, a.criterion) for a in out]
    return out, bad, diverging(crit_vals)


# ---------------------------------------------------------------------------
# k P_k evidence

def kp_values(seq: ZeroSequence, window) -> np.ndarray:
    p = seq.family.p_rule
    return np.array([k * p.value(k) for k in range(window[0], window[1] + 1)])


def _kp_evidence(kp, T, margin):
    tail = kp[len(kp) // 2:]
    strictly_dec = bool(np.all(np.diff(tail) < 0))
    inf_zero = bool(kp[-1] < kp[0] / 10.0 and strictly_dec)
    return {
        "above_sup": bool(tail.max() > T * (1 + margin)),
        "below_inf": bool(tail.min() < T * (1 - margin)),
        "below_sup": bool(tail.max() < T * (1 - margin)),
        "above_inf": bool(tail.min() > T * (1 + margin)),
        "inf_zero": inf_zero,
        "inf_positive": bool(tail.min() > 0 and not inf_zero),
    }


def _kp_stats(kp, window):
    ks = np.arange(window[0], window[1] + 1, dtype=float)
    slope = float(np.polyfit(ks, kp, 1)[0])
    return {"min": float(kp.min()), "max": float(kp.max()), "first": float(kp[0]),
            "last": float(kp[-1]), "slope": slope}


def clustering(seq: ZeroSequence, crit, window, margin: float = 0.1) -> str:
    """Which boundary component (inner or outer) is isolated, from the k P_k tail."""
    if seq.kind == "theorem2":
        return "inner_isolated"
    if seq.kind not in ("theorem4", "baker1976"):
        return "inconclusive"
    T = math.exp(seq.family.C.log_mod) / (2.0 * math.e)
    ev = _kp_evidence(kp_values(seq, window), T, margin)
    if ev["below_sup"]:
        return "outer_isolated"
    if ev["above_inf"]:
        return "inner_isolated"
    if ev["above_sup"] and ev["below_inf"]:
        return "neither"
    return "inconclusive"


def ring_landing(seq, crit, eps_seq, ks) -> dict:
    """Where the critical values land: ring k, ring k+1, or neither."""
    res = {"ring_k": [], "ring_k1": [], "between": []}
    for k in ks:
        cp = crit.get(k)
        e1 = eps_seq.get(k + 1)
        if cp is None or e1 is None:
            continue
        phi = cp.ratio_next
        if phi < math.log1p(-e1):
            res["ring_k"].append(k)
        elif math.log1p(e1) < phi < seq.L(k + 2) - seq.L(k + 1) - math.log(2.0):
            res["ring_k1"].append(k)
        else:
            res["between"].append(k)
    return res


# ---------------------------------------------------------------------------
# sweep helpers

def sweep(seq: ZeroSequence, ks, cfg: EvalConfig = DEFAULT, threads: int = 1,
          epsilon: bool = True) -> tuple:
    """Critical points and epsilons for the indices ks (ordered, deterministic)."""
    ks = list(ks)

    def one(k):
        try:
            cp = locate(seq, k, cfg)
        except WanderingError:
            cp = None
        eps = find_epsilon(seq, k, cfg) if epsilon and seq.kind in ("theorem4", "baker1976") else None
        return k, cp, eps

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, ks))
    else:
        rows = [one(k) for k in ks]
    crit = {k: cp for k, cp, _ in rows if cp is not None}
    eps = {k: e for k, _, e in rows if e is not None}
    return crit, eps


def trichotomy(seq: ZeroSequence, window, margin: float = 0.1, *, crit=None, eps=None,
               cfg: EvalConfig = DEFAULT, threads: int = 1) -> Classification:
    k_lo, k_hi = window
    if k_lo > k_hi:
        raise ValidationError("empty window")
    # the k P_k statistics need a real window; theorem2 families run out of
    # floating range after a handful of indices
    if seq.kind != "theorem2" and k_hi - k_lo + 1 < 20:
        raise ValidationError("window must contain at least 20 indices")
    if not 0 < margin < 0.5:
        raise ValidationError("margin must lie in (0, 0.5)")
    if crit is None or eps is None:
        c2, e2 = sweep(seq, range(k_lo, min(k_hi + 1, seq.last - 2) + 1), cfg, threads)
        crit = c2 if crit is None else crit
        eps = e2 if eps is None else eps
    counts, notes = [], []
    for k in range(k_lo, k_hi + 1):
        try:
            l, m, n = zero_counts(seq, k, eps, crit)
        except MissingCriticalPoint as exc:
            notes.append(f"k = {k}: {exc}")
            continue
        counts.append((k, l, m, n))
    annuli, degenerate, div = separating_annuli(seq, crit, eps, window)
    moduli = [(a.k, a.criterion) for a in annuli]
    geom = {"degenerate": degenerate, "diverging": div,
            "shapes": sorted({a.shape for a in annuli})}
    tail = range(k_lo + (k_hi - k_lo + 1) // 2, k_hi + 1)

    if seq.kind in ("theorem4", "baker1976"):
        T = math.exp(seq.family.C.log_mod) / (2.0 * math.e)
        kp = kp_values(seq, window)
        ev = _kp_evidence(kp, T, margin)
        land = ring_landing(seq, crit, eps, tail)
        geom.update({key: len(v) for key, v in land.items()})
        geo_k = len(land["ring_k"]) > 0
        geo_k1 = len(land["ring_k1"]) > 0
        ev["geometry_ring_k"] = geo_k
        ev["geometry_ring_k1"] = geo_k1
        conn = "inconclusive"
        if (ev["above_sup"] and geo_k) or (ev["below_inf"] and geo_k1):
            conn = "infinite"
        elif ev["above_sup"] or ev["below_inf"]:
            notes.append("k P_k evidence not matched by the critical-value geometry")
        up = "inconclusive"
        if (ev["above_sup"] or ev["inf_zero"]) and div:
            up = "no"
        elif ev["below_sup"] and ev["inf_positive"] and not div and not ev["above_sup"]:
            up = "yes"
        clus = clustering(seq, crit, window, margin)
        return Classification(T, _kp_stats(kp, window), conn, up, moduli, counts, clus,
                               ev, geom, notes)

    # theorem2 and baker1988: the k P_k trichotomy does not apply; use the geometry
    ls = [c[1] for c in counts]
    ev = {"critical_values_in_next_domain": bool(ls) and all(ls)}
    conn = "infinite" if ev["critical_values_in_next_domain"] else "inconclusive"
    vals = np.array([v for _, v in moduli])
    if div:
        up = "no"
    elif len(vals) >= 6 and vals[len(vals) // 2:].min() > 0 and not div:
        ev["criterion_lower_bound"] = float(vals[len(vals) // 2:].min())
        up = "yes"
    else:
        up = "inconclusive"
    return Classification(None, None, conn, up, moduli, counts, clustering(seq, crit, window, margin),
                          ev, geom, notes)


def classification_csv(seq: ZeroSequence, cls: Classification) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "kP_k", "l", "m", "n", "criterion"])
    crit = dict(cls.moduli)
    for k, l, m, n in cls.counts:
        kp = k * seq.family.p_rule.value(k) if seq.kind in ("theorem4", "baker1976") else math.nan
        w.writerow([k, repr(kp), l, m, n, repr(crit.get(k, crit.get(k + 1, math.nan)))])
    return buf.getvalue()
