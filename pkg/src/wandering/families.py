"""Zero sequences of the four product families, generated in log space.

A family is f(z) = C z^N prod_k (1 - z/a_k)^{m_k} with a_k = r_k e^{i theta_k}.
Besides (log r_k, theta_k, m_k) each sequence stores, per index k,

    anchor_k = log|C| + N log r_k + sum_{j<k} m_j (log r_k - log r_j)
    gap_k    = log r_{k+1} - anchor_k

`anchor_k` is the (possibly astronomically large) real part that the
evaluator factors out around a_k.  `gap_k` is small and, for the recursive
families, is assembled symbolically from O(1) pieces so that
log|f(w a_k)| - log r_{k+1} can be formed without cancelling huge numbers.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FamilyOverflowError, ValidationError
from .logspace import LogComplex

KINDS = ("theorem4", "theorem2", "baker1976", "baker1988")
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class PRule:
    """P_k as a function of k >= 1.

    constant(c): c;  harmonic(c): c/k;  power(c, s): c k^s;  table(v): v[k-1];
    harmonic_cycle(v): v[(k-1) % len(v)] / k.
    """

    kind: str
    c: float = 1.0
    s: float = 0.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic", "power", "table", "harmonic_cycle"):
            raise ValidationError(f"unknown p_rule kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind in ("table", "harmonic_cycle"):
            if not self.values:
                raise ValidationError(f"p_rule {self.kind} needs values")
            if any(not (v > 0 and math.isfinite(v)) for v in self.values):
                raise ValidationError("p_rule values must be positive and finite")
        elif not (self.c > 0 and math.isfinite(self.c)):
            raise ValidationError("p_rule constant must be positive and finite")

    def log_value(self, k: int) -> float:
        if k < 1:
            raise ValueError("P_k is indexed from k = 1")
        if self.kind == "constant":
            return math.log(self.c)
        if self.kind == "harmonic":
            return math.log(self.c) - math.log(k)
        if self.kind == "power":
            return math.log(self.c) + self.s * math.log(k)
        if self.kind == "table":
            if k > len(self.values):
                raise ValidationError(f"p_rule table has no entry for k = {k}")
            return math.log(self.values[k - 1])
        return math.log(self.values[(k - 1) % len(self.values)]) - math.log(k)

    def value(self, k: int) -> float:
        return math.exp(self.log_value(k))

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("table", "harmonic_cycle"):
            d["values"] = list(self.values)
        else:
            d["c"] = self.c
            if self.kind == "power":
                d["s"] = self.s
        return d


@dataclass(frozen=True)
class PhaseRule:
    kind: str = "all_pi"
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("all_pi", "all_zero", "table"):
            raise ValidationError(f"unknown phase_rule kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind == "table" and not self.values:
            raise ValidationError("phase table needs values")

    def theta(self, k: int, first: int = 1) -> float:
        if self.kind == "all_pi":
            return math.pi
        if self.kind == "all_zero":
            return 0.0
        i = k - first
        if i >= len(self.values):
            raise ValidationError(f"phase table has no entry for k = {k}")
        return self.values[i]

    @property
    def real_axis(self) -> bool:
        """True when every zero lies on a single ray through 0."""
        return self.kind != "table" or len(set(self.values)) <= 1

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "table":
            d["values"] = list(self.values)
        return d


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    C: LogComplex
    N: int = 0
    p_rule: PRule | None = None
    phase_rule: PhaseRule | None = None
    r1: float | None = None
    q0: int | None = None
    k_max: int | None = None
    k0: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown family kind {self.kind!r}")
        if not isinstance(self.C, LogComplex):
            object.__setattr__(self, "C", LogComplex.from_complex(self.C))
        if self.C.is_zero:
            raise ValidationError("C must be nonzero")
        if int(self.N) != self.N or self.N < 0:
            raise ValidationError("N must be a non-negative integer")
        if self.phase_rule is None:
            default = "all_zero" if self.kind == "theorem2" else "all_pi"
            object.__setattr__(self, "phase_rule", PhaseRule(default))
        if self.k_max is not None and self.k_max < 1:
            raise ValidationError("k_max must be positive")
        getattr(self, "_check_" + self.kind)()

    def _check_r1(self):
        if self.r1 is None or not (self.r1 > 1 and math.isfinite(self.r1)):
            raise ValidationError("r1 must be a finite real > 1")

    def _check_theorem4(self):
        self._check_r1()
        if self.p_rule is None:
            raise ValidationError("theorem4 needs a p_rule")

    def _check_baker1976(self):
        self._check_r1()
        if self.N != 2:
            raise ValidationError("baker1976 has N = 2")
        if abs(self.C.arg) > 0:
            raise ValidationError("baker1976 needs a positive real C")
        c = math.exp(self.C.log_mod)
        if self.p_rule is None:
            object.__setattr__(self, "p_rule", PRule("constant", c=c))
        elif self.p_rule.kind != "constant" or not math.isclose(self.p_rule.c, c, rel_tol=1e-15):
            raise ValidationError("baker1976 needs p_rule = constant(C)")
        if not c * math.exp(2.0 / self.r1) < 0.25:
            raise ValidationError("baker1976 seed: need C exp(2/r1) < 1/4")
        if not c * self.r1 > 1:
            raise ValidationError("baker1976 seed: need C r1 > 1")

    def _check_theorem2(self):
        q0 = self.q0
        if q0 is None or int(q0) != q0 or q0 < 4:
            raise ValidationError("theorem2 needs an integer q0 >= 4")
        if q0 % 2:
            raise ValidationError("q0 must be even")
        object.__setattr__(self, "q0", int(q0))
        if self.N != 2:
            raise ValidationError("theorem2 has N = 2")

    def _check_baker1988(self):
        self._check_r1()
        if abs(self.C.arg) > 0:
            raise ValidationError("baker1988 needs a positive real C")
        c = math.exp(self.C.log_mod)
        if not 0 < c < 1.0 / (4.0 * math.e ** 2):
            raise ValidationError("baker1988 needs 0 < C < 1/(4e^2)")
        if self.N != 0:
            raise ValidationError("baker1988 has N = 0")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "N": self.N, "C": {"log_abs": self.C.log_mod, "arg": self.C.arg}}
        if self.p_rule is not None:
            d["p_rule"] = self.p_rule.to_dict()
        d["phase_rule"] = self.phase_rule.to_dict()
        for key in ("r1", "q0", "k_max", "k0"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        return d


@dataclass(frozen=True, eq=False)
class ZeroSequence:
    """Immutable zero data plus the per-index anchor/gap bookkeeping.

    Indices follow the family's own numbering: ``first`` is 1 for the
    recursive families and 0 for theorem2.  Arrays are positional, use
    ``pos(k)`` to translate.
    """

    family: FamilySpec | None
    first: int
    log_r: np.ndarray
    theta: np.ndarray
    mult: tuple
    origin_mult: int
    constant: LogComplex
    anchor: np.ndarray
    gap: np.ndarray
    k0: int | None = None
    growth_index: int | None = None
    trend: dict | None = None
    max_residual: float = 0.0
    _frames: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("log_r", "theta", "anchor", "gap"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        mf = np.array([_as_float(m) for m in self.mult])
        mf.setflags(write=False)
        object.__setattr__(self, "mult_f", mf)
        if len(self.log_r) > 1 and not np.all(np.diff(self.log_r) > 0):
            raise ValidationError("log_r must be strictly increasing")

    @classmethod
    def from_entries(cls, entries, origin_mult=0, constant=LogComplex(0.0), first=1):
        """A bare zero list (no recurrence); gaps are computed numerically."""
        entries = list(entries)
        if not isinstance(constant, LogComplex):
            constant = LogComplex.from_complex(constant)
        log_r = [float(e[0]) for e in entries]
        theta = [float(e[1]) for e in entries]
        mult = tuple(int(e[2]) for e in entries)
        if any(m < 1 for m in mult):
            raise ValidationError("multiplicities must be positive")
        anchor = _anchors(log_r, mult, origin_mult, constant.log_mod)
        gap = [log_r[i + 1] - anchor[i] for i in range(len(log_r) - 1)] + [math.nan]
        return cls(None, first, log_r, theta, mult, int(origin_mult), constant,
                   anchor[: len(log_r)], gap[: len(log_r)])

    # -- indexing -------------------------------------------------------
    @property
    def last(self) -> int:
        return self.first + len(self.log_r) - 1

    def __len__(self):
        return len(self.log_r)

    def has(self, k: int) -> bool:
        return self.first <= k <= self.last

    def pos(self, k: int) -> int:
        if not self.has(k):
            raise FamilyOverflowError(f"index {k} is outside the generated range "
                                      f"[{self.first}, {self.last}]", index=k)
        return k - self.first

    def L(self, k: int) -> float:
        return float(self.log_r[self.pos(k)])

    def th(self, k: int) -> float:
        return float(self.theta[self.pos(k)])

    def m(self, k: int) -> int:
        return self.mult[self.pos(k)]

    def gap_of(self, k: int) -> float:
        g = float(self.gap[self.pos(k)])
        if math.isnan(g):
            raise FamilyOverflowError(f"no successor zero for index {k}", index=k + 1)
        return g

    @property
    def indices(self) -> range:
        return range(self.first, self.last + 1)

    @property
    def entries(self) -> list:
        return [(float(a), float(b), m) for a, b, m in zip(self.log_r, self.theta, self.mult)]

    @property
    def kind(self) -> str:
        return self.family.kind if self.family is not None else "custom"

    def count_inside(self, log_radius: float) -> int:
        """Zeros with |z| < radius, with multiplicity (exact integer)."""
        n = int(np.searchsorted(self.log_r, log_radius, side="left"))
        return self.origin_mult + sum(self.mult[:n])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "log_r", "theta", "mult"])
        for i, (lr, th, m) in enumerate(self.entries):
            w.writerow([self.first + i, repr(lr), repr(th), m])
        return buf.getvalue()


def _as_float(m) -> float:
    try:
        return float(m)
    except OverflowError:
        return math.inf


def _anchors(log_r, mult, N, log_c):
    """anchor_k for every index, sequential sums in index order."""
    out = []
    H = 0.0      # sum_{j<k} m_j (L_k - L_j), updated incrementally
    msum = 0.0   # sum_{j<k} m_j
    for i, L in enumerate(log_r):
        if i:
            msum += _as_float(mult[i - 1])
            H += msum * (L - log_r[i - 1])
        out.append(log_c + N * L + H if math.isfinite(H) else math.inf)
    return out


def _doubling_index(log_r, first):
    """Smallest k such that log r_{j+1} - log r_j >= log 2 for every j >= k."""
    k0 = first + len(log_r) - 1
    for i in range(len(log_r) - 2, -1, -1):
        if log_r[i + 1] - log_r[i] >= LOG2:
            k0 = first + i
        else:
            break
    return k0


def _growth_index(log_r, first):
    """Smallest k with log r_{j+1} - log r_j >= j log 2 for all j >= k."""
    g = first + len(log_r) - 1
    for i in range(len(log_r) - 2, -1, -1):
        if log_r[i + 1] - log_r[i] >= (first + i) * LOG2:
            g = first + i
        else:
            break
    return g


def _trend(p_rule, k_hi):
    """|log P_k|/k on 1..k_hi and whether its tail decreases."""
    ks = np.arange(1, k_hi + 1)
    stat = np.array([abs(p_rule.log_value(int(k))) / k for k in ks])
    half = stat[len(stat) // 2:]
    return {"first": float(stat[0]), "last": float(stat[-1]),
            "max_tail": float(half.max()) if len(half) else float(stat[-1]),
            "decreasing_tail": bool(np.all(np.diff(half) <= 0))}


def _horizon(spec, k_next):
    if spec.k_max is not None and k_next <= spec.k_max:
        raise FamilyOverflowError(f"log r_{k_next} exceeds the double range", index=k_next)


def build_theorem4(spec: FamilySpec) -> ZeroSequence:
    """Run r_{k+1} = P_k r_k^N prod_{j<=k} (1 + r_k/r_j) in log space."""
    if spec.kind not in ("theorem4", "baker1976"):
        raise ValidationError(f"build_theorem4 cannot build kind {spec.kind!r}")
    log_c = spec.C.log_mod
    N = spec.N
    k_max = spec.k_max
    log_r = [math.log(spec.r1)]
    gap = []
    resid = 0.0
    k = 1
    while k_max is None or k < k_max:
        Lk = log_r[-1]
        H = 0.0
        S = 0.0
        for Lj in log_r[:-1]:
            H += Lk - Lj
            S += math.log1p(math.exp(Lj - Lk))
        lp = spec.p_rule.log_value(k)
        nxt = lp + N * Lk + H + S + LOG2
        if not math.isfinite(nxt):
            _horizon(spec, k + 1)
            break
        if nxt <= Lk:
            raise ValidationError(f"r_{k + 1} <= r_{k}: the recurrence does not increase "
                                  f"(log r_{k} = {Lk!r}, log r_{k + 1} = {nxt!r})")
        terms = [lp, N * Lk] + [(Lk - Lj) + math.log1p(math.exp(Lj - Lk)) for Lj in log_r]
        resid = max(resid, abs(nxt - math.fsum(terms)) / max(1.0, abs(nxt)))
        gap.append(lp - log_c + S + LOG2)
        log_r.append(nxt)
        k += 1
    gap.append(math.nan)
    n = len(log_r)
    anchor = _anchors(log_r, (1,) * n, N, log_c)
    theta = [spec.phase_rule.theta(i, 1) for i in range(1, n + 1)]
    k0 = _doubling_index(log_r, 1)
    limit = spec.k0 if spec.k0 is not None else (1 if spec.kind == "baker1976" else 1 + n // 2)
    if n > 1 and k0 > limit:
        raise ValidationError(f"r_{{k+1}} >= 2 r_k fails at k = {k0 - 1}, beyond k0 = {limit}")
    return ZeroSequence(spec, 1, log_r, theta, (1,) * n, N, spec.C, anchor, gap,
                        k0=k0, growth_index=_growth_index(log_r, 1),
                        trend=_trend(spec.p_rule, max(n - 1, 1)), max_residual=resid)


def build_theorem2(spec: FamilySpec) -> ZeroSequence:
    """Zeros a_0 = e^{q_0/2}, a_{k+1} = e^{q_k} with multiplicity q_k, q_{k+1} = 3 q_k^2 / 2.

    Multiplicities are exact integers.  The last entry may have a
    multiplicity beyond the double range; it then only serves as a tail.
    """
    if spec.kind != "theorem2":
        raise ValidationError(f"build_theorem2 cannot build kind {spec.kind!r}")
    q = [spec.q0]
    log_r = [spec.q0 / 2.0]
    k = 0
    while spec.k_max is None or k < spec.k_max:
        q.append(3 * q[-1] * q[-1] // 2)
        log_r.append(float(q[-2]))
        k += 1
        if q[-1] >= 2 ** 1024:
            # multiplicity no longer representable: keep this zero as the tail and stop
            if spec.k_max is not None and spec.k_max > k:
                raise FamilyOverflowError(f"q_{k} exceeds the double range", index=k + 1)
            break
    n = len(log_r)
    mult = tuple(q[:n])
    anchor = _anchors(log_r, mult, spec.N, spec.C.log_mod)
    gap = [log_r[i + 1] - anchor[i] for i in range(n - 1)] + [math.nan]
    theta = [spec.phase_rule.theta(i, 0) for i in range(n)]
    return ZeroSequence(spec, 0, log_r, theta, mult, spec.N, spec.C, anchor, gap,
                        k0=_doubling_index(log_r, 0), growth_index=_growth_index(log_r, 0))


def baker1988_k0(c: float, r1: float) -> int:
    """Smallest k with 2^{k-1} C > 2 r1."""
    k = 1
    while 2.0 ** (k - 1) * c <= 2.0 * r1:
        k += 1
    return k


def build_baker1988(spec: FamilySpec) -> ZeroSequence:
    """Double zeros at -r_k; geometric preamble then r_{k+1} = C^2 prod_{j<=k} (1 + r_k/r_j)^2."""
    if spec.kind != "baker1988":
        raise ValidationError(f"build_baker1988 cannot build kind {spec.kind!r}")
    c = math.exp(spec.C.log_mod)
    k0 = baker1988_k0(c, spec.r1)
    log_c2 = 2.0 * spec.C.log_mod
    log_r = [math.log(spec.r1) + i * LOG2 for i in range(k0)]
    gap = []
    k = k0
    while spec.k_max is None or k < spec.k_max:
        Lk = log_r[-1]
        H = 0.0
        S = 0.0
        for Lj in log_r[:-1]:
            H += Lk - Lj
            S += math.log1p(math.exp(Lj - Lk))
        nxt = log_c2 + 2.0 * (H + S + LOG2)
        if not math.isfinite(nxt):
            _horizon(spec, k + 1)
            break
        if nxt - Lk < LOG2:
            raise ValidationError(f"r_{k + 1} < 2 r_{k} in the recurrence part")
        log_r.append(nxt)
        k += 1
    n = len(log_r)
    mult = (2,) * n
    anchor = _anchors(log_r, mult, 0, log_c2)
    for i in range(n - 1):
        k = i + 1
        if k >= k0:
            S = math.fsum(math.log1p(math.exp(Lj - log_r[i])) for Lj in log_r[:i])
            gap.append(2.0 * (S + LOG2))
        else:
            gap.append(log_r[i + 1] - anchor[i])
    gap.append(math.nan)
    theta = [spec.phase_rule.theta(i, 1) for i in range(1, n + 1)]
    return ZeroSequence(spec, 1, log_r, theta, mult, 0, LogComplex(log_c2, 2.0 * spec.C.arg),
                        anchor, gap, k0=k0, growth_index=_growth_index(log_r, 1))


def build(spec: FamilySpec) -> ZeroSequence:
    if spec.kind in ("theorem4", "baker1976"):
        return build_theorem4(spec)
    if spec.kind == "theorem2":
        return build_theorem2(spec)
    return build_baker1988(spec)


def recurrence_residuals(seq: ZeroSequence) -> np.ndarray:
    """Relative residual of the defining recurrence at each generated step."""
    spec = seq.family
    if spec is None or spec.kind == "theorem2":
        return np.zeros(0)
    L = seq.log_r
    out = []
    for i in range(len(L) - 1):
        k = seq.first + i
        Lk = float(L[i])
        terms = [(Lk - float(Lj)) + math.log1p(math.exp(float(Lj) - Lk)) for Lj in L[: i + 1]]
        if spec.kind == "baker1988":
            if k < seq.k0:
                continue
            pred = 2.0 * spec.C.log_mod + 2.0 * math.fsum(terms)
        else:
            pred = math.fsum([spec.p_rule.log_value(k), spec.N * Lk] + terms)
        out.append(abs(float(L[i + 1]) - pred) / max(1.0, abs(pred)))
    return np.array(out)
