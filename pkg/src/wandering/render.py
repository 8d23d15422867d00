"""Escape-layer images in (log|z|, arg z) coordinates.

Each pixel is iterated with every point kept as (base zero, log w); the
layer is the number of steps needed to reach the target ring.
"""
from __future__ import annotations

import bisect
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import FamilyOverflowError, ValidationError
from .evaluator import DEFAULT, EvalConfig, ScaledPoint, frame, log_f, nearest_base, rebase
from .families import ZeroSequence
from .logspace import LogComplex, normalize_arg

MAX_DIM = 8192
MAX_ITER = 256
STUCK_LOG = -30.0            # |z| below e^-30 counts as attracted to 0

STUCK_RGB = (0, 0, 0)
OVERFLOW_RGB = (255, 255, 255)
RUNNING_RGB = (128, 128, 128)
PALETTE = (
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
    (170, 110, 40), (255, 250, 200), (128, 0, 0), (170, 255, 195),
)


@dataclass(frozen=True)
class RenderSpec:
    lo: float
    hi: float
    width: int
    height: int
    max_iter: int
    target_ring: int
    arg_lo: float = -math.pi
    arg_hi: float = math.pi

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValidationError("render range needs lo < hi")
        for name in ("width", "height"):
            v = getattr(self, name)
            if int(v) != v or not 1 <= v <= MAX_DIM:
                raise ValidationError(f"{name} must be an integer in [1, {MAX_DIM}]")
        if int(self.max_iter) != self.max_iter or not 1 <= self.max_iter <= MAX_ITER:
            raise ValidationError(f"max_iter must be an integer in [1, {MAX_ITER}]")
        if not self.arg_lo < self.arg_hi:
            raise ValidationError("arg range is empty")

    def to_dict(self) -> dict:
        return asdict(self)


def ring_index(seq: ZeroSequence, z_log_mod: float) -> int:
    """Largest k with log r_k <= z_log_mod, or -1 below the first zero."""
    i = bisect.bisect_right(seq.log_r, z_log_mod)
    return -1 if i == 0 else seq.first + i - 1


# ---------------------------------------------------------------------------
# single orbits

@dataclass
class Orbit:
    points: list            # (log_mod, ring) pairs, starting point included
    status: str             # escaped, stuck, overflow, running

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _ring(seq, b, x):
    p = seq.pos(b) if x >= 0 else seq.pos(b) - 1
    return -1 if p < 0 else seq.first + p


def _stuck(seq, b, x):
    return x == -math.inf or (b == seq.first and seq.L(b) + x < STUCK_LOG)


def iterate_orbit(seq: ZeroSequence, start, max_iter: int,
                  cfg: EvalConfig = DEFAULT, target: int | None = None) -> Orbit:
    """Orbit of start (a LogComplex or a ScaledPoint) as (log|z|, ring) pairs.

    The state is kept as (base, log w) throughout, since absolute log-moduli
    of later points are too large to resolve a ring's interior.
    """
    if isinstance(start, ScaledPoint):
        b, lw = rebase(seq, start.base_k, start.log_w)
    else:
        if start.is_zero:
            return Orbit([(-math.inf, -1)], "stuck")
        b = nearest_base(seq, start.log_mod)
        lw = complex(start.log_mod - seq.L(b), normalize_arg(start.arg - seq.th(b)))
    pts = [(seq.L(b) + lw.real, _ring(seq, b, lw.real))]
    for _ in range(max_iter):
        if _stuck(seq, b, lw.real):
            return Orbit(pts, "stuck")
        if target is not None and pts[-1][1] >= target:
            return Orbit(pts, "escaped")
        try:
            _, o, _ = log_f(seq, b, lw, cfg)
        except OverflowError:
            return Orbit(pts, "overflow")
        o = complex(o[0])
        if o.real == -math.inf:
            pts.append((-math.inf, -1))
            return Orbit(pts, "stuck")
        gap = float(seq.gap[seq.pos(b)])
        if not math.isfinite(gap):
            return Orbit(pts, "overflow")
        nb = b + 1
        b, lw = rebase(seq, nb, complex(o.real - gap, normalize_arg(o.imag - seq.th(nb))))
        pts.append((seq.L(b) + lw.real, _ring(seq, b, lw.real)))
    if _stuck(seq, b, lw.real):
        return Orbit(pts, "stuck")
    if target is not None and pts[-1][1] >= target:
        return Orbit(pts, "escaped")
    return Orbit(pts, "running")


# ---------------------------------------------------------------------------
# images

def orbit_table(seq: ZeroSequence, cfg: EvalConfig = DEFAULT) -> tuple:
    """Frames for every base whose tail is available, flattened for the kernels."""
    L = np.asarray(seq.log_r, dtype=float)
    ptr, shifts, mults, belows, Ms, consts, gaps = [0], [], [], [], [], [], []
    for p in range(len(L) - 1):
        k = seq.first + p
        lo = STUCK_LOG - L[0] if p == 0 else -0.5 * (L[p] - L[p - 1])
        lo = min(lo, -0.5 * (L[p + 1] - L[p]))
        hi = 0.5 * (L[p + 1] - L[p])
        try:
            fr = frame(seq, k, float(lo), float(hi), cfg.tail_tol)
        except FamilyOverflowError:
            break
        if not math.isfinite(fr.gap):
            break
        shifts.append(fr.shift)
        mults.append(fr.mult)
        belows.append(fr.below)
        ptr.append(ptr[-1] + len(fr.shift))
        Ms.append(fr.M)
        consts.append(fr.const)
        gaps.append(fr.gap)
    nbase = len(Ms)
    if nbase == 0:
        raise ValidationError("no evaluable base for rendering")
    cat = (lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt))
    return (np.array(ptr, dtype=np.int64), cat(shifts, complex), cat(mults, float),
            cat(belows, bool), np.array(Ms, dtype=float), np.array(consts, dtype=complex),
            np.array(gaps, dtype=float), L.copy(), np.array(seq.theta, dtype=float),
            seq.first, nbase)


def _row_start(seq, spec, j):
    L = np.asarray(seq.log_r)
    xs = spec.lo + (np.arange(spec.width) + 0.5) * (spec.hi - spec.lo) / spec.width
    arg = spec.arg_hi - (j + 0.5) * (spec.arg_hi - spec.arg_lo) / spec.height
    pos = np.searchsorted(L, xs)
    pos = np.clip(pos, 1, len(L) - 1)
    nearer_lo = (xs - L[pos - 1]) <= (L[pos] - xs)
    pos = np.where(nearer_lo, pos - 1, pos)
    x = xs - L[pos]
    ang = np.mod(arg - np.asarray(seq.theta)[pos] + math.pi, 2 * math.pi) - math.pi
    return pos.astype(np.int64), x + 1j * ang


def layers(seq: ZeroSequence, spec: RenderSpec, cfg: EvalConfig = DEFAULT, threads: int = 1,
           table=None) -> tuple:
    """(layer, status) arrays of shape (height, width)."""
    table = orbit_table(seq, cfg) if table is None else table

    def row(j):
        b, lw = _row_start(seq, spec, j)
        return kernels.orbit_layers(table, b, lw, spec.max_iter, spec.target_ring, STUCK_LOG)

    rows = range(spec.height)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(row, rows))
    else:
        out = [row(j) for j in rows]
    lay = np.stack([np.asarray(o[0]) for o in out])
    st = np.stack([np.asarray(o[1]) for o in out])
    return lay, st


def colorize(lay, st) -> np.ndarray:
    pal = np.array(PALETTE, dtype=np.uint8)
    img = np.empty(lay.shape + (3,), dtype=np.uint8)
    img[...] = RUNNING_RGB
    esc = st == 0
    img[esc] = pal[lay[esc] % len(PALETTE)]
    img[st == 1] = STUCK_RGB
    img[st == 2] = OVERFLOW_RGB
    return img


def to_ppm(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def render_image(seq: ZeroSequence, spec: RenderSpec, cfg: EvalConfig = DEFAULT,
                 threads: int = 1) -> bytes:
    lay, st = layers(seq, spec, cfg, threads)
    return to_ppm(colorize(lay, st))


def sidecar(spec: RenderSpec, seq: ZeroSequence, lay=None, st=None) -> str:
    d = {"spec": spec.to_dict(), "family": seq.family.to_dict() if seq.family else None,
         "palette": [list(c) for c in PALETTE],
         "reserved": {"stuck": list(STUCK_RGB), "overflow": list(OVERFLOW_RGB),
                      "running": list(RUNNING_RGB)}}
    if st is not None:
        d["status_counts"] = {name: int(np.count_nonzero(st == i))
                              for i, name in enumerate(("escaped", "stuck", "overflow", "running"))}
    return json.dumps(d, sort_keys=True, indent=1)
