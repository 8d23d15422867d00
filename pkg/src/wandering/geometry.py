"""Round annuli centred at 0: modulus, hyperbolic density and curve lengths.

The modulus is normalised as log(R/r)/(2 pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, ValidationError


@dataclass(frozen=True)
class RoundAnnulus:
    log_inner: float
    log_outer: float

    def __post_init__(self):
        if not (math.isfinite(self.log_inner) and math.isfinite(self.log_outer)):
            raise ValidationError("annulus radii must be finite")
        if not self.log_outer > self.log_inner:
            raise ValidationError(f"empty annulus: log radii {self.log_inner!r}, {self.log_outer!r}")

    @classmethod
    def from_radii(cls, r: float, R: float) -> "RoundAnnulus":
        return cls(math.log(r), math.log(R))

    @property
    def width(self) -> float:
        return self.log_outer - self.log_inner

    @property
    def log_core(self) -> float:
        return 0.5 * (self.log_inner + self.log_outer)

    def contains(self, z: complex) -> bool:
        if z == 0:
            return False
        lz = math.log(abs(z))
        return self.log_inner < lz < self.log_outer


def annulus_modulus(a: RoundAnnulus) -> float:
    return a.width / (2.0 * math.pi)


def hyperbolic_density(z_log_mod: float, a: RoundAnnulus) -> float:
    """Density at |z| = e^{z_log_mod} of the annulus rescaled to inner radius 1.

    z_log_mod is measured from the inner circle, so it must lie in (0, log R).
    """
    logR = a.width
    if not 0.0 < z_log_mod < logR:
        raise OutOfDomain(f"log|z| = {z_log_mod!r} outside (0, {logR!r})")
    return math.pi / (math.exp(z_log_mod) * math.sin(math.pi * z_log_mod / logR) * logR)


def _density(z, a: RoundAnnulus):
    """Density of a itself (not rescaled) at the complex points z."""
    logR = a.width
    lz = np.log(np.abs(z))
    t = lz - a.log_inner
    if np.any(t <= 0) or np.any(t >= logR):
        raise OutOfDomain("point outside the annulus")
    return math.pi / (np.abs(z) * np.sin(math.pi * t / logR) * logR)


def length_lower_bound(winding: int, a: RoundAnnulus) -> float:
    """Hyperbolic length lower bound for a closed curve winding around 0."""
    return 2.0 * math.pi ** 2 * abs(int(winding)) / a.width


def core_circle_length(a: RoundAnnulus) -> float:
    return 2.0 * math.pi ** 2 / a.width


def _trapezoid(pts, a):
    d = _density(pts, a)
    seg = np.abs(np.diff(pts))
    return float(np.sum(0.5 * (d[:-1] + d[1:]) * seg))


def _refine(pts):
    out = np.empty(2 * len(pts) - 1, dtype=complex)
    out[0::2] = pts
    out[1::2] = 0.5 * (pts[:-1] + pts[1:])
    return out


def polyline_hyperbolic_length(points, a: RoundAnnulus, closed: bool = False,
                               rtol: float = 1e-6, max_points: int = 1 << 22) -> float:
    """Hyperbolic length of the polyline through points (straight segments).

    Trapezoid rule, refined by midpoint insertion until the relative change
    drops below rtol.  Straight chords may leave the annulus even when the
    vertices lie inside; that raises OutOfDomain.
    """
    pts = np.asarray(points, dtype=complex)
    if pts.ndim != 1 or len(pts) < 2:
        raise ValidationError("need at least two points")
    if closed and pts[0] != pts[-1]:
        pts = np.append(pts, pts[0])
    prev = _trapezoid(pts, a)
    while len(pts) < max_points:
        pts = _refine(pts)
        cur = _trapezoid(pts, a)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    return prev


def winding_number(points) -> int:
    """Winding number about 0 of the closed polyline through points."""
    pts = np.asarray(points, dtype=complex)
    if pts[0] != pts[-1]:
        pts = np.append(pts, pts[0])
    steps = np.angle(pts[1:] / pts[:-1])
    return int(round(steps.sum() / (2.0 * math.pi)))
