"""Complex numbers stored as (log modulus, argument).

Values of the products studied here routinely exceed the double range, so
every magnitude is carried as a logarithm.  The helpers at the bottom
(`log1mexp` and friends) are the numerically delicate primitives that the
evaluator builds on: log(1 - e^u) for complex u without cancellation.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# |u| regimes for log(1 - e^u)
_SMALL = -0.7
_LARGE = 0.7


def normalize_arg(theta: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"non-finite argument {theta!r}")
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


@dataclass(frozen=True)
class LogComplex:
    """A complex number r*e^{i*arg} stored as (log r, arg).

    ``log_mod = -inf`` encodes zero; its argument is forced to 0.
    """

    log_mod: float
    arg: float = 0.0

    def __post_init__(self):
        lm = float(self.log_mod)
        if math.isnan(lm) or math.isnan(float(self.arg)):
            raise ValueError("NaN in LogComplex")
        if lm == math.inf:
            raise OverflowError("log modulus is +inf")
        object.__setattr__(self, "log_mod", lm)
        if lm == -math.inf:
            object.__setattr__(self, "arg", 0.0)
        else:
            object.__setattr__(self, "arg", normalize_arg(float(self.arg)))

    @property
    def is_zero(self) -> bool:
        return self.log_mod == -math.inf

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return ZERO
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def from_log(cls, u: complex) -> "LogComplex":
        """Wrap a complex logarithm u as e^u."""
        u = complex(u)
        if u.real == -math.inf:
            return ZERO
        return cls(u.real, u.imag)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return cmath.rect(math.exp(self.log_mod), self.arg)

    def log(self) -> complex:
        return complex(self.log_mod, self.arg)

    def __neg__(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.log_mod, self.arg + math.pi)


ZERO = LogComplex(-math.inf, 0.0)
ONE = LogComplex(0.0, 0.0)


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    if a.is_zero or b.is_zero:
        return ZERO
    lm = a.log_mod + b.log_mod
    if lm == math.inf:
        raise OverflowError("product overflows the log-modulus range")
    return LogComplex(lm, a.arg + b.arg)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Sum a + b.  Symmetric bit for bit: operands are put in a fixed order."""
    if (a.log_mod, a.arg) < (b.log_mod, b.arg):
        a, b = b, a
    if b.is_zero:
        return a
    ratio = cmath.exp(complex(b.log_mod - a.log_mod, b.arg - a.arg))
    s = clog1p(ratio)
    if s.real == -math.inf:
        return ZERO
    return LogComplex(a.log_mod + s.real, a.arg + s.imag)


def lc_one_minus(z: LogComplex) -> LogComplex:
    """1 - z, accurate near z = 0, z = 1 and for huge z."""
    if z.is_zero:
        return ONE
    return LogComplex.from_log(log1mexp(complex(z.log_mod, z.arg)))


# ---------------------------------------------------------------------------
# scalar primitives

def clog1p(t: complex) -> complex:
    """log(1 + t) for complex t, accurate when |t| is small."""
    a, b = t.real, t.imag
    if abs(t) > 0.5:
        s = 1.0 + t
        if s == 0:
            return complex(-math.inf, 0.0)
        return cmath.log(s)
    return complex(0.5 * math.log1p(a * (2.0 + a) + b * b), math.atan2(b, 1.0 + a))


def cexpm1(u: complex) -> complex:
    """e^u - 1 without cancellation near u = 0."""
    x, y = u.real, u.imag
    s = math.sin(0.5 * y)
    return complex(math.expm1(x) * math.cos(y) - 2.0 * s * s, math.exp(x) * math.sin(y))


def log1mexp(u: complex) -> complex:
    """log(1 - e^u) on some branch.  Returns -inf for u = 0."""
    x = u.real
    if x < _SMALL:
        return clog1p(-cmath.exp(u))
    if x > _LARGE:
        return u + complex(0.0, math.pi) + clog1p(-cmath.exp(-u))
    v = -cexpm1(u)
    if v == 0:
        return complex(-math.inf, 0.0)
    return complex(math.log(abs(v)), math.atan2(v.imag, v.real))


def phi(v: complex) -> complex:
    """e^v / (1 - e^v)."""
    if v.real > 0:
        return -1.0 - phi(-v)
    den = -cexpm1(v)
    if den == 0:
        return complex(math.inf, 0.0)
    return cmath.exp(v) / den


def psi(v: complex) -> complex:
    """e^v / (1 - e^v)^2, symmetric under v -> -v."""
    if v.real > 0:
        v = -v
    den = cexpm1(v)
    if den == 0:
        return complex(math.inf, 0.0)
    return cmath.exp(v) / (den * den)


# ---------------------------------------------------------------------------
# array versions (same branch choices as the scalar code)

def clog1p_array(t: np.ndarray) -> np.ndarray:
    a, b = t.real, t.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.abs(t) <= 0.5
        re_small = 0.5 * np.log1p(a * (2.0 + a) + b * b)
        im_small = np.arctan2(b, 1.0 + a)
        big = np.log(np.where(small, 1.0, 1.0 + t))
    return np.where(small, re_small + 1j * im_small, big)


def cexpm1_array(u: np.ndarray) -> np.ndarray:
    x, y = u.real, u.imag
    s = np.sin(0.5 * y)
    return (np.expm1(x) * np.cos(y) - 2.0 * s * s) + 1j * (np.exp(x) * np.sin(y))


def log1mexp_array(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    x = u.real
    out = np.empty_like(u)
    lo = x < _SMALL
    hi = x > _LARGE
    mid = ~(lo | hi)
    if lo.any():
        out[lo] = clog1p_array(-np.exp(u[lo]))
    if hi.any():
        uh = u[hi]
        out[hi] = uh + 1j * math.pi + clog1p_array(-np.exp(-uh))
    if mid.any():
        v = -cexpm1_array(u[mid])
        with np.errstate(divide="ignore"):
            out[mid] = np.log(np.abs(v)) + 1j * np.arctan2(v.imag, v.real)
    return out


def phi_array(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    flip = v.real > 0
    vv = np.where(flip, -v, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.exp(vv) / -cexpm1_array(vv)
    return np.where(flip, -1.0 - p, p)


def psi_array(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    vv = np.where(v.real > 0, -v, v)
    d = cexpm1_array(vv)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.exp(vv) / (d * d)
