import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wandering.logspace import (ONE, ZERO, LogComplex, cexpm1, clog1p, lc_add, lc_mul, lc_one_minus,
                                log1mexp, log1mexp_array, normalize_arg, phi, phi_array, psi,
                                psi_array)

mp.mp.dps = 50

finite = st.floats(-30, 30, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


def close_mod_2pi(a, b, tol):
    return abs(math.remainder(a - b, 2 * math.pi)) <= tol


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_normalize_arg_range():
    assert normalize_arg(math.pi) == pytest.approx(math.pi)
    assert normalize_arg(-math.pi) == pytest.approx(math.pi)
    assert normalize_arg(7.0) == pytest.approx(7.0 - 2 * math.pi)
    with pytest.raises(ValueError):
        normalize_arg(math.inf)


def test_logcomplex_invariants():
    with pytest.raises(ValueError):
        LogComplex(math.nan, 0.0)
    with pytest.raises(OverflowError):
        LogComplex(math.inf, 0.0)
    assert LogComplex(-math.inf, 2.0).arg == 0.0
    assert ZERO.is_zero and not ONE.is_zero
    z = LogComplex.from_complex(-3 + 4j)
    assert z.log_mod == pytest.approx(math.log(5))
    assert abs(z.to_complex() - (-3 + 4j)) < 1e-14


@given(finite, angle, finite, angle)
def test_mul_adds_logs(l1, a1, l2, a2):
    p = lc_mul(LogComplex(l1, a1), LogComplex(l2, a2))
    assert p.log_mod == pytest.approx(l1 + l2, abs=1e-12)
    assert close_mod_2pi(p.arg, a1 + a2, 1e-12)


@given(finite, angle, finite, angle)
def test_add_matches_complex_and_is_symmetric(l1, a1, l2, a2):
    a, b = LogComplex(l1, a1), LogComplex(l2, a2)
    s1, s2 = lc_add(a, b), lc_add(b, a)
    assert s1 == s2
    ref = cmath.rect(math.exp(l1), a1) + cmath.rect(math.exp(l2), a2)
    if abs(ref) > 1e-8 * max(math.exp(l1), math.exp(l2)):
        assert abs(s1.to_complex() - ref) <= 1e-9 * abs(ref)


def test_add_huge_magnitudes():
    a = LogComplex(1e300, 0.5)
    b = LogComplex(1e300 - 1.0, 0.5)
    s = lc_add(a, b)
    assert s.log_mod == pytest.approx(1e300, rel=1e-15)
    assert s.arg == pytest.approx(0.5)
    # opposite operands cancel down to the rounding of the angle
    c = lc_add(LogComplex(50.0, 0.5), LogComplex(50.0, 0.5 + math.pi))
    assert c.is_zero or c.log_mod < 50.0 - 30


def test_one_minus_near_one():
    z = LogComplex(1e-12, 0.0)          # z = e^{1e-12}, 1 - z = -1e-12
    r = lc_one_minus(z)
    assert r.log_mod == pytest.approx(math.log(1e-12), rel=1e-9)
    assert abs(r.arg) == pytest.approx(math.pi)
    assert lc_one_minus(ZERO) == ONE


@settings(max_examples=300)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_clog1p_against_mpmath(a, b):
    t = complex(a, b)
    if abs(t) > 0.5:
        return
    ref = complex(mp.log1p(mp.mpc(a, b)))
    got = clog1p(t)
    assert abs(got - ref) <= 1e-15 * abs(ref) + 1e-320


@settings(max_examples=300)
@given(st.floats(-1e-3, 1e-3), st.floats(-1e-3, 1e-3))
def test_cexpm1_small(a, b):
    ref = complex(mp.expm1(mp.mpc(a, b)))
    got = cexpm1(complex(a, b))
    assert abs(got - ref) <= 1e-15 * abs(ref) + 1e-320


@settings(max_examples=400)
@given(st.floats(-40, 40), st.floats(-3.1, 3.1))
def test_log1mexp_against_mpmath(x, y):
    u = complex(x, y)
    if abs(u) < 1e-300:
        return
    ref = complex(mp.log(-mp.expm1(mp.mpc(x, y))))
    got = log1mexp(u)
    assert abs(got.real - ref.real) <= 1e-13 * max(1.0, abs(ref.real)) or rel(got.real, ref.real) < 1e-13
    assert close_mod_2pi(got.imag, ref.imag, 1e-12)


def test_log1mexp_tiny_argument():
    # 1 - e^u ~ -u: relative accuracy of the modulus is kept
    u = complex(1e-20, 1e-20)
    got = log1mexp(u)
    assert got.real == pytest.approx(math.log(abs(u)), rel=1e-14)
    assert log1mexp(0j).real == -math.inf


def test_log1mexp_huge_argument():
    got = log1mexp(complex(1e200, 0.3))
    assert got.real == 1e200
    assert close_mod_2pi(got.imag, 0.3 + math.pi, 1e-15)


@settings(max_examples=200)
@given(st.floats(-30, 30), st.floats(-3, 3))
def test_phi_psi_against_mpmath(x, y):
    v = complex(x, y)
    if abs(v) < 1e-6:
        return
    ev = mp.exp(mp.mpc(x, y))
    d = -mp.expm1(mp.mpc(x, y))
    ref_phi = complex(ev / d)
    ref_psi = complex(ev / d ** 2)
    assert abs(phi(v) - ref_phi) <= 1e-12 * max(1.0, abs(ref_phi))
    assert abs(psi(v) - ref_psi) <= 1e-12 * max(1e-300, abs(ref_psi)) + 1e-300


def test_array_versions_match_scalars():
    rng = np.random.default_rng(7)
    u = rng.uniform(-5, 5, 500) + 1j * rng.uniform(-3, 3, 500)
    np.testing.assert_allclose(log1mexp_array(u), [log1mexp(x) for x in u], rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(phi_array(u), [phi(x) for x in u], rtol=1e-13)
    np.testing.assert_allclose(psi_array(u), [psi(x) for x in u], rtol=1e-13)
