import math

import pytest

from conftest import family
import oracle
from wandering.critical import (critical_count, critical_csv, critical_value_ratio, locate,
                                locate_bisect, locate_thm2, locate_thm4, search_band, sign_changes,
                                thm2_bracket, thm2_bracket_signs)
from wandering.errors import BracketFailed, ValidationError


@pytest.mark.parametrize("name,k", [("baker1976", 2), ("baker1976", 3), ("baker1976", 20),
                                    ("baker1976", 70), ("uniform", 10), ("vanishing", 40),
                                    ("oscillating", 25), ("baker1988", 12)])
def test_newton_matches_extended_precision(name, k):
    seq = family(name)
    cp = locate_thm4(seq, k)
    ref = complex(oracle.mp_critical(seq, k, cp.w))
    assert abs(cp.w - ref) < 1e-13
    assert cp.residual < 1e-8
    lo, hi = search_band(seq, k)
    assert lo < math.log(abs(cp.w)) < hi


@pytest.mark.parametrize("k", [2, 5, 30, 60])
def test_delta_reconstructs_location(seed, k):
    cp = locate_thm4(seed, k)
    assert cp.w.real == pytest.approx(1 - 1 / (k + 2 + cp.delta_k), abs=1e-15)
    assert abs(cp.w.imag) < 1e-15


@pytest.mark.parametrize("k", [3, 15, 50])
def test_bisection_agrees_with_newton(seed, k):
    cp = locate_thm4(seed, k)
    n = k + 2
    bi = locate_bisect(seed, k, 1 - 2 / n, 1 - 0.5 / n)
    assert bi.w.real == pytest.approx(cp.w.real, rel=1e-12)


@pytest.mark.parametrize("k", [2, 10, 40])
def test_exactly_one_critical_point_per_band(seed, k):
    assert critical_count(seed, k) == 1
    assert sign_changes(seed, k) == 1
    assert locate_thm4(seed, k, check_unique=True).unique is True


def test_tower_bracket_signs(tower):
    for j in range(1, tower.last):
        gx, gy = thm2_bracket_signs(tower, j)
        assert gx > 0 > gy, j


def test_tower_bracket_values(tower):
    x, y = thm2_bracket(tower, 1)
    assert x == pytest.approx(100 / 30000) and y == pytest.approx(200 / 15000)
    with pytest.raises(ValidationError):
        thm2_bracket(tower, 0)
    with pytest.raises(ValidationError):
        thm2_bracket(family("baker1976"), 2)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_tower_critical_point_oracle(tower, k):
    cp = locate_thm2(tower, k)
    assert cp.base == k + 1 and cp.method == "bisection"
    x, y = thm2_bracket(tower, k + 1)
    assert x < cp.w.real < y
    L, th, m = oracle.zeros(tower)
    ref = oracle.mp_critical(tower, k + 1, cp.w)
    assert complex(ref).real == pytest.approx(cp.w.real, rel=1e-11)


def test_bracket_failure(tower):
    with pytest.raises(BracketFailed):
        locate_bisect(tower, 2, 0.5, 0.9)


def test_dispatch(tower, seed):
    assert locate(tower, 1).method == "bisection"
    assert locate(seed, 5).method == "newton"


def test_critical_value_uniform_tends_to_two(uniform):
    vals = [math.exp(locate_thm4(uniform, k).ratio_next) for k in (20, 40, 60, 80)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert 1.9 < vals[-1] < 2.0


def test_critical_value_ratio_seed(seed):
    assert abs(critical_value_ratio(seed, locate_thm4(seed, 60))) < 0.05
    with pytest.raises(ValidationError):
        critical_value_ratio(family("tower"), locate_thm2(family("tower"), 1))


def test_needs_next_zero(seed):
    with pytest.raises(ValidationError):
        locate_thm4(seed, seed.last)


def test_csv(seed):
    text = critical_csv([locate_thm4(seed, k) for k in (3, 4)])
    rows = text.splitlines()
    assert rows[0].startswith("k,base,re_w") and len(rows) == 3
