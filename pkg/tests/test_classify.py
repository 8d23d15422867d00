import math
import os

import numpy as np
import pytest

from conftest import family
from wandering.classify import (SeparatingAnnulus, _kp_evidence, classification_csv, clustering,
                                diverging, m_count, separating_annulus, sweep, trichotomy,
                                zero_counts)
from wandering.errors import DegenerateAnnulus, MissingCriticalPoint, ValidationError
from wandering.evaluator import zero_count
from wandering.families import FamilySpec, PRule, build

WINDOWS = {"baker1976": (10, 80), "uniform": (10, 80), "vanishing": (4, 60),
           "oscillating": (10, 80), "tower": (1, 6), "baker1988": (15, 50)}
THREADS = min(8, os.cpu_count() or 1)
_cls = {}


def classified(name):
    if name not in _cls:
        _cls[name] = trichotomy(family(name), WINDOWS[name], threads=THREADS)
    return _cls[name]


@pytest.mark.parametrize("name,conn,up,clus", [
    ("baker1976", "infinite", "no", "inner_isolated"),
    ("uniform", "infinite", "yes", "outer_isolated"),
    ("vanishing", "infinite", "no", "outer_isolated"),
    ("oscillating", "infinite", "inconclusive", "neither"),
    ("tower", "infinite", "yes", "inner_isolated"),
])
def test_verdicts(name, conn, up, clus):
    c = classified(name)
    assert (c.connectivity, c.uniformly_perfect, c.clustering) == (conn, up, clus)


def test_seed_threshold_and_growth():
    c = classified("baker1976")
    assert c.threshold == pytest.approx(1 / (8 * math.e ** 2))
    assert c.kp_stats["slope"] == pytest.approx(1 / (4 * math.e))
    vals = [v for _, v in c.moduli]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert c.geometry["diverging"]


def test_counts_invariants():
    for name in WINDOWS:
        for k, l, m, n in classified(name).counts:
            assert m < n and l <= n - m
            if n < 2 * m:
                assert l < m


def test_counts_examples(seed, tower):
    c = dict((k, (l, m, n)) for k, l, m, n in classified("baker1976").counts)
    assert c[10][1:] == (12, 13)
    assert m_count(seed, 5) == 7 and m_count(seed, 6) == 8
    assert m_count(tower, 1) == 15102
    assert all(l == 1 for _, l, _, _ in classified("tower").counts)


@pytest.mark.parametrize("name", ["baker1976", "uniform", "tower", "baker1988"])
def test_m_count_matches_argument_principle(name):
    seq = family(name)
    lo, hi = WINDOWS[name]
    for k in range(lo, min(hi, seq.last - 1) + 1):
        r = 0.5 * (seq.L(k) + seq.L(k + 1))
        if r > 1e15:
            break   # a ring's interior is below float resolution for absolute radii
        assert zero_count(seq, r) == m_count(seq, k), k


def test_tower_closed_form(tower):
    for k in range(0, tower.last - 1):
        a = separating_annulus(tower, k, {}, {})
        qk, qk1 = tower.m(k), tower.m(k + 1)
        closed = (qk1 / 2 - math.log(4) - qk) / (2 * math.pi * qk1)
        assert a.criterion == pytest.approx(closed, rel=1e-9, abs=0)
    assert abs(a.criterion - 1 / (4 * math.pi)) < 1e-9


def test_double_zero_geometry():
    c = classified("baker1988")
    assert c.connectivity == "infinite"
    assert c.uniformly_perfect == "no"
    assert all(n - m == 2 for _, _, m, n in c.counts)


def test_rescaling_invariance():
    lam = 3.0
    spec = FamilySpec("theorem4", lam, N=2, p_rule=PRule("harmonic", c=lam / (4 * math.e)),
                      r1=100.0, k_max=84)
    c = trichotomy(build(spec), (10, 80), threads=THREADS)
    ref = classified("uniform")
    assert (c.connectivity, c.uniformly_perfect, c.clustering) == \
        (ref.connectivity, ref.uniformly_perfect, ref.clustering)
    assert c.threshold == pytest.approx(lam * ref.threshold)


def test_threshold_is_inconclusive():
    T = 0.1
    ev = _kp_evidence(np.full(30, T), T, 0.1)
    assert not any(ev[key] for key in ("above_sup", "below_inf", "below_sup", "above_inf"))


def test_diverging_rule():
    assert diverging([(k, float(k)) for k in range(10, 30)])
    assert not diverging([(k, 1.0 - 1.0 / k) for k in range(10, 30)])
    assert not diverging([(k, float(k % 3)) for k in range(10, 30)])
    assert not diverging([(1, 1.0), (2, 2.0)])


def test_degenerate_annulus():
    with pytest.raises(DegenerateAnnulus):
        SeparatingAnnulus(3, 1.0, 1.0, 0.0, 1, "k_r_k")


def test_missing_critical_point(seed):
    with pytest.raises(MissingCriticalPoint):
        zero_counts(seed, 20, {}, {})
    with pytest.raises(MissingCriticalPoint):
        separating_annulus(seed, 20, {}, {})


def test_window_validation(seed):
    with pytest.raises(ValidationError):
        trichotomy(seed, (10, 20))
    with pytest.raises(ValidationError):
        trichotomy(seed, (10, 40), margin=0.7)


def test_sweep_threads_agree(seed):
    a = sweep(seed, range(20, 30), threads=1)
    b = sweep(seed, range(20, 30), threads=4)
    assert a == b


def test_csv_and_dict():
    c = classified("uniform")
    d = c.to_dict()
    assert d["uniformly_perfect"] == "yes" and d["counts"]
    rows = classification_csv(family("uniform"), c).splitlines()
    assert len(rows) > 1
