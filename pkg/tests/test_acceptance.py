"""End-to-end acceptance checks; one summary line per criterion is printed at the end."""
import hashlib
import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import family
from shapes import random_annulus, random_curve
from wandering import cli, config
from wandering.classify import separating_annulus, trichotomy
from wandering.critical import critical_value_ratio, locate_thm2, locate_thm4, thm2_bracket_signs
from wandering.evaluator import EvalConfig, zero_count
from wandering.geometry import (RoundAnnulus, core_circle_length, length_lower_bound,
                                polyline_hyperbolic_length)
from wandering.families import FamilySpec, PRule, build
from wandering.verify import find_epsilon, verify_baker1988, verify_ring_thm4, verify_thm2

crit = pytest.mark.criterion


def _classify_bundled(name, threads=1):
    cfg = config.load(name)
    seq = build(cfg.family)
    return trichotomy(seq, cfg.window, cfg.margin, cfg=cfg.eval, threads=threads)


# 1 ---------------------------------------------------------------------------

@crit(1, "seed family: infinitely connected, not uniformly perfect, <= 60 s")
def test_seed_family_classification():
    t0 = time.perf_counter()
    seq = build(FamilySpec("baker1976", 1 / (4 * math.e), N=2, r1=11.0, k_max=84))
    c = trichotomy(seq, (10, 80), threads=1)
    elapsed = time.perf_counter() - t0
    assert c.connectivity == "infinite"
    assert c.uniformly_perfect == "no"
    assert elapsed <= 60.0


# 2 ---------------------------------------------------------------------------

@crit(2, "trichotomy verdicts for the three bundled k P_k regimes")
@pytest.mark.parametrize("name,up", [("baker1976.cfg", "no"), ("thm4_vanishing.cfg", "no"),
                                     ("thm4_uniform.cfg", "yes")])
def test_trichotomy_coverage(name, up):
    c = _classify_bundled(name, threads=min(8, os.cpu_count() or 1))
    assert c.connectivity == "infinite"
    assert c.uniformly_perfect == up


# 3 ---------------------------------------------------------------------------

@crit(3, "critical-point correction delta_k small and shrinking, residual <= 1e-8")
def test_critical_point_asymptotic(seed):
    cps = {k: locate_thm4(seed, k) for k in range(2, seed.last)}
    deltas = [abs(cps[k].delta_k) for k in range(15, 61)]
    assert max(deltas) <= 0.2
    span = 10
    trailing = [max(deltas[i:i + span]) for i in range(len(deltas) - span + 1)]
    assert all(a >= b for a, b in zip(trailing, trailing[1:]))
    assert max(cp.residual for cp in cps.values()) <= 1e-8


# 4 ---------------------------------------------------------------------------

@crit(4, "critical values: |f(c_k)| 2ekP_k/(|C| r_{k+1}) in [0.9, 1.1]")
@pytest.mark.parametrize("name", ["baker1976", "uniform"])
def test_critical_value_asymptotic(name):
    seq = family(name)
    for k in range(30, 61):
        cp = locate_thm4(seq, k)
        ratio = math.exp(critical_value_ratio(seq, cp))
        assert 0.9 <= ratio <= 1.1, (k, ratio)
        if name == "uniform":
            assert 1.8 <= math.exp(cp.ratio_next) <= 2.2, k


# 5 ---------------------------------------------------------------------------

@crit(5, "ring inclusion: epsilon <= 0.3, non-increasing, stable at 4x samples")
def test_ring_inclusion(seed):
    eps = {k: find_epsilon(seed, k) for k in range(20, 61)}
    assert all(e is not None and e <= 0.3 for e in eps.values())
    tail = [eps[k] for k in range(30, 61)]
    assert all(a >= b for a, b in zip(tail, tail[1:]))
    fine = EvalConfig(samples=4 * 4096)
    assert all(verify_ring_thm4(seed, k, eps[k], fine).passed for k in range(20, 61))


# 6 ---------------------------------------------------------------------------

@crit(6, "q0 = 100 suite: inclusions, bracket signs, criterion near 1/(4 pi)")
def test_tower_checks(tower):
    ks = [k for k in range(0, tower.last + 1) if tower.has(k + 2)]
    assert max(ks) == 6
    failed = {k: {n: v for n, v in verify_thm2(tower, k).margins.items() if v <= 0}
              for k in ks}
    assert not any(failed.values()), failed


@crit(6, "q0 = 100 suite: inclusions, bracket signs, criterion near 1/(4 pi)")
def test_tower_bracket_and_criterion(tower):
    for j in range(1, tower.last):
        gx, gy = thm2_bracket_signs(tower, j)
        assert gx > 0 > gy
    k = tower.last - 2
    a = separating_annulus(tower, k, {}, {})
    assert abs(a.criterion - 1 / (4 * math.pi)) <= 0.15 / (4 * math.pi)
    cp = locate_thm2(tower, k)
    assert cp.residual <= 1e-8


# 7 ---------------------------------------------------------------------------

@crit(7, "N = 0 example: f(B_k) in B_{k+1}, critical values, exact growth")
def test_double_zero_inclusion(dbl):
    bad = [k for k in range(15, 51) if not verify_baker1988(dbl, k).passed]
    assert not bad


@crit(7, "N = 0 example: f(B_k) in B_{k+1}, critical values, exact growth")
def test_double_zero_critical_values(dbl):
    ratios = {k: math.exp(critical_value_ratio(dbl, locate_thm4(dbl, k))) for k in range(30, 51)}
    off = {k: r for k, r in ratios.items() if not 0.9 <= r <= 1.1}
    assert not off, off


@crit(7, "N = 0 example: f(B_k) in B_{k+1}, critical values, exact growth")
def test_double_zero_growth(dbl):
    # log r_{k+1} - 2 log r_k - k log 2 > 0 with log 2 rounded up
    log2_hi = Fraction(math.log(2)) + Fraction(1, 10 ** 15)
    for k in range(15, 51):
        assert Fraction(dbl.L(k + 1)) - 2 * Fraction(dbl.L(k)) - k * log2_hi > 0


# 8 ---------------------------------------------------------------------------

def _admissible_radius(rng, seq):
    i = int(rng.integers(-1, len(seq.log_r) - 1))
    if i < 0:
        return float(seq.log_r[0]) - rng.uniform(0.5, 5.0)
    lo, hi = float(seq.log_r[i]), float(seq.log_r[i + 1])
    return lo + (hi - lo) * rng.uniform(0.05, 0.95)


@crit(8, "argument-principle count equals multiplicity sum (50 radii, 4 kinds)")
def test_zero_count_oracle():
    rng = np.random.default_rng(20261016)
    seqs = [family("baker1976"), family("uniform"), family("tower"), family("baker1988")]
    mismatches = []
    for i in range(50):
        seq = seqs[i % 4]
        r = _admissible_radius(rng, seq)
        expected = seq.origin_mult + sum(int(m) for L, m in zip(seq.log_r, seq.mult) if L < r)
        got = zero_count(seq, r)
        if got != expected:
            mismatches.append((seq.kind, r, got, expected))
    assert not mismatches


# 9 ---------------------------------------------------------------------------

@crit(9, "hyperbolic length of closed curves respects the winding bound")
def test_length_bound_embodiment():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = random_annulus(rng)
        for n in (0, 1, 2, 5):
            pts = random_curve(rng, a, n)
            if rng.random() < 0.5:
                pts = pts[::-1]
            L = polyline_hyperbolic_length(pts, a, closed=True)
            assert L >= length_lower_bound(n, a) * (1 - 1e-6)
        t = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
        core = polyline_hyperbolic_length(np.exp(a.log_core + 1j * t), a, closed=True)
        assert abs(core - length_lower_bound(1, a)) <= 1e-5 * core_circle_length(a)


# 10 --------------------------------------------------------------------------

def _digest(out):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(out.iterdir())}


@pytest.mark.slow
@crit(10, "byte-identical pipeline outputs across runs and thread counts")
@pytest.mark.parametrize("name", config.bundled())
def test_determinism(tmp_path, name):
    runs = []
    for tag, threads in (("a", 8), ("b", 8), ("c", 1)):
        out = tmp_path / tag
        assert cli.main(["run", "--config", name, "--out", str(out), "--threads", str(threads)]) == 0
        runs.append(_digest(out))
    assert "render.ppm" in runs[0]
    assert runs[0] == runs[1] == runs[2]
