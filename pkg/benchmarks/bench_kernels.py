"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--points 4096]
"""
import argparse
import math
import time

import numpy as np

from wandering import kernels
from wandering.evaluator import frame
from wandering.families import FamilySpec, build
from wandering.render import RenderSpec, layers, orbit_table


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=4096)
    args = ap.parse_args()

    seq = build(FamilySpec("baker1976", 1 / (4 * math.e), N=2, r1=11.0, k_max=84))
    k = 40
    fr = frame(seq, k, -1.0, 1.0, 1e-12, 0.0)
    t = np.linspace(0, 2 * np.pi, args.points, endpoint=False)
    lw = 0.3 + 1j * t
    table = orbit_table(seq)
    spec = RenderSpec(seq.L(20) - 0.5, seq.L(23) + 0.5, 128, 32, 32, 26)

    cases = {
        "factor_sum": lambda: kernels.factor_sum(lw, fr.shift, fr.mult, fr.below),
        "logderiv_sum": lambda: kernels.logderiv_sum(lw, fr.shift, fr.mult, fr.below),
        "orbit_layers": lambda: layers(seq, spec, table=table),
    }
    names = sorted(kernels.BACKENDS)
    print(f"{len(fr.shift)} factors, {args.points} points, image {spec.width}x{spec.height}")
    print(f"{'kernel':<14}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    prev = kernels.backend_name()
    try:
        for case, fn in cases.items():
            row = {}
            for n in names:
                kernels.use_backend(n)
                row[n] = best_of(fn, args.repeat)
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            print(f"{case:<14}" + "".join(f"{row[n] * 1e3:>10.2f}ms" for n in names) + f"{speed:>11.1f}x")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
