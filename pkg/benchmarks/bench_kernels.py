"""Compiled kernel vs. numpy fallback on single transits and one sweep.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

from stormpath.experiment import preset, run_sweep
from stormpath.precip import SimConfig
from stormpath.transit import BACKENDS, run_transit

CASES = {
    "250 drops, slow body": SimConfig(drop_count=250, body_speed=0.001),
    "1000 drops, slow body": SimConfig(drop_count=1000, body_speed=0.001),
    "1000 drops, wind, fast": SimConfig(drop_count=1000, wind_speed=0.01, body_speed=0.02),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "compiled" not in BACKENDS:
        print("compiled kernel not built; only the fallback is timed")

    print(f"{'case':<28}{'detector':<10}" + "".join(f"{b:>12}" for b in BACKENDS) + "   speedup")
    for label, cfg in CASES.items():
        for det in ("grid", "brute"):
            t = {b: best_of(lambda: run_transit(cfg, 7, det, b), args.repeat) for b in BACKENDS}
            speedup = t["python"] / t["compiled"] if "compiled" in t else 1.0
            cells = "".join(f"{t[b] * 1e3:>10.1f}ms" for b in BACKENDS)
            print(f"{label:<28}{det:<10}{cells}   {speedup:6.1f}x")

    spec = preset("fig1a", master_seed=0xD1CE)
    t = {b: best_of(lambda: run_sweep(spec, backend=b), 1) for b in BACKENDS}
    cells = "".join(f"{t[b]:>11.2f}s" for b in BACKENDS)
    speedup = t["python"] / t["compiled"] if "compiled" in t else 1.0
    print(f"{'fig1a sweep (120 runs)':<28}{'grid':<10}{cells}   {speedup:6.1f}x")


if __name__ == "__main__":
    main()
