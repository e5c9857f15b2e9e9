"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat 5] [--no-scenarios]

Micro-benchmarks call each backend directly. Scenario timings run the CLI in
a subprocess, once normally and once with ABSIM_PURE_PYTHON=1.
"""
import argparse
import math
import os
import subprocess
import sys
import tempfile
import timeit

import numpy as np

from absim.kernels import available_backends
from absim.ship import Ship, SpeedMap

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def micro_cases(k, ship):
    P = ship.vector
    n = SpeedMap(ship, 5.0).rps(3.0)
    state = (0.0, 0.0, 0.0, 3.0, 0.1, 0.005)
    deltas = np.full(20, 0.1)
    offs = np.radians([0, -15, 15, -30, 30, -45, 45, -60, 60, -75, 75, -90, 90])
    mults = np.array([1.0, 0.5, 0.0])
    nsamp = 61
    obs = np.empty(4 * nsamp * 3)
    for i in range(3):
        for j in range(nsamp):
            obs[4 * (i * nsamp + j):4 * (i * nsamp + j) + 4] = (1500 - 2.5 * 5 * j, 50.0 * i, -2.5, 0.0)
    codes = np.array([1, 0, 0], dtype=np.int64)
    prm = np.array([5.0, 15.0, 30.0, 10.0, 100.0, 400.0, 5.0, 2.0, 1.0, 2.0, 0.1, 3.0, 0.0])
    return {
        "hull_forces": (lambda: k.hull_forces(3.0, 0.1, 0.005, P), 20000),
        "rk4_step": (lambda: k.rk4_step(state, 0.1, n, 1.0, P), 5000),
        "rollout(200)": (lambda: k.rollout(state, 0.1, n, 1.0, 200, P), 50),
        "nomoto_cost_grad(N=20)": (lambda: k.nomoto_cost_grad(0.0, 0.0, 0.0, 0.3, deltas, 1.0, 0.035, 15.5,
                                                              0.0, 1.0, 0.01, math.radians(3), 100.0, True), 5000),
        "sbmpc_grid(39 cand, 3 obs)": (lambda: k.sbmpc_grid_costs(0.0, 0.0, 0.0, 3.0, 0.0, 3.0, offs, mults, obs,
                                                                  codes, nsamp, prm), 20),
    }


def run_micro(repeat):
    ship = Ship.default(water_depth=5.0)
    backends = available_backends()
    names = [b.BACKEND for b in backends]
    rows = {}
    for k in backends:
        for name, (fn, number) in micro_cases(k, ship).items():
            best = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
            rows.setdefault(name, {})[k.BACKEND] = best
    print(f"{'kernel':30s}" + "".join(f"{n:>14s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for name, t in rows.items():
        line = f"{name:30s}" + "".join(f"{t[n] * 1e6:11.2f} us" for n in names)
        if len(names) > 1:
            line += f"{t[names[1]] / t[names[0]]:11.1f}x"
        print(line)
    if len(names) == 1:
        print("(compiled kernel not built; only the fallback was timed)")


def run_scenarios():
    scen = [os.path.join(ROOT, "scenarios", s) for s in
            ("straight_route.json", "headon_colav.json", "dogleg_mpc.json", "ghent_synthetic.json")]
    print(f"\n{'scenario':30s}{'compiled':>12s}{'python':>12s}")
    for path in scen:
        times = []
        for pure in ("0", "1"):
            env = dict(os.environ, ABSIM_PURE_PYTHON=pure)
            with tempfile.TemporaryDirectory() as out:
                code = ("import sys, time; from absim.cli import main; t = time.perf_counter(); "
                        f"rc = main(['run', {path!r}, '--out', {out!r}, '--quiet', '--no-render']); "
                        "print(time.perf_counter() - t); sys.exit(rc)")
                proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
                times.append(float(proc.stdout.strip().splitlines()[-1]) if proc.returncode == 0 else float("nan"))
        print(f"{os.path.basename(path):30s}{times[0]:11.2f}s{times[1]:11.2f}s")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-scenarios", action="store_true")
    args = ap.parse_args(argv)
    run_micro(args.repeat)
    if not args.no_scenarios:
        run_scenarios()


if __name__ == "__main__":
    main()
