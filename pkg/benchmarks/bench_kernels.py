"""Compiled vs. fallback timings for the hot loops.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each mode runs in a fresh interpreter so the import-time switch
(``PUSHSAFE_DISABLE_NUMBA``) takes effect.  The compiled timings exclude
JIT compilation (one warm-up call first).
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from pushsafe import _accel
from pushsafe.model import OperationPoint, VehicleParams
from pushsafe.safety import calibrate_limits, zone_table
from pushsafe.sim import SimConfig, run_to_equilibrium

repeat = int(sys.argv[1])
params = VehicleParams()
limits = calibrate_limits(params)
cfg = SimConfig(window_s=1e9)  # never converge early: always the full 10 s horizon


def best(fn):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


sim = best(lambda: run_to_equilibrium(OperationPoint(60.0, 10.0), params, limits, cfg))
zones = best(lambda: zone_table([10.0, 30.0, 60.0, 80.0, 90.0], params, limits))
print(json.dumps({"numba": _accel.USE_NUMBA, "sim_10s_run": sim, "zone_table_5": zones}))
"""


def run_mode(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, PUSHSAFE_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run_mode(False, args.repeat)
    slow = run_mode(True, args.repeat)
    print(f"{'workload':<16}{'numba [s]':>12}{'fallback [s]':>14}{'speed-up':>10}")
    for key in ("sim_10s_run", "zone_table_5"):
        print(f"{key:<16}{fast[key]:>12.4f}{slow[key]:>14.4f}{slow[key] / fast[key]:>9.1f}x")
    if not fast["numba"]:
        print("note: numba unavailable, both columns ran the fallback")


if __name__ == "__main__":
    main()
