"""Compiled vs numpy stepping core on the same Maxwell-Bloch segment.

    python benchmarks/bench_core.py --nz 64 --steps 20000

Both cores advance identical state through identical inputs; the script
reports wall time per call, cost per (z point x RK4 step), the speed-up and
the largest difference between the two results.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from eitfwm import _backend
from eitfwm.params import MediumParams, derive


def make_case(nz: int, steps: int):
    p = MediumParams.from_mhz(80, 150, 270e-6, omega_mhz=10).with_light_shift_cancelled()
    d = derive(p)
    dt = 0.8 * 0.1 / p.gamma
    t = -2.0 + 0.5 * dt * np.arange(2 * steps + 1)
    eps = np.exp(-4 * math.log(2) * (t / 1.5) ** 2).astype(complex)
    omega = np.full(t.size, p.omega)
    shift = (p.clebsch_ratio * omega) ** 2 / p.delta_hf
    return p, d, dt, eps, omega, shift


def run_once(fn, case, nz, steps):
    p, d, dt, eps, omega, shift = case
    n = nz + 1
    s = np.zeros(n, complex)
    pp = np.zeros(n, complex)
    trace_e = np.zeros(steps + 1, complex)
    trace_ep = np.zeros(steps + 1, complex)
    dummy = np.zeros((1, 1), complex)
    t0 = time.perf_counter()
    fn(s, pp, eps, eps.copy(), omega, shift, 0, steps, dt, 1.0 / nz, d.g,
       p.gamma0, p.gamma, p.delta, p.delta_hf, False,
       1, trace_e, trace_ep, 0, dummy, dummy, dummy, dummy, True, 1e12)
    return time.perf_counter() - t0, s, trace_e


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nz", type=int, default=64)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--python-steps", type=int, default=2000,
                    help="steps for the (slow) numpy core; timings are scaled per step")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"default backend: {_backend.BACKEND}")
    results = {}
    for name, steps in (("cython", args.steps), ("python", args.python_steps)):
        try:
            fn = _backend.get_run_segment(name)
        except ImportError as exc:
            print(f"{name:>7}: unavailable ({exc})")
            continue
        case = make_case(args.nz, steps)
        best = min(run_once(fn, case, args.nz, steps)[0] for _ in range(args.repeat))
        per_point = best / (steps * (args.nz + 1)) * 1e9
        results[name] = per_point
        print(f"{name:>7}: {best:8.3f} s for {steps} steps x {args.nz + 1} points  ->  {per_point:8.1f} ns/point-step")
    if len(results) == 2:
        print(f"speed-up: {results['python'] / results['cython']:.1f}x")
        case = make_case(args.nz, args.python_steps)
        _, s_c, e_c = run_once(_backend.get_run_segment("cython"), case, args.nz, args.python_steps)
        _, s_p, e_p = run_once(_backend.get_run_segment("python"), case, args.nz, args.python_steps)
        scale = max(np.abs(e_p).max(), 1e-300)
        print(f"max |difference| / max |output|: {np.abs(e_c - e_p).max() / scale:.2e} (trace), "
              f"{np.abs(s_c - s_p).max() / max(np.abs(s_p).max(), 1e-300):.2e} (spin wave)")


if __name__ == "__main__":
    main()
