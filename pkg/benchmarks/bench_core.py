"""Benchmark: compiled kernels against the pure-NumPy fallback.

Times the three hot kernels and two end-to-end solves under the active
backend, then re-executes itself with RELENT_PURE_PYTHON=1 and prints the
side-by-side comparison.

Usage: python benchmarks/bench_core.py [--inner]
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def _setup(d, seed=0):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    rho /= rho.trace().real
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    sig = h @ h.conj().T
    sig /= sig.trace().real
    k = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    om = k @ k.conj().T
    om /= om.trace().real
    p, up = np.linalg.eigh(rho)
    p = np.ascontiguousarray(np.maximum(p, 0.0))
    plogp = float((p[p > 0] * np.log(p[p > 0])).sum())
    return p, np.ascontiguousarray(up), plogp, np.ascontiguousarray(sig.mat if hasattr(sig, 'mat') else sig), np.ascontiguousarray(om)


def _time(fn, reps):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def run_inner():
    from relent import HermitianOp, Sep, SolverConfig, core_backend, minimize_primal, pure_state
    from relent import _core

    results = {"backend": core_backend()}
    for d, reps in [(4, 2000), (16, 500), (64, 50)]:
        p, up, plogp, sig, om = _setup(d)
        a = np.ascontiguousarray(sig)
        results[f"eigh_d{d}_us"] = _time(lambda: _core.eigh(a), reps) * 1e6
        results[f"relent_d{d}_us"] = _time(
            lambda: _core.relent_fixed(p, up, plogp, 1.0, a), reps) * 1e6
        direction = np.ascontiguousarray(om - sig)
        results[f"linesearch_d{d}_us"] = _time(
            lambda: _core.line_search_dir(p, up, plogp, 1.0, a, direction, 1.0),
            max(reps // 20, 5)) * 1e6

    cfg = SolverConfig(max_iters=200, tol=1e-6, lmo_restarts=12, seed=3)
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / np.sqrt(2)
    bell = pure_state(phi, (2, 2))
    results["solve_bell_ms"] = _time(
        lambda: minimize_primal(bell, Sep((2, 2), (0,)), cfg), 5) * 1e3

    rng = np.random.default_rng(7)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = g @ g.conj().T
    m /= m.trace().real
    mixed = HermitianOp((2, 2), m)
    results["solve_mixed_ms"] = _time(
        lambda: minimize_primal(mixed, Sep((2, 2), (0,)), cfg), 3) * 1e3
    print(json.dumps(results))


def main():
    if "--inner" in sys.argv:
        run_inner()
        return
    here = os.path.abspath(__file__)
    rows = {}
    for label, env_val in [("compiled", "0"), ("fallback", "1")]:
        env = dict(os.environ, RELENT_PURE_PYTHON=env_val)
        out = subprocess.run([sys.executable, here, "--inner"], env=env,
                             capture_output=True, text=True, check=True)
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])
    keys = [k for k in rows["compiled"] if k != "backend"]
    print(f"{'kernel':<22}{'compiled':>14}{'fallback':>14}{'speedup':>10}")
    for k in keys:
        c, f = rows["compiled"][k], rows["fallback"][k]
        print(f"{k:<22}{c:>14.2f}{f:>14.2f}{f / c:>10.1f}x")
    if rows["compiled"].get("backend") != "compiled":
        print("note: compiled extension unavailable; both columns ran the fallback")


if __name__ == "__main__":
    main()
