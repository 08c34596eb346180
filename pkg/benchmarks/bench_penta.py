"""Time the compiled and pure-Python pentadiagonal kernels on the same inputs.

    python3 benchmarks/bench_penta.py [--sizes 500 2000 8000] [--steps 20]

Prints seconds per Crank-Nicolson step for the static (pre-factored) and
moving-potential (refactored every step) paths, the speed-up, and the
largest difference between the two results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from centralent.tdse import _backend
from centralent.tdse.solver import pentadiagonal_system


def _packet(n: int, h: float) -> np.ndarray:
    x = h * (np.arange(n) - n // 2)
    psi = np.exp(-(x**2) / (2 * (n * h / 12) ** 2) + 0.3j * x / h).astype(np.complex128)
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * h)


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n: int, steps: int, repeats: int) -> list[tuple]:
    h, rate, dt = 1.0, 0.5, 0.05
    coeffs = np.array([0.0, 1e-4, -2e-5, 1e-7])
    x = h * (np.arange(n) - n // 2)
    V = coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]))
    bands = pentadiagonal_system(n, h, rate, V, dt)
    psi0 = _packet(n, h)
    k = rate / (12 * h * h)
    rows = []
    results = {}
    for label, mod in (("compiled", _backend.kernels), ("python", _backend.python_kernels)):
        if label == "compiled" and _backend.BACKEND != "compiled":
            continue
        fac = mod.factor(*bands)
        def static(mod=mod, fac=fac):
            p = psi0.copy()
            mod.run_static(*fac[:4], *bands, p, steps)
            results[(label, "static")] = p

        def moving(mod=mod):
            p = psi0.copy()
            mod.run_moving(p, k, coeffs, float(x[0]), h, 0.2, dt, steps)
            results[(label, "moving")] = p

        rows.append((label, "static", _best_of(static, repeats) / steps))
        rows.append((label, "moving", _best_of(moving, repeats) / steps))
    diff = {}
    for path in ("static", "moving"):
        if ("compiled", path) in results:
            diff[path] = float(np.max(np.abs(results[("compiled", path)] - results[("python", path)])))
    return rows, diff


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000, 8000])
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    print(f"active backend: {_backend.BACKEND}")
    print(f"{'points':>8} {'path':>7} {'compiled s/step':>16} {'python s/step':>14} {'speed-up':>9} {'max |diff|':>11}")
    for n in args.sizes:
        rows, diff = bench(n, args.steps, args.repeats)
        t = {(lab, path): s for lab, path, s in rows}
        for path in ("static", "moving"):
            c = t.get(("compiled", path), float("nan"))
            p = t[("python", path)]
            print(f"{n:8d} {path:>7} {c:16.3e} {p:14.3e} {p / c:9.1f} {diff.get(path, float('nan')):11.2e}")


if __name__ == "__main__":
    main()
