"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each kernel runs on identical inputs under both backends; the script
checks that the outputs agree and prints the best-of-N wall time and
the speedup.
"""
import argparse
import json
import time

import numpy as np

from junta_probe.kernels import available_backends, get_backend


def _best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    for m in (8, 24, 48):
        B = rng.standard_normal((m, m))
        A = (B + B.T) / 2
        yield f"jacobi_eigh m={m}", "jacobi_eigh", (A,)
    net1 = np.arange(-2000, 2001, dtype=np.float64)[:, None] * 0.01
    yield "nearest_index 1d net=4001 q=20000", "nearest_index", (net1, rng.uniform(-25, 25, (20000, 1)))
    g = np.arange(-20, 21) * 0.1
    net2 = np.array([(a, b) for a in g for b in g])
    yield "nearest_index 2d net=1681 q=5000", "nearest_index", (net2, rng.uniform(-2, 2, (5000, 2)))
    cand = np.array([(a, b) for a in np.arange(-40, 41) * 0.05 for b in np.arange(-40, 41) * 0.05])
    yield "greedy_packing 2d cand=6561", "greedy_packing", (cand, 0.12)
    yield "greedy_packing 1d cand=20001", "greedy_packing", (np.linspace(-10, 10, 20001)[:, None], 0.0035)


def _same(name, a, b):
    if name == "jacobi_eigh":
        return np.allclose(np.sort(a[0]), np.sort(b[0]), atol=1e-10)
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the pure-Python timings are shown")
    rows = []
    print(f"{'case':40s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup  agree")
    for label, kernel, inputs in cases(np.random.default_rng(args.seed)):
        times, outs = {}, {}
        for b in backends:
            fn = getattr(get_backend(b), kernel)
            times[b], outs[b] = _best_time(lambda: fn(*inputs), args.repeat)
        agree = all(_same(kernel, outs["python"], outs[b]) for b in backends)
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:40s} " + " ".join(f"{times[b]:10.4f}" for b in backends)
              + f"   {speed:7.1f}x  {agree}")
        rows.append({"case": label, "times": times, "speedup": speed, "agree": agree})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
