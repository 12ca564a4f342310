"""Time the compiled and pure-Python coordinate-descent kernels on the same
elastic-net paths and check that they agree.

    python benchmarks/bench_cd.py [--n 80] [--p 100] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sweetspot import _cd_py, cd
from sweetspot.models import _gram, lambda_max


def problem(n: int, p: int, seed: int):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p)) @ (np.eye(p) + 0.2 * rng.normal(size=(p, p)))
    X = (X - X.mean(0)) / X.std(0, ddof=1)
    beta = rng.normal(size=p) * (rng.random(p) < 0.1)
    y = X @ beta + rng.normal(size=n)
    return X, y


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=80)
    ap.add_argument("--p", type=int, default=100)
    ap.add_argument("--n-lambda", type=int, default=50)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    X, y = problem(args.n, args.p, args.seed)
    G, q, _, _ = _gram(X, y)
    lams = lambda_max(X, y, args.alpha) * np.logspace(0, -3, args.n_lambda)

    print(f"compiled backend active: {cd.BACKEND == 'cython'}")
    print(f"problem: n={args.n} p={args.p} path of {args.n_lambda} penalties, alpha={args.alpha}")
    rows = [("python", _cd_py.enet_path_gram)]
    if cd.BACKEND == "cython":
        rows.insert(0, ("cython", cd.enet_path_gram))
    results = {}
    for name, fn in rows:
        out = fn(G, q, lams, args.alpha)
        secs = best_of(lambda fn=fn: fn(G, q, lams, args.alpha), args.repeats)
        results[name] = (out, secs)
        print(f"{name:>7}: {secs * 1e3:10.2f} ms per path, {int(np.sum(out[1]))} sweeps")
    if len(results) == 2:
        diff = float(np.abs(results["cython"][0][0] - results["python"][0][0]).max())
        print(f"speed-up: {results['python'][1] / results['cython'][1]:.1f}x, max |coef difference| = {diff:.2e}")


if __name__ == "__main__":
    main()
