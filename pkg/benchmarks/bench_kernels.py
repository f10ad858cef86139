"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times each kernel directly on both implementations, then runs an
end-to-end solve and evaluation in a subprocess per backend (the backend
is fixed at import time through SPCANET_BACKEND).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from spcanet import _pykernels

try:
    from spcanet import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time
import numpy as np
import spcanet
from spcanet.admm import solve, SolverParams
from spcanet.linalg import center_rows
from spcanet.synth import synth
from spcanet.ufs import evaluate
data, labels, _ = synth(seed=0)
a = center_rows(data)
t0 = time.perf_counter()
x = solve(a, 4, SolverParams(max_iters=300, tol=0.0)).x
t1 = time.perf_counter()
evaluate(a, labels, x, repeats=10)
t2 = time.perf_counter()
print(spcanet.BACKEND, t1 - t0, t2 - t1)
"""


def cases(rng):
    b = rng.standard_normal((1000, 10))
    dual, x, aux = (rng.standard_normal((1000, 10)) for _ in range(3))
    samples = rng.standard_normal((1440, 90))
    centroids = samples[:20].copy()
    labels = rng.integers(0, 20, 1440).astype(np.intp)
    t = rng.integers(0, 20, 1440).astype(np.intp)
    return [
        ("soft_threshold 1000x10", lambda k: k.soft_threshold(b, 0.5)),
        ("group_soft_threshold 1000x10", lambda k: k.group_soft_threshold(b, 0.5)),
        ("dual_ascent 1000x10", lambda k: k.dual_ascent(dual, x, aux, 1.0)),
        ("assign_labels 1440x90, c=20", lambda k: k.assign_labels(samples, centroids)),
        ("update_centroids 1440x90, c=20", lambda k: k.update_centroids(samples, labels, 20)),
        ("contingency n=1440, 20x20", lambda k: k.contingency(t, labels, 20, 20)),
    ]


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"{'kernel':34s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, call in cases(rng):
        py = best_time(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:34s} {py * 1e6:10.1f}us {'n/a':>12s}")
            continue
        cy = best_time(lambda: call(_ckernels), args.repeat)
        print(f"{name:34s} {py * 1e6:10.1f}us {cy * 1e6:10.1f}us {py / cy:7.2f}x")

    print()
    print(f"{'end to end (synth d=100 n=200)':34s} {'solve 300it':>12s} {'evaluate':>12s}")
    for backend in ("python", "cython"):
        env = dict(os.environ, SPCANET_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{backend:34s} unavailable")
            continue
        name, solve_s, eval_s = proc.stdout.split()
        print(f"{name:34s} {float(solve_s):11.3f}s {float(eval_s):11.3f}s")


if __name__ == "__main__":
    main()
