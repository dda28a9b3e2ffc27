"""Time the compiled example-system kernels against their pure-numpy versions.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Also times a full pendulum run (1000 steps) under the active backend; run it
again with DIRACRED_NO_NUMBA=1 to compare end to end.
"""
import argparse
import time
import timeit

import numpy as np

from diracred import tulczyjew as tz
from diracred._jit import NUMBA_ENABLED
from diracred.integrator import run
from diracred.lagrangian import ReducedLagrangianPlus
from diracred.systems import PendulumParams, pendulum_system
from diracred.systems import _kernels as K


def _per_call(fn, args, repeat):
    fn(*args)  # warm up / compile
    n = max(1, repeat)
    return min(timeit.repeat(lambda: fn(*args), number=n, repeat=5)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    u0, du = rng.normal(size=4), 0.05 * rng.normal(size=4)
    cases = [
        ("charged_grad", K.charged_grad, (u0, du, 0.1, np.array([1.0, 1.0]))),
        ("charged_hess", K.charged_hess, (u0, du, 0.1, np.array([1.0, 1.0]))),
        ("midpoint_grad", K.midpoint_grad, (u0, du, 0.01, PendulumParams().coefficients())),
        ("midpoint_hess", K.midpoint_hess, (u0, du, 0.01, PendulumParams().coefficients())),
    ]
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"{'kernel':<16}{'numpy [us]':>12}{'numba [us]':>12}{'speedup':>10}")
    for name, fn, a in cases:
        py = getattr(fn, "py_func", fn)
        t_py = _per_call(py, a, args.repeat // 10)
        if NUMBA_ENABLED:
            t_jit = _per_call(fn, a, args.repeat)
            print(f"{name:<16}{1e6 * t_py:>12.2f}{1e6 * t_jit:>12.2f}{t_py / t_jit:>10.1f}")
        else:
            print(f"{name:<16}{1e6 * t_py:>12.2f}{'-':>12}{'-':>10}")

    params = PendulumParams(T=10.0)
    L, c, ic = pendulum_system(params)
    rl = ReducedLagrangianPlus(L, c)
    state = tz.ReducedState(ic.q.x, ic.w, ic.mu)
    run(rl, state, ic.q.g, 5, h=params.h)
    t0 = time.perf_counter()
    tr = run(rl, state, ic.q.g, params.n_steps, h=params.h)
    print(f"pendulum run: {tr.n_steps} steps in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
