"""Time the numba and numpy backends on the hot paths.

Run with:  python benchmarks/benchmark_backends.py
"""

import time

import numpy as np

from eolstop import (
    CostParameters,
    LostSalesConvention,
    ModelSpec,
    build_kernel_table,
    build_named_intensity,
    evaluate_policy,
    solve,
)
from eolstop._backends import _HAS_NUMBA


def timeit(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    model = build_named_intensity("convex", 50, 500.0)
    params = CostParameters(c_bar=100, K=1000, c1=1, c2_bar=200, c3_bar=200,
                            gamma=0.01, c4=25, delta=0.005, horizon=50)
    kt = build_kernel_table(params, model, LostSalesConvention.ARRIVAL, x_max=1200)
    spec = ModelSpec.parse("D/inf/F")

    backends = ["numpy"] + (["numba"] if _HAS_NUMBA else [])
    if _HAS_NUMBA:  # trigger jit compilation outside the timed region
        solve(spec, kt, 0, backend="numba")

    print(f"{'task':<34}" + "".join(f"{b:>12}" for b in backends))
    rows = {
        "DP solve D/inf/F (T=50, X=1200)": lambda b: solve(spec, kt, 0, backend=b),
        "DP solve S/1/Z sweep": lambda b: solve(ModelSpec.parse("S/1/Z"), kt, 0, backend=b),
    }
    results = {}
    for name, fn in rows.items():
        times = []
        for b in backends:
            t, out = timeit(lambda: fn(b))
            times.append(t)
            results.setdefault(name, {})[b] = out.total_cost
        print(f"{name:<34}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times))
    for name, vals in results.items():
        spread = max(vals.values()) - min(vals.values())
        assert spread <= 1e-6 * max(abs(v) for v in vals.values()), (name, vals)

    res = solve(spec, kt, 0)
    if _HAS_NUMBA:
        evaluate_policy(res.policy, params, model, 0, paths=100, seed=1, backend="numba")
    times = []
    means = []
    for b in backends:
        t, est = timeit(
            lambda: evaluate_policy(res.policy, params, model, 0, paths=50_000, seed=7, backend=b),
            repeat=2,
        )
        times.append(t)
        means.append(est.mean)
    print(f"{'simulate 50k paths (T=50)':<34}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times))
    assert abs(max(means) - min(means)) <= 1e-6 * abs(means[0]), means
    print("backend outputs agree")


if __name__ == "__main__":
    main()
