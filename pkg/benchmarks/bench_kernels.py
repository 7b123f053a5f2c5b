"""Compare the numba and numpy kernel paths.

Times the likelihood/gradient/Hessian kernel on compressed patterns, the
ancestral-sampling kernel, and one end-to-end greedy search. The numpy
numbers come from a subprocess started with ``ORDCD_DISABLE_NUMBA=1``,
because the backend is fixed at import time.

    python benchmarks/bench_kernels.py [--repeats 20]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best_of(fn, repeats):
    fn()  # warm-up (includes JIT compile on the numba path)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def measure(repeats):
    from ordcd import kernels
    from ordcd.regression import NodeSpec, compress, fit
    from ordcd.search import greedy_search
    from ordcd.simulate import simulate_dataset

    _, data = simulate_dataset(10, 10, 5, 1.0, 5000, seed=1)
    spec = NodeSpec.for_data(data, 1, (2, 3, 4))
    pat = compress(spec, data)
    model = fit(spec, data)
    phi = np.concatenate(([model.alpha], *model.betas, model.gammas))

    rng = np.random.default_rng(0)
    eta = rng.normal(size=200_000)
    cuts = np.array([-1.0, -0.3, 0.3, 1.0])
    u = rng.random(200_000)

    _, small = simulate_dataset(8, 8, 3, 1.0, 500, seed=2)
    return {
        "backend": kernels.BACKEND,
        "patterns": int(pat.cat.size),
        "nll_grad_hess_s": _best_of(
            lambda: kernels.nll_grad_hess(pat.cat, pat.bidx, pat.weight, phi, 5, 0, 2), repeats
        ),
        "sample_codes_s": _best_of(lambda: kernels.sample_codes(eta, cuts, u, 0), repeats),
        "greedy_p8_s": _best_of(lambda: greedy_search(small), max(1, repeats // 10)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(measure(args.repeats)))
        return
    rows = []
    for flag in ("0", "1"):
        env = dict(os.environ, ORDCD_DISABLE_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, __file__, "--child", "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True,
        )
        rows.append(json.loads(out.stdout))
    keys = ["nll_grad_hess_s", "sample_codes_s", "greedy_p8_s"]
    print(f"{'kernel':<18}" + "".join(f"{r['backend']:>12}" for r in rows) + f"{'speedup':>10}")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k:<18}{a * 1e3:>10.3f}ms{b * 1e3:>10.3f}ms{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
