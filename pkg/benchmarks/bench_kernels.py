"""Compare the compiled and numpy kernels for elementary symmetric polynomials.

    python benchmarks/bench_kernels.py --rows 20000 --n 3 6 8
"""
import argparse
import timeit

import numpy as np

from mhessian.kernels import backends


def bench(fn, lam, repeat):
    times = timeit.repeat(lambda: fn(lam), number=1, repeat=repeat)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20000, help="eigenvalue rows per call")
    ap.add_argument("--n", type=int, nargs="+", default=[3, 6, 8])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = backends()
    rng = np.random.default_rng(args.seed)
    print(f"backends: {', '.join(impls)}; rows per call: {args.rows}")
    print(f"{'kernel':<12}{'n':>3}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for n in args.n:
        lam = rng.standard_normal((args.rows, n))
        for kernel in ("esp", "deleted_esp"):
            res = {name: getattr(mod, kernel)(lam) for name, mod in impls.items()}
            ref = res["python"]
            for name, val in res.items():
                if not np.allclose(val, ref, rtol=1e-12, atol=1e-12):
                    raise SystemExit(f"{kernel} backends disagree for n={n} ({name})")
            t = {name: bench(getattr(mod, kernel), lam, args.repeat) for name, mod in impls.items()}
            speed = t["python"] / t["cython"] if "cython" in t else float("nan")
            print(f"{kernel:<12}{n:>3}" + "".join(f"{t[name] * 1e3:>10.2f}ms" for name in impls)
                  + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
