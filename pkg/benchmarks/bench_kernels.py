"""Compare the compiled and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--n 11] [--list 32] [--repeat 20]

Times SC, SCL and the systematic solver on a constructed BSC code with
source-coding LLRs, after checking that both backends agree bit for bit.
"""

import argparse
import importlib
import time

import numpy as np

from polarsw import _pykernels
from polarsw.decode import init_llrs
from polarsw.polar_core import bit_reversal_permutation, construct_code


def _time(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=11)
    ap.add_argument("--list", type=int, default=32)
    ap.add_argument("--p", type=float, default=0.07)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--fidelity", type=int, default=64)
    args = ap.parse_args()

    try:
        ck = importlib.import_module("polarsw._ckernels")
    except ImportError:
        ck = None
        print("compiled kernels not built; timing the python backend only")

    N = 1 << args.n
    spec = construct_code(args.n, N // 2, 0.09, args.fidelity, l_crc=16)
    rng = np.random.default_rng(1)
    z = (rng.random(N) < args.p).astype(np.uint8)
    perm = bit_reversal_permutation(args.n)
    llr = init_llrs(z, args.p, 16).values[perm]
    frozen = 1 - spec.info_mask
    fvals = np.zeros(N, dtype=np.uint8)
    xr = rng.integers(0, 2, N).astype(np.uint8)

    backends = [("python", _pykernels)] + ([("cython", ck)] if ck else [])
    if ck:
        a = _pykernels.scl(llr, frozen, fvals, args.list)
        b = ck.scl(llr, frozen, fvals, args.list)
        assert all(np.array_equal(u, v) for u, v in zip(a, b)), "backends disagree"

    cases = {
        "sc": lambda k: k.sc(llr, frozen, fvals),
        f"scl(L={args.list})": lambda k: k.scl(llr, frozen, fvals, args.list),
        "sys_solve": lambda k: k.sys_solve(xr, spec.info_mask, fvals),
        "butterfly": lambda k: k.butterfly(xr),
    }
    print(f"N={N}  K={spec.K}  p={args.p}  best of {args.repeat}")
    print(f"{'kernel':<12}" + "".join(f"{name:>14}" for name, _ in backends) + "   speedup")
    for label, fn in cases.items():
        times = []
        for _, k in backends:
            reps = max(1, args.repeat // 10) if k is _pykernels and "scl" in label else args.repeat
            times.append(_time(lambda: fn(k), reps))
        row = f"{label:<12}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"   {times[0] / times[1]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
