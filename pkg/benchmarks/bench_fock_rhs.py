"""Time the Fock-space master-equation right-hand side: compiled kernel vs NumPy.

Usage: python3 benchmarks/bench_fock_rhs.py [--n-max 8 12 16] [--repeat 20]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from doublelambda import fock_backend


def random_state(rng, n_max):
    dim = n_max + 1
    m = rng.normal(size=(dim * dim, dim * dim)) + 1j * rng.normal(size=(dim * dim, dim * dim))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    return np.ascontiguousarray(rho.reshape(dim, dim, dim, dim))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-max", type=int, nargs="+", default=[8, 12, 16])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    coeffs = np.array([complex(*rng.normal(size=2)) for _ in range(8)])
    kernels = {"numpy": fock_backend.numpy_master_rhs}
    if fock_backend.compiled_master_rhs is not None:
        kernels["compiled"] = fock_backend.compiled_master_rhs
    else:
        print("compiled kernel not built; timing the NumPy fallback only")

    print(f"{'n_max':>5} {'entries':>8} " + " ".join(f"{k + ' [ms]':>14}" for k in kernels)
          + f" {'speedup':>8} {'max diff':>9}")
    for n_max in args.n_max:
        rho = random_state(rng, n_max)
        times, outs = {}, {}
        for name, fn in kernels.items():
            outs[name] = fn(rho, coeffs)
            best = min(timeit.repeat(lambda: fn(rho, coeffs), number=1, repeat=args.repeat))
            times[name] = best * 1e3
        speed = times["numpy"] / times["compiled"] if "compiled" in times else float("nan")
        diff = (float(np.max(np.abs(outs["compiled"] - outs["numpy"])))
                if "compiled" in outs else float("nan"))
        print(f"{n_max:>5} {rho.size:>8} " + " ".join(f"{times[k]:>14.3f}" for k in kernels)
              + f" {speed:>8.2f} {diff:>9.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
