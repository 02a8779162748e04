"""Timing of the compiled kernels against their numpy twins.

Run: python benchmarks/bench_kernels.py [--repeats 5]

Both backends are called directly from ``kink_spectra._kernels`` so a single
process can compare them; ``KINK_SPECTRA_NO_NUMBA`` only changes which one the
package dispatches to.
"""
import argparse
import time

import numpy as np

from kink_spectra import _kernels as K


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    nch, ny = 201, 161
    F = rng.standard_normal((nch, ny)) + 1j * rng.standard_normal((nch, ny))
    ks = np.sqrt(np.linspace(0.5, 400.0, nch)).astype(complex)
    f = rng.standard_normal(ny) + 0j
    nx, nyw = 201, 401
    pot = rng.uniform(1.0, 4.0, (nx, nyw))
    cg = rng.uniform(-0.1, 0.1, (nx, nyw))
    cs = np.zeros((nx, nyw))
    phi0 = rng.standard_normal((nx, nyw))
    v0 = rng.standard_normal((nx, nyw))

    def leap(fn):
        def go():
            phi, v = phi0.copy(), v0.copy()
            fn(phi, v, pot, cg, cs, 0.03, 0.1, 0.1, 50)
        return go

    yield "exp_conv 201x161", lambda: K.exp_conv_sweep_numpy(F, ks, 0.1), \
        (lambda: K._exp_conv_numba_wrapper(F, ks, 0.1)) if K.HAVE_NUMBA else None
    yield "reg_conv 161", lambda: K.reg_conv_numpy(f, 0.3 + 0.1j, 0.1), \
        (lambda: K._reg_conv_numba_wrapper(f, 0.3 + 0.1j, 0.1)) if K.HAVE_NUMBA else None
    yield "leapfrog 201x401 x50", leap(K.leapfrog_numpy), leap(K._leapfrog_numba) if K.HAVE_NUMBA else None


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, np_fn, nb_fn in cases(rng):
        t_np = best_of(np_fn, args.repeats)
        if nb_fn is None:
            print(f"{name:<24}{1e3 * t_np:12.3f}{'n/a':>12}{'':>10}")
            continue
        nb_fn()  # compile
        t_nb = best_of(nb_fn, args.repeats)
        print(f"{name:<24}{1e3 * t_np:12.3f}{1e3 * t_nb:12.3f}{t_np / t_nb:10.1f}x")


if __name__ == "__main__":
    main()
