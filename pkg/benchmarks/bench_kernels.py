#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

Builds representative workloads (a 14-year monthly run, sub-monthly averaged
and sensitivity solves, the RK4 oracle, and a controlled run) and times each
kernel on both paths. Run with SOCCHANGE_NO_NUMBA unset so both variants are
importable.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from socchange import _kernels  # noqa: E402
from socchange.pools import SoilParams, build_matrices  # noqa: E402
from socchange.stepping import phi1_scalar  # noqa: E402


def build_workloads():
    params = SoilParams.for_site(50.0, 23.0, 1.44)
    mats = build_matrices(params)
    rng = np.random.default_rng(0)

    n_months = 14 * 12
    taus = rng.uniform(0.4, 0.7, n_months)
    eks = np.exp(-taus[:, None] * mats.k[None, :])
    phivs = phi1_scalar(-taus[:, None] * mats.k[None, :])
    fmats = mats.Lambda[None] + mats.i_minus_lambda[None] * eks[:, None, :]
    phimats = (mats.i_minus_lambda[None] * phivs[:, None, :]) \
        @ mats.i_minus_lambda_inv
    gvecs = 0.01 * rng.standard_normal((n_months, 4))

    dt = 1e-3
    nsub = int(12 / dt)
    fconst = mats.Lambda + mats.i_minus_lambda @ np.diag(
        np.exp(-dt * 0.5 * mats.k))
    phconst = dt * (mats.i_minus_lambda @ np.diag(phi1_scalar(-dt * 0.5 * mats.k))
                    @ mats.i_minus_lambda_inv)
    gconst = phconst @ (4e-4 * mats.a_g)

    amats = 0.5 * np.broadcast_to(mats.A, (n_months, 4, 4)).copy()
    bvecs = 0.02 * rng.standard_normal((n_months, 4))
    dts = np.full(n_months, 1.0)

    z = np.zeros(4)
    return {
        "affine_recurrence (14y monthly)": (
            "affine_recurrence", (fmats, gvecs, z)),
        "affine_recurrence_const (12k steps x 14)": (
            "affine_recurrence_const", (fconst, gconst, z, nsub * 14, nsub)),
        "sensitivity_recurrence (12k steps x 14)": (
            "sensitivity_recurrence",
            (fconst, phconst, 0.01 * mats.A, 0.01 * mats.a_g,
             4e-4 * mats.a_g, z, z, nsub * 14, nsub)),
        "rk4_piecewise (168 months x 100)": (
            "rk4_piecewise", (amats, bvecs, dts, 100, z)),
        "controlled_recurrence (14y monthly)": (
            "controlled_recurrence",
            (fmats, phimats, eks, phivs, dts,
             0.05 * rng.standard_normal(n_months),
             rng.uniform(0.05, 0.1, n_months), mats.a_g, mats.a_f,
             mats.alpha, mats.beta, mats.delta, 0.4)),
    }


def time_call(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.NUMBA_ENABLED:
        print("numba path unavailable (SOCCHANGE_NO_NUMBA set or numba "
              "missing); timing the pure path only")

    workloads = build_workloads()
    width = max(len(name) for name in workloads)
    header = f"{'kernel workload':<{width}}  {'numpy':>10}  {'numba':>10}  speedup"
    print(header)
    print("-" * len(header))
    for name, (kernel, call_args) in workloads.items():
        pure, jitted = _kernels.implementations(kernel)
        if _kernels.NUMBA_ENABLED:
            jitted(*call_args)   # compile outside the timed region
        t_pure = time_call(pure, call_args, args.repeats)
        if _kernels.NUMBA_ENABLED:
            t_jit = time_call(jitted, call_args, args.repeats)
            print(f"{name:<{width}}  {t_pure * 1e3:>8.2f}ms  "
                  f"{t_jit * 1e3:>8.2f}ms  {t_pure / t_jit:>6.1f}x")
        else:
            print(f"{name:<{width}}  {t_pure * 1e3:>8.2f}ms  {'-':>10}  {'-':>7}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
