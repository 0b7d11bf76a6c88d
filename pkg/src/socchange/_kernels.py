"""Hot inner loops: monthly stepping, sub-monthly solves, RK4 reference, feedback control.

Every kernel is written as a plain loop over preallocated float64 arrays so the
same source compiles under numba. By default the kernels are jitted with
``numba.njit(cache=True)``; setting the environment variable
``SOCCHANGE_NO_NUMBA=1`` (or numba being unavailable) selects the pure-numpy
fallback. ``benchmarks/bench_kernels.py`` compares both paths.
"""

import os

import numpy as np


def _affine_recurrence(fmats, gvecs, c0):
    """Iterate c_{j+1} = F_j c_j + g_j, returning all states incl. c0.

    fmats: (n, 4, 4), gvecs: (n, 4), c0: (4,). Returns (n+1, 4).
    """
    n = fmats.shape[0]
    out = np.empty((n + 1, 4))
    out[0] = c0
    c = c0.copy()
    for j in range(n):
        c = fmats[j] @ c + gvecs[j]
        out[j + 1] = c
    return out


def _affine_recurrence_const(fmat, gvec, c0, nsteps, record_every):
    """Constant-coefficient recurrence, sampling every ``record_every`` steps.

    Returns (nsamples, 4) where the first row is the state after
    ``record_every`` steps (c0 itself is not recorded).
    """
    nsamples = nsteps // record_every
    out = np.empty((nsamples, 4))
    c = c0.copy()
    idx = 0
    for j in range(nsteps):
        c = fmat @ c + gvec
        if (j + 1) % record_every == 0:
            out[idx] = c
            idx += 1
    return out


def _sensitivity_recurrence(fmat, phimat, coup, w, bc, c0, s0, nsteps, record_every):
    """Co-integrate state and sensitivity with frozen left-endpoint coupling.

    Per step (state c, sensitivity s):
        s <- F s + Phi (coup @ c + w)
        c <- F c + Phi bc
    Samples every ``record_every`` steps. Returns (c_samples, s_samples).
    """
    nsamples = nsteps // record_every
    cs = np.empty((nsamples, 4))
    ss = np.empty((nsamples, 4))
    c = c0.copy()
    s = s0.copy()
    idx = 0
    for j in range(nsteps):
        s = fmat @ s + phimat @ (coup @ c + w)
        c = fmat @ c + phimat @ bc
        if (j + 1) % record_every == 0:
            cs[idx] = c
            ss[idx] = s
            idx += 1
    return cs, ss


def _rk4_piecewise(amats, bvecs, dts, nsub, c0):
    """Classical RK4 over piecewise-constant linear months y' = M_j y + b_j.

    amats: (n, 4, 4) per-month M = rho*A, bvecs: (n, 4), dts: (n,) month
    lengths, nsub substeps per month. Returns end-of-month states (n+1, 4)
    including the initial state.
    """
    n = amats.shape[0]
    out = np.empty((n + 1, 4))
    out[0] = c0
    c = c0.copy()
    for j in range(n):
        m = amats[j]
        b = bvecs[j]
        h = dts[j] / nsub
        for _ in range(nsub):
            k1 = m @ c + b
            k2 = m @ (c + 0.5 * h * k1) + b
            k3 = m @ (c + 0.5 * h * k2) + b
            k4 = m @ (c + h * k3) + b
            c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j + 1] = c
    return out


def _controlled_recurrence(fmats, phimats, eks, phivs, dts, epsg, qs, ag, af,
                           alpha, beta, delta, eps):
    """Monthly feedback loop enforcing a non-negative SOC change index.

    The manure modifying factor is the value that zeroes the discrete Δsoc
    increment of the non-standard step (the Δt→0 limit of the continuous
    feedback law), clamped at zero. eks/phivs are the per-month vectors
    exp(-τk) and φ(-τk); epsg is ε·(N_P ĝ - q) and qs is ρ/(Tρ⁰).
    Returns (states (n+1, 4), f0 (n,)).
    """
    n = fmats.shape[0]
    out = np.empty((n + 1, 4))
    f0s = np.empty(n)
    c = np.zeros(4)
    out[0] = c
    for j in range(n):
        phiv = phivs[j]
        trail = alpha * phiv[2] + beta * phiv[3]
        # w[i] = 1^T phi(tau*Atilde) column weights
        w = delta * phiv + trail
        wg = w @ ag
        wf = w @ af
        decay = (delta / dts[j]) * ((1.0 - eks[j]) @ c)
        f0 = qs[j] + (decay - epsg[j] * wg) / ((1.0 - eps) * wf)
        if f0 < 0.0:
            f0 = 0.0
        f0s[j] = f0
        b = epsg[j] * ag + (1.0 - eps) * (f0 - qs[j]) * af
        c = fmats[j] @ c + phimats[j] @ b
        out[j + 1] = c
    return out, f0s


_PURE = {
    "affine_recurrence": _affine_recurrence,
    "affine_recurrence_const": _affine_recurrence_const,
    "sensitivity_recurrence": _sensitivity_recurrence,
    "rk4_piecewise": _rk4_piecewise,
    "controlled_recurrence": _controlled_recurrence,
}

NUMBA_ENABLED = False

if os.environ.get("SOCCHANGE_NO_NUMBA", "").strip() not in ("1", "true", "yes"):
    try:
        from numba import njit

        _JIT = {name: njit(cache=True)(fn) for name, fn in _PURE.items()}
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised only without numba
        _JIT = _PURE
else:
    _JIT = _PURE

affine_recurrence = _JIT["affine_recurrence"]
affine_recurrence_const = _JIT["affine_recurrence_const"]
sensitivity_recurrence = _JIT["sensitivity_recurrence"]
rk4_piecewise = _JIT["rk4_piecewise"]
controlled_recurrence = _JIT["controlled_recurrence"]


def implementations(name):
    """Return (pure, jitted) variants of a kernel, for benchmarks and tests."""
    return _PURE[name], _JIT[name]
