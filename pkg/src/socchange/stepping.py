"""Non-standard monthly stepping, the discrete RothC step, and trajectories.

The one-step map uses the matrix functions F(t) = Λ + (I-Λ)e^{-tD} and
φ(z) = (e^z - 1)/z of the similarity-reduced matrix Ã = -(I-Λ)D(I-Λ)^{-1},
so every step is closed-form for the fixed 4x4 structure. The scheme fixes
the continuous equilibria exactly for any step size; the original discrete
RothC step (F c + Δt b) does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dynamics import DeltaState, Scenario, delta_forcing_fym, delta_forcing_no_fym
from .errors import ConfigError
from .pools import CompartmentMatrices

Array = np.ndarray

_PHI_SERIES_CUTOFF = 1e-6


def phi1_scalar(z):
    """(e^z - 1)/z with the removable singularity handled by a short series."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < _PHI_SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 + z / 2.0 + z * z / 6.0, np.expm1(safe) / safe)
    return float(out) if out.ndim == 0 else out


def phi_matrix(dt: float, rho: float, mats: CompartmentMatrices) -> Array:
    """φ(dt rho Ã) via the (I-Λ) similarity with the diagonal D."""
    if dt <= 0 or rho <= 0:
        raise ConfigError(f"dt and rho must be positive, got dt={dt}, rho={rho}")
    vals = phi1_scalar(-dt * rho * mats.k)
    return mats.i_minus_lambda @ np.diag(vals) @ mats.i_minus_lambda_inv


def transition_matrix(dt: float, rho: float, mats: CompartmentMatrices) -> Array:
    """F(dt rho) = Λ + (I-Λ) diag(e^{-dt rho k})."""
    if dt < 0:
        raise ConfigError(f"dt must be non-negative, got {dt}")
    return mats.Lambda + mats.i_minus_lambda @ np.diag(np.exp(-dt * rho * mats.k))


def nonstandard_step(state, dt: float, rho: float, b, mats: CompartmentMatrices,
                     form: str = "transition") -> Array:
    """One non-standard step; both compositions agree to round-off.

    form="incremental": c + Δt φ(Δt rho Ã)(rho A c + b)
    form="transition":  F(Δt rho) c + Δt φ(Δt rho Ã) b
    """
    state = np.asarray(state, dtype=float)
    b = np.asarray(b, dtype=float)
    phi = phi_matrix(dt, rho, mats)
    if form == "incremental":
        return state + dt * (phi @ (rho * (mats.A @ state) + b))
    if form == "transition":
        return transition_matrix(dt, rho, mats) @ state + dt * (phi @ b)
    raise ConfigError(f"unknown step form {form!r}")


def rothc_discrete_step(state, dt: float, rho: float, b,
                        mats: CompartmentMatrices) -> Array:
    """Original discrete RothC update F(Δt rho) c + Δt b."""
    state = np.asarray(state, dtype=float)
    return transition_matrix(dt, rho, mats) @ state + dt * np.asarray(b, dtype=float)


def phi1_dense(z: Array, tol: float = 1e-12) -> Array:
    """φ applied to a dense square matrix by scaling-and-squaring on its series.

    Needed where the similarity reduction does not apply (functions of the
    full matrix A rather than Ã).
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    norm = np.linalg.norm(z, 1)
    squarings = max(0, int(np.ceil(np.log2(norm / 0.25)))) if norm > 0.25 else 0
    zs = z / (2.0 ** squarings)
    term = np.eye(n)
    phi = np.eye(n)
    for j in range(1, 13):
        term = term @ zs / (j + 1)
        phi = phi + term
        if np.linalg.norm(term, 1) < tol:
            break
    # phi(2z) = (e^z + I) phi(z) / 2 with e^z = I + z phi(z)
    expz = np.eye(n) + zs @ phi
    for _ in range(squarings):
        phi = (expz + np.eye(n)) @ phi / 2.0
        expz = expz @ expz
    return phi


@dataclass(frozen=True)
class TimeGrid:
    """Monthly grid over the delta years: per step (year n, month, Δt, t_end)."""

    year_index: Array   # delta year n per step
    month: Array        # 1..12
    dt: Array           # months; sums to T within each year
    t_end: Array        # months since baseline-year start, at month end

    @property
    def nsteps(self) -> int:
        return self.dt.shape[0]

    @property
    def t_start(self) -> float:
        return float(self.t_end[0] - self.dt[0])


def build_time_grid(scenario: Scenario) -> TimeGrid:
    T = scenario.params.T
    years = []
    months = []
    dts = []
    for n in range(1, scenario.horizon + 1):
        i = scenario.climate.index(scenario.baseline_year + n)
        ndays = scenario.climate.month_days[i]
        year_total = ndays.sum()
        for m in range(1, 13):
            years.append(n)
            months.append(m)
            dts.append(T * ndays[m - 1] / year_total)
    years = np.array(years)
    months = np.array(months)
    dts = np.array(dts)
    # absolute time in months since t0: delta year n starts at n*T exactly
    t_end = np.empty_like(dts)
    acc = T * years[0]
    for j in range(dts.shape[0]):
        if j > 0 and years[j] != years[j - 1]:
            acc = T * years[j]
        acc += dts[j]
        t_end[j] = acc
    return TimeGrid(year_index=years, month=months, dt=dts, t_end=t_end)


@dataclass
class Trajectory:
    """Monthly samples of a simulated run, initial state included."""

    t: Array            # months since baseline-year start
    year: Array         # calendar year per sample (initial sample: start year)
    month: Array        # 0 for the initial sample, else 1..12
    states: Array       # (nsamples, 4) delta_c or pools
    totals: Array       # component sums per sample (Δsoc in delta mode)
    scheme: str
    mode: str
    meta: dict = field(default_factory=dict)

    def annual_means(self) -> dict[int, float]:
        """Mean of the 12 in-year monthly samples, keyed by calendar year."""
        out: dict[int, float] = {}
        for y in np.unique(self.year[self.month > 0]):
            sel = (self.year == y) & (self.month > 0)
            out[int(y)] = float(self.totals[sel].mean())
        return out

    def final_state(self) -> DeltaState:
        return DeltaState.from_components(self.states[-1])


def _monthly_coefficients(scenario: Scenario, mode: str):
    """Left-endpoint rho and forcing per month over the horizon."""
    grid = build_time_grid(scenario)
    nm = grid.nsteps
    rhos = np.empty(nm)
    bvecs = np.empty((nm, 4))
    baseline = scenario.baseline
    fym = scenario.fym
    if fym.mode == "controlled":
        raise ConfigError("controlled runs go through simulate_controlled")
    if mode == "delta" and fym.mode == "fixed" and baseline.F0 == 0.0:
        raise ConfigError("fixed manure forcing in delta mode needs a "
                          "baseline manure total F0 > 0 (the forcing is "
                          "normalized by it)")
    for j in range(nm):
        n = int(grid.year_index[j])
        m = int(grid.month[j])
        rho = scenario.rho_at(n, m)
        rhos[j] = rho
        f_value = 0.0
        if fym.mode == "fixed":
            f_value = float(fym.monthly_density[m - 1])
        if mode == "delta":
            if baseline.F0 == 0.0:
                bvecs[j] = delta_forcing_no_fym(m, n, scenario, rho_m=rho,
                                                dt_m=grid.dt[j])
            else:
                bvecs[j] = delta_forcing_fym(m, n, scenario, f_value,
                                             rho_m=rho, dt_m=grid.dt[j])
        elif mode == "absolute":
            ghat = scenario.density.density(m, grid.dt[j])
            g = baseline.P0 * scenario.np_ratio(n) * ghat
            bvecs[j] = g * scenario.mats.a_g + f_value * scenario.mats.a_f
        else:
            raise ConfigError(f"unknown mode {mode!r}")
    return grid, rhos, bvecs


def _step_operators(grid: TimeGrid, rhos: Array, mats: CompartmentMatrices,
                    scheme: str):
    """Per-month transition matrices F and forcing weights (vectorized)."""
    taus = grid.dt * rhos
    decays = np.exp(-taus[:, None] * mats.k[None, :])
    fmats = mats.Lambda[None, :, :] + mats.i_minus_lambda[None, :, :] * decays[:, None, :]
    if scheme == "nonstandard":
        phis = phi1_scalar(-taus[:, None] * mats.k[None, :])
        phimats = (mats.i_minus_lambda[None, :, :] * phis[:, None, :]) @ mats.i_minus_lambda_inv
        weights = grid.dt[:, None, None] * phimats
    elif scheme == "rothc_discrete":
        weights = grid.dt[:, None, None] * np.eye(4)[None, :, :]
    else:
        raise ConfigError(f"unknown scheme {scheme!r}")
    return fmats, weights


def simulate(scenario: Scenario, scheme: str = "nonstandard",
             mode: str = "delta") -> Trajectory:
    """Run the monthly stepping over the horizon.

    Delta mode starts from the zero state at t0 + T; absolute mode starts
    from the baseline equilibrium pools (validation path).
    """
    grid, rhos, bvecs = _monthly_coefficients(scenario, mode)
    fmats, weights = _step_operators(grid, rhos, scenario.mats, scheme)
    gvecs = np.einsum("jab,jb->ja", weights, bvecs)
    c0 = np.zeros(4) if mode == "delta" else scenario.baseline.c0.astype(float)
    states = _kernels.affine_recurrence(np.ascontiguousarray(fmats),
                                        np.ascontiguousarray(gvecs), c0)
    t = np.concatenate(([grid.t_start], grid.t_end))
    year = np.concatenate(([scenario.baseline_year + grid.year_index[0]],
                           scenario.baseline_year + grid.year_index))
    month = np.concatenate(([0], grid.month))
    meta = {
        "scheme": scheme,
        "mode": mode,
        "cover_mode": scenario.cover_mode,
        "fym_mode": scenario.fym.mode,
        "baseline_year": scenario.baseline_year,
        "horizon": scenario.horizon,
        "dpm_rpm_ratio": scenario.r,
        "epsilon": scenario.baseline.epsilon,
    }
    return Trajectory(t=t, year=year, month=month, states=states,
                      totals=states.sum(axis=1), scheme=scheme, mode=mode,
                      meta=meta)


def rk4_reference(scenario: Scenario, mode: str = "delta",
                  refine: int = 100) -> Trajectory:
    """Fine-step classical fourth-order reference on the same monthly forcing.

    Within each month the model coefficients are constant, so this resolves
    the exact flow that the monthly one-step schemes approximate.
    """
    grid, rhos, bvecs = _monthly_coefficients(scenario, mode)
    amats = rhos[:, None, None] * scenario.mats.A[None, :, :]
    c0 = np.zeros(4) if mode == "delta" else scenario.baseline.c0.astype(float)
    states = _kernels.rk4_piecewise(np.ascontiguousarray(amats),
                                    np.ascontiguousarray(bvecs),
                                    np.ascontiguousarray(grid.dt), refine, c0)
    t = np.concatenate(([grid.t_start], grid.t_end))
    year = np.concatenate(([scenario.baseline_year + grid.year_index[0]],
                           scenario.baseline_year + grid.year_index))
    month = np.concatenate(([0], grid.month))
    return Trajectory(t=t, year=year, month=month, states=states,
                      totals=states.sum(axis=1), scheme=f"rk4x{refine}",
                      mode=mode, meta={"scheme": f"rk4x{refine}", "mode": mode})
