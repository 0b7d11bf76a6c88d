"""Farmyard-manure feedback keeping the SOC change index non-negative.

The continuous law replaces decomposition losses exactly whenever the
required manure rate is non-negative, and shuts off otherwise. The discrete
loop evaluates the same law against the monthly non-standard step (its
Δt→0 limit is the continuous formula), so the enforced floor holds at
round-off for every step size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import Scenario
from .errors import ConfigError
from .stepping import Trajectory, build_time_grid, phi1_scalar

Array = np.ndarray


def maintenance_rate(delta_c, rho: float, ghat: float, np_ratio: float,
                     epsilon: float, T: float, rho0: float, delta: float,
                     k) -> float:
    """Continuous-time manure rate that freezes the SOC change index.

    rho(t)/(1-eps) [delta k^T delta_c + 1/(T rho0)] - eps/(1-eps) N_P ghat.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ConfigError(
            f"epsilon must be in [0, 1) for controlled runs, got {epsilon}")
    dc = np.asarray(delta_c, dtype=float)
    bracket = delta * float(np.asarray(k) @ dc) + 1.0 / (T * rho0)
    return rho * bracket / (1.0 - epsilon) - epsilon * np_ratio * ghat / (1.0 - epsilon)


def fym_modifier(delta_c, rho: float, ghat: float, np_ratio: float,
                 epsilon: float, T: float, rho0: float, delta: float,
                 k) -> float:
    """Clamped manure modifying factor max(0, maintenance rate)."""
    return max(0.0, maintenance_rate(delta_c, rho, ghat, np_ratio, epsilon,
                                     T, rho0, delta, k))


@dataclass(frozen=True)
class ControlSchedule:
    """Applied manure modifying factor per month, with annual totals."""

    t: Array          # months since t0, at month start (rate applies over month)
    year: Array
    month: Array
    f0: Array         # modifying factor, month^-1
    f: Array          # density f0 * F0, t C ha^-1 month^-1
    epsilon: float
    meta: dict

    def annual_totals(self) -> dict[int, float]:
        """Manure applied per calendar year, t C ha^-1."""
        out: dict[int, float] = {}
        for y in np.unique(self.year):
            sel = self.year == y
            out[int(y)] = float((self.f[sel] * self.meta["dt"][sel]).sum())
        return out


def simulate_controlled(scenario: Scenario, epsilon: float):
    """Run the feedback-controlled delta dynamics over the horizon.

    Returns (Trajectory, ControlSchedule). The manure modifying factor is
    evaluated once per month from the state at the month's start and held
    constant over the month (zero-order hold), choosing the value that makes
    the non-standard step's Δsoc increment exactly zero when feasible.
    """
    if epsilon == 1.0:
        raise ConfigError("epsilon = 1 means no manure input; use simulate()")
    if not 0.0 <= epsilon < 1.0:
        raise ConfigError(f"epsilon must be in [0, 1), got {epsilon}")
    if scenario.baseline.F0 <= 0.0:
        raise ConfigError("controlled runs need a baseline manure total F0 > 0")
    grid = build_time_grid(scenario)
    nm = grid.nsteps
    mats = scenario.mats
    T = scenario.params.T
    rho0 = scenario.rho0

    rhos = np.empty(nm)
    epsg = np.empty(nm)
    qs = np.empty(nm)
    for j in range(nm):
        n = int(grid.year_index[j])
        m = int(grid.month[j])
        rho = scenario.rho_at(n, m)
        rhos[j] = rho
        ghat = scenario.density.density(m, grid.dt[j])
        qs[j] = rho / (T * rho0)
        epsg[j] = epsilon * (scenario.np_ratio(n) * ghat - qs[j])

    taus = grid.dt * rhos
    eks = np.exp(-taus[:, None] * mats.k[None, :])
    phivs = phi1_scalar(-taus[:, None] * mats.k[None, :])
    fmats = mats.Lambda[None, :, :] + mats.i_minus_lambda[None, :, :] * eks[:, None, :]
    phimats = grid.dt[:, None, None] * (
        (mats.i_minus_lambda[None, :, :] * phivs[:, None, :]) @ mats.i_minus_lambda_inv)

    states, f0 = _kernels.controlled_recurrence(
        np.ascontiguousarray(fmats), np.ascontiguousarray(phimats),
        np.ascontiguousarray(eks), np.ascontiguousarray(phivs),
        np.ascontiguousarray(grid.dt), epsg, qs, mats.a_g, mats.a_f,
        mats.alpha, mats.beta, mats.delta, epsilon)

    t = np.concatenate(([grid.t_start], grid.t_end))
    year = np.concatenate(([scenario.baseline_year + grid.year_index[0]],
                           scenario.baseline_year + grid.year_index))
    month = np.concatenate(([0], grid.month))
    meta = {
        "scheme": "nonstandard",
        "mode": "delta",
        "cover_mode": scenario.cover_mode,
        "fym_mode": "controlled",
        "control_hold": "monthly",
        "baseline_year": scenario.baseline_year,
        "horizon": scenario.horizon,
        "dpm_rpm_ratio": scenario.r,
        "epsilon": epsilon,
    }
    trajectory = Trajectory(t=t, year=year, month=month, states=states,
                            totals=states.sum(axis=1), scheme="nonstandard",
                            mode="delta", meta=meta)
    schedule = ControlSchedule(
        t=grid.t_end - grid.dt, year=scenario.baseline_year + grid.year_index,
        month=grid.month, f0=f0, f=f0 * scenario.baseline.F0, epsilon=epsilon,
        meta={"dt": grid.dt, "F0": scenario.baseline.F0, "hold": "monthly"})
    return trajectory, schedule
