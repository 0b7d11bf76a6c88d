"""Shared fixtures: synthetic climates/scenarios and optional site data gating."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

import socchange as sc

REPO_ROOT = Path(__file__).resolve().parent.parent

# Optional third-party extracts (CRU TS / MOD17 aggregates); tests that
# reproduce published site values skip when these are absent.
ALTA_MURGIA_DIR = Path(os.environ.get("SOCCHANGE_ALTA_MURGIA_DIR",
                                      REPO_ROOT / "data" / "alta_murgia"))


def synthetic_climate(start_year: int, nyears: int, site, seed: int = 0,
                      warming: float = 0.0, latitude: float = 41.0,
                      wet: bool = False) -> sc.ClimateSeries:
    """Seasonal sinusoid climate with seeded noise and optional warming trend."""
    rng = np.random.default_rng(seed)
    m = np.arange(12)
    temps = np.empty((nyears, 12))
    rains = np.empty((nyears, 12))
    for i in range(nyears):
        temps[i] = (14.0 + warming * i + 8.0 * np.sin(2 * np.pi * (m - 3) / 12)
                    + 0.3 * rng.standard_normal(12))
        base = 120.0 if wet else 55.0
        rains[i] = base + 30.0 * np.cos(2 * np.pi * m / 12) \
            + 5.0 * rng.standard_normal(12)
    return sc.ClimateSeries.build(start_year, temps, np.clip(rains, 0.0, None),
                                  site, latitude_deg=latitude)


def constant_climate(start_year: int, nyears: int, site,
                     temp: float = 14.0, rain: float = 200.0) -> sc.ClimateSeries:
    """Stationary climate: every month identical, rain >> pet so acc = 0."""
    temps = np.full((nyears, 12), temp)
    rains = np.full((nyears, 12), rain)
    return sc.ClimateSeries.build(start_year, temps, rains, site,
                                  latitude_deg=41.0)


def make_scenario(r: float = 1.44, cly: float = 50.0, depth: float = 23.0,
                  baseline_year: int = 2005, horizon: int = 14,
                  seed: int = 1, warming: float = 0.05,
                  np_trend: float = 0.01, P0: float = 1.0, F0: float = 0.0,
                  climate: sc.ClimateSeries | None = None,
                  cover_mode: str = "timed",
                  fym: sc.FymPolicy | None = None,
                  land_class: str | None = None) -> sc.Scenario:
    site = sc.max_deficit(cly, depth)
    if climate is None:
        climate = synthetic_climate(baseline_year, horizon + 1, site,
                                    seed=seed, warming=warming)
    reference = sc.reference_from_climate(climate, baseline_year, site)
    params = sc.SoilParams.for_site(cly, depth, r)
    mats = sc.build_matrices(params)
    rho0 = reference.rho0(r)
    baseline = sc.BaselineState.from_inputs(P0, F0, rho0, mats, params.T)
    np_ratios = {baseline_year + n: 1.0 + np_trend * n
                 for n in range(horizon + 1)}
    density = sc.PlantInputDensity.standard(
        land_class or sc.class_for_ratio(r))
    return sc.Scenario(baseline_year=baseline_year, horizon=horizon,
                       params=params, mats=mats, density=density,
                       climate=climate, reference=reference,
                       baseline=baseline, np_ratios=np_ratios,
                       fym=fym or sc.FymPolicy(), cover_mode=cover_mode)


@pytest.fixture(scope="session")
def site50():
    return sc.max_deficit(50.0, 23.0)


@pytest.fixture(scope="session")
def arable_scenario():
    return make_scenario(r=1.44)


@pytest.fixture(scope="session")
def stationary_scenario(site50):
    """Constant climate, flat NPP: the delta forcing balances over each year."""
    climate = constant_climate(2005, 15, site50)
    return make_scenario(r=1.44, climate=climate, warming=0.0, np_trend=0.0,
                         cover_mode="smooth")


@pytest.fixture(scope="session")
def zero_forcing_scenario(site50):
    """Uniform input density over non-leap years and stationary climate:
    the monthly forcing vanishes identically, not just on annual average."""
    climate = constant_climate(2005, 3, site50)
    ndays = sc.climate.month_lengths(2006).astype(float)
    density = sc.PlantInputDensity(ndays / ndays.sum(), "arable")
    scen = make_scenario(r=1.44, climate=climate, baseline_year=2005,
                         horizon=2, warming=0.0, np_trend=0.0,
                         cover_mode="smooth")
    return sc.Scenario(baseline_year=2005, horizon=2, params=scen.params,
                       mats=scen.mats, density=density, climate=climate,
                       reference=scen.reference, baseline=scen.baseline,
                       np_ratios=scen.np_ratios, cover_mode="smooth")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure work, not JIT."""
    eye = np.eye(4)
    z = np.zeros(4)
    sc._kernels.affine_recurrence(eye[None, :, :], z[None, :], z)
    sc._kernels.affine_recurrence_const(eye, z, z, 2, 1)
    sc._kernels.sensitivity_recurrence(eye, eye, eye, z, z, z, z, 2, 1)
    sc._kernels.rk4_piecewise(eye[None, :, :], z[None, :], np.ones(1), 2, z)
    sc._kernels.controlled_recurrence(
        eye[None, :, :], eye[None, :, :], np.ones((1, 4)), np.ones((1, 4)),
        np.ones(1), np.zeros(1), np.ones(1) * 0.1,
        np.array([0.5, 0.5, 0.0, 0.0]), np.array([0.49, 0.49, 0.0, 0.02]),
        0.1, 0.1, 0.8, 0.5)


def write_climate_csv(path: Path, climate: sc.ClimateSeries,
                      with_pet: bool = False) -> None:
    lines = ["year,month,temp_c,rain_mm" + (",pet_mm" if with_pet else "")]
    for i, year in enumerate(climate.years):
        for m in range(12):
            row = (f"{year},{m + 1},{float(climate.temp[i, m])!r},"
                   f"{float(climate.rain[i, m])!r}")
            if with_pet:
                row += f",{float(climate.pet[i, m])!r}"
            lines.append(row)
    path.write_text("\n".join(lines) + "\n")


def write_scenario_inputs(tmp_path: Path, r: float = 1.44, seed: int = 1,
                          warming: float = 0.05, np_trend: float = 0.01,
                          nyears: int = 15, baseline_year: int = 2005,
                          **config_overrides) -> Path:
    """Generate climate/NPP CSVs plus a config file; returns the config path."""
    site = sc.max_deficit(50.0, 23.0)
    climate = synthetic_climate(baseline_year, nyears, site, seed=seed,
                                warming=warming)
    write_climate_csv(tmp_path / "climate.csv", climate)
    npp_lines = ["year,npp"]
    for n in range(nyears):
        npp_lines.append(f"{baseline_year + n},{1.0 + np_trend * n!r}")
    (tmp_path / "npp.csv").write_text("\n".join(npp_lines) + "\n")
    settings = {
        "latitude_deg": 41.0,
        "clay_pct": 50.0,
        "depth_cm": 23.0,
        "baseline_year": baseline_year,
        "horizon_years": nyears - 1,
        "dpm_rpm_ratio": r,
        "climate_csv": "climate.csv",
        "npp_csv": "npp.csv",
    }
    settings.update(config_overrides)
    cfg_lines = ["# generated test scenario"]
    cfg_lines += [f"{key} = {value}" for key, value in settings.items()]
    config_path = tmp_path / "scenario.cfg"
    config_path.write_text("\n".join(cfg_lines) + "\n")
    return config_path


def alta_murgia_available() -> bool:
    return (ALTA_MURGIA_DIR / "climate.csv").exists() and \
        (ALTA_MURGIA_DIR / "npp.csv").exists()


needs_alta_murgia = pytest.mark.skipif(
    not alta_murgia_available(),
    reason="CRU/MOD17 site extracts not present under data/alta_murgia/")


def alta_murgia_scenario(r: float, horizon: int = 14, **kwargs) -> sc.Scenario:
    site = sc.max_deficit(50.0, 23.0)
    climate = sc.load_climate(ALTA_MURGIA_DIR / "climate.csv", site,
                              latitude_deg=40.75)
    np_ratios = sc.load_npp(ALTA_MURGIA_DIR / "npp.csv", 2005)
    reference = sc.reference_from_climate(climate, 2005, site)
    params = sc.SoilParams.for_site(50.0, 23.0, r)
    mats = sc.build_matrices(params)
    baseline = sc.BaselineState.from_inputs(
        kwargs.pop("P0", 1.0), kwargs.pop("F0", 0.0),
        reference.rho0(r) if r > 0 else reference.kb0 * 0.6, mats, params.T)
    density = sc.PlantInputDensity.standard(sc.class_for_ratio(r))
    return sc.Scenario(baseline_year=2005, horizon=horizon, params=params,
                       mats=mats, density=density, climate=climate,
                       reference=reference, baseline=baseline,
                       np_ratios=np_ratios, **kwargs)
