"""CSV ingestion, scenario configuration, and deterministic result output.

All loaders raise structured errors (never crash on malformed input) with
line numbers where applicable; writers emit byte-deterministic CSV with a
single metadata comment line and full round-trip float precision.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .climate import (DEFAULT_BARE_MONTHS, ClimateSeries, SiteMoisture,
                      max_deficit, reference_from_climate)
from .control import ControlSchedule
from .dynamics import (ARABLE_COVER_SCHEDULE, LAND_CLASSES, FymPolicy,
                       PlantInputDensity, Scenario, class_for_ratio)
from .equilibrium import BaselineState
from .errors import ConfigError, DataError
from .pools import DEFAULT_ETA, SoilParams, build_matrices
from .sensitivity import DEFAULT_SENSITIVITY_DT, SensitivitySeries
from .stepping import Trajectory

Array = np.ndarray

_VERSION = "0.1.0"


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(x))


def _parse_float(text: str, path, line_no: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(
            f"{path}: line {line_no}: non-numeric {column!r} value {text!r}") from None


def _parse_int(text: str, path, line_no: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(
            f"{path}: line {line_no}: non-integer {column!r} value {text!r}") from None


def _csv_fields(reader: csv.DictReader, path) -> list[str]:
    try:
        names = reader.fieldnames
    except csv.Error as exc:
        raise DataError(f"{path}: malformed CSV: {exc}") from None
    if names is None:
        raise DataError(f"{path}: empty file")
    return [f.strip() for f in names]


def _csv_rows(reader: csv.DictReader, path):
    """Yield (line_no, row), converting csv-module failures to DataError."""
    line_no = 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise DataError(f"{path}: malformed CSV: {exc}") from None
        line_no += 1
        if any(v is None for v in row.values()):
            raise DataError(f"{path}: line {line_no}: too few columns")
        yield line_no, row


def load_climate(path, site: SiteMoisture,
                 latitude_deg: Optional[float] = None) -> ClimateSeries:
    """Load a monthly climate CSV and derive PET (if absent) and deficits.

    Expected header: year,month,temp_c,rain_mm[,pet_mm][,daylength_h].
    The series must cover whole contiguous years.
    """
    path = Path(path)
    records: dict[tuple[int, int], tuple] = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read climate file {path}: {exc}") from None
    reader = csv.DictReader(text.splitlines())
    fields = _csv_fields(reader, path)
    required = {"year", "month", "temp_c", "rain_mm"}
    if not required.issubset(fields):
        raise DataError(f"{path}: header must contain {sorted(required)}, "
                        f"got {fields}")
    has_pet = "pet_mm" in fields
    has_daylen = "daylength_h" in fields
    for line_no, row in _csv_rows(reader, path):
        year = _parse_int(row["year"], path, line_no, "year")
        month = _parse_int(row["month"], path, line_no, "month")
        if not 1 <= month <= 12:
            raise DataError(f"{path}: line {line_no}: month {month} outside 1..12")
        if (year, month) in records:
            raise DataError(f"{path}: line {line_no}: duplicate month "
                            f"{year}-{month:02d}")
        temp = _parse_float(row["temp_c"], path, line_no, "temp_c")
        rain = _parse_float(row["rain_mm"], path, line_no, "rain_mm")
        pet = (_parse_float(row["pet_mm"], path, line_no, "pet_mm")
               if has_pet else None)
        dlen = (_parse_float(row["daylength_h"], path, line_no, "daylength_h")
                if has_daylen else None)
        records[(year, month)] = (temp, rain, pet, dlen)
    if not records:
        raise DataError(f"{path}: no data rows")
    years = sorted({y for y, _ in records})
    start_year = years[0]
    if years != list(range(start_year, years[-1] + 1)):
        missing = sorted(set(range(start_year, years[-1] + 1)) - set(years))
        raise DataError(f"{path}: gap at {missing[0]}-01")
    for y in years:
        for m in range(1, 13):
            if (y, m) not in records:
                raise DataError(f"{path}: gap at {y}-{m:02d}")
    nyears = len(years)
    temp = np.empty((nyears, 12))
    rain = np.empty((nyears, 12))
    pet = np.empty((nyears, 12)) if has_pet else None
    dlen = np.empty((nyears, 12)) if has_daylen else None
    for (y, m), (tv, rv, pv, dv) in records.items():
        i = y - start_year
        temp[i, m - 1] = tv
        rain[i, m - 1] = rv
        if has_pet:
            pet[i, m - 1] = pv
        if has_daylen:
            dlen[i, m - 1] = dv
    return ClimateSeries.build(start_year, temp, rain, site, pet=pet,
                               latitude_deg=latitude_deg, day_lengths_h=dlen)


def load_npp(path, baseline_year: int) -> dict[int, float]:
    """Load annual NPP and normalize by the baseline year (ratio 1 there)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read NPP file {path}: {exc}") from None
    reader = csv.DictReader(text.splitlines())
    if not {"year", "npp"}.issubset(_csv_fields(reader, path)):
        raise DataError(f"{path}: header must contain year,npp")
    values: dict[int, float] = {}
    for line_no, row in _csv_rows(reader, path):
        year = _parse_int(row["year"], path, line_no, "year")
        if year in values:
            raise DataError(f"{path}: line {line_no}: duplicate year {year}")
        values[year] = _parse_float(row["npp"], path, line_no, "npp")
    if baseline_year not in values:
        raise DataError(f"{path}: baseline year {baseline_year} missing")
    base = values[baseline_year]
    if base == 0:
        raise DataError(f"{path}: baseline NPP is zero, ratios undefined")
    return {year: v / base for year, v in values.items()}


def load_density_table(path):
    """Load plant-input densities and cover schedules keyed by land class.

    Expected header: month,forest,grassland,arable plus optional cover_<class>
    columns; rows may appear in any order (keyed by month). Returns
    (densities, covers) dicts.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read density table {path}: {exc}") from None
    reader = csv.DictReader(text.splitlines())
    fields = _csv_fields(reader, path)
    if "month" not in fields:
        raise DataError(f"{path}: header must contain a month column")
    classes = [c for c in LAND_CLASSES if c in fields]
    if not classes:
        raise DataError(f"{path}: no land-class columns found")
    cover_cols = [f for f in fields if f.startswith("cover_")]
    dens = {c: np.full(12, np.nan) for c in classes}
    covers = {c.removeprefix("cover_"): np.full(12, np.nan) for c in cover_cols}
    seen = set()
    for line_no, row in _csv_rows(reader, path):
        m = _parse_int(row["month"], path, line_no, "month")
        if not 1 <= m <= 12:
            raise DataError(f"{path}: line {line_no}: month {m} outside 1..12")
        if m in seen:
            raise DataError(f"{path}: line {line_no}: duplicate month {m}")
        seen.add(m)
        for c in classes:
            dens[c][m - 1] = _parse_float(row[c], path, line_no, c)
        for col in cover_cols:
            covers[col.removeprefix("cover_")][m - 1] = _parse_float(
                row[col], path, line_no, col)
    if len(seen) != 12:
        missing = sorted(set(range(1, 13)) - seen)
        raise DataError(f"{path}: missing month {missing[0]}")
    densities = {}
    for c in classes:
        try:
            densities[c] = PlantInputDensity(dens[c], c)
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from None
    return densities, covers


@dataclass
class ScenarioConfig:
    """Flat key=value scenario configuration with units in the key names."""

    clay_pct: float
    depth_cm: float
    baseline_year: int
    horizon_years: int
    dpm_rpm_ratio: float
    climate_csv: str
    npp_csv: str
    latitude_deg: Optional[float] = None
    land_class: Optional[str] = None
    bare_months: float = DEFAULT_BARE_MONTHS
    eta: float = DEFAULT_ETA
    plant_input_tc_ha_yr: Optional[float] = None
    soc_active_tc_ha: Optional[float] = None
    fym_baseline_tc_ha_yr: float = 0.0
    epsilon: Optional[float] = None
    fym_mode: str = "none"
    fym_monthly_tc_ha: Optional[list] = None
    cover_mode: str = "timed"
    scheme: str = "nonstandard"
    sensitivity_dt: float = DEFAULT_SENSITIVITY_DT
    density_csv: Optional[str] = None
    base_dir: Path = field(default_factory=Path)

    def resolve(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.base_dir / p


_REQUIRED_KEYS = ("clay_pct", "depth_cm", "baseline_year", "horizon_years",
                  "dpm_rpm_ratio", "climate_csv", "npp_csv")

_FLOAT_KEYS = ("clay_pct", "depth_cm", "dpm_rpm_ratio", "latitude_deg",
               "bare_months", "eta", "plant_input_tc_ha_yr",
               "soc_active_tc_ha", "fym_baseline_tc_ha_yr", "epsilon",
               "sensitivity_dt")
_INT_KEYS = ("baseline_year", "horizon_years")
_STR_KEYS = ("climate_csv", "npp_csv", "density_csv", "land_class",
             "fym_mode", "cover_mode", "scheme")


def load_config(path) -> ScenarioConfig:
    """Parse the flat key = value config format (# comments allowed)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    raw: dict[str, str] = {}
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {line_no}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in raw:
            raise ConfigError(f"{path}: line {line_no}: duplicate key {key!r}")
        raw[key] = value
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")
    kwargs: dict = {"base_dir": path.parent}
    for key, value in raw.items():
        if key in _FLOAT_KEYS:
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"{path}: key {key!r}: non-numeric value "
                                  f"{value!r}") from None
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ConfigError(f"{path}: key {key!r}: non-integer value "
                                  f"{value!r}") from None
        elif key == "fym_monthly_tc_ha":
            try:
                kwargs[key] = [float(v) for v in value.split(",")]
            except ValueError:
                raise ConfigError(f"{path}: key {key!r}: expected 12 "
                                  f"comma-separated numbers") from None
        elif key in _STR_KEYS:
            kwargs[key] = value
        else:
            raise ConfigError(f"{path}: unknown key {key!r}")
    return ScenarioConfig(**kwargs)


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Assemble a full Scenario from a parsed configuration."""
    r = config.dpm_rpm_ratio
    if r < 0:
        raise ConfigError(f"dpm_rpm_ratio must be >= 0, got {r}")
    params = SoilParams.for_site(config.clay_pct, config.depth_cm, r,
                                 eta=config.eta)
    mats = build_matrices(params)
    site = max_deficit(config.clay_pct, config.depth_cm)
    climate = load_climate(config.resolve(config.climate_csv), site,
                           latitude_deg=config.latitude_deg)
    reference = reference_from_climate(climate, config.baseline_year, site,
                                       n_bare=config.bare_months)
    np_ratios = load_npp(config.resolve(config.npp_csv), config.baseline_year)

    land_class = config.land_class or class_for_ratio(r)
    cover_schedule = ARABLE_COVER_SCHEDULE.copy()
    if config.density_csv is not None:
        densities, covers = load_density_table(config.resolve(config.density_csv))
        if land_class not in densities:
            raise ConfigError(f"density table lacks class {land_class!r}")
        density = densities[land_class]
        if land_class in covers:
            cover_schedule = covers[land_class]
    else:
        density = PlantInputDensity.standard(land_class)

    rho0 = reference.rho0(r) if r > 0 else reference.kb0 * 0.6
    f0_total = config.fym_baseline_tc_ha_yr
    if config.soc_active_tc_ha is not None:
        if config.plant_input_tc_ha_yr is not None:
            raise ConfigError("give either plant_input_tc_ha_yr or "
                              "soc_active_tc_ha, not both")
        baseline = BaselineState.from_active_soc(config.soc_active_tc_ha,
                                                 f0_total, rho0, mats, params)
    else:
        p0 = 1.0 if config.plant_input_tc_ha_yr is None else config.plant_input_tc_ha_yr
        baseline = BaselineState.from_inputs(p0, f0_total, rho0, mats, params.T)

    if config.fym_mode == "fixed":
        if config.fym_monthly_tc_ha is None or len(config.fym_monthly_tc_ha) != 12:
            raise ConfigError("fixed FYM mode needs fym_monthly_tc_ha with 12 values")
        fym = FymPolicy(mode="fixed",
                        monthly_density=np.array(config.fym_monthly_tc_ha))
    elif config.fym_mode == "controlled":
        eps = baseline.epsilon if config.epsilon is None else config.epsilon
        fym = FymPolicy(mode="controlled", epsilon=eps)
    elif config.fym_mode == "none":
        fym = FymPolicy()
    else:
        raise ConfigError(f"unknown fym_mode {config.fym_mode!r}")

    return Scenario(baseline_year=config.baseline_year,
                    horizon=config.horizon_years, params=params, mats=mats,
                    density=density, climate=climate, reference=reference,
                    baseline=baseline, np_ratios=np_ratios, fym=fym,
                    cover_mode=config.cover_mode,
                    cover_schedule=cover_schedule)


def scenario_digest(meta: dict) -> str:
    """Short deterministic identifier for a run's metadata."""
    canon = json.dumps({k: v for k, v in sorted(meta.items())
                        if not isinstance(v, np.ndarray)},
                       sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _meta_line(kind: str, meta: dict) -> str:
    pairs = " ".join(f"{k}={meta[k]}" for k in sorted(meta)
                     if not isinstance(meta[k], np.ndarray))
    return (f"# socchange={_VERSION} kind={kind} scenario={scenario_digest(meta)}"
            + (f" {pairs}" if pairs else ""))


def write_trajectory(path, trajectory: Trajectory) -> None:
    """Trajectory CSV: year,month,t_months,dpm,rpm,bio,hum,total."""
    path = Path(path)
    lines = [_meta_line("trajectory", trajectory.meta),
             "year,month,t_months,dpm,rpm,bio,hum,total"]
    for i in range(trajectory.t.shape[0]):
        comps = ",".join(_fmt(v) for v in trajectory.states[i])
        lines.append(f"{int(trajectory.year[i])},{int(trajectory.month[i])},"
                     f"{_fmt(trajectory.t[i])},{comps},"
                     f"{_fmt(trajectory.totals[i])}")
    _write_text(path, lines)


def read_trajectory(path) -> Trajectory:
    """Reload a trajectory CSV written by write_trajectory."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read trajectory {path}: {exc}") from None
    if len(lines) < 2 or not lines[0].startswith("#"):
        raise DataError(f"{path}: not a trajectory file")
    meta: dict = {}
    for token in lines[0].lstrip("# ").split():
        key, _, value = token.partition("=")
        meta[key] = value
    rows = [line.split(",") for line in lines[2:] if line]
    year = np.array([int(r[0]) for r in rows])
    month = np.array([int(r[1]) for r in rows])
    t = np.array([float(r[2]) for r in rows])
    states = np.array([[float(v) for v in r[3:7]] for r in rows])
    totals = np.array([float(r[7]) for r in rows])
    if states.size == 0:
        states = states.reshape(0, 4)
    return Trajectory(t=t, year=year, month=month, states=states,
                      totals=totals, scheme=meta.get("scheme", ""),
                      mode=meta.get("mode", ""), meta=meta)


def write_sensitivity(path, series: SensitivitySeries) -> None:
    """Sensitivity CSV: t,s1,s2,s3,s4,s_dsoc."""
    path = Path(path)
    lines = [_meta_line("sensitivity", series.meta), "t,s1,s2,s3,s4,s_dsoc"]
    for i in range(series.t.shape[0]):
        comps = ",".join(_fmt(v) for v in series.s[i])
        lines.append(f"{_fmt(series.t[i])},{comps},{_fmt(series.s_dsoc[i])}")
    _write_text(path, lines)


def write_control(path, schedule: ControlSchedule) -> None:
    """Control CSV: year,month,f0,f,cumulative manure (t C ha^-1)."""
    path = Path(path)
    meta = {"epsilon": schedule.epsilon, "hold": schedule.meta.get("hold"),
            "F0": schedule.meta.get("F0")}
    lines = [_meta_line("control", meta), "year,month,f0,f,cumulative"]
    cumulative = np.cumsum(schedule.f * schedule.meta["dt"])
    for i in range(schedule.f0.shape[0]):
        lines.append(f"{int(schedule.year[i])},{int(schedule.month[i])},"
                     f"{_fmt(schedule.f0[i])},{_fmt(schedule.f[i])},"
                     f"{_fmt(cumulative[i])}")
    _write_text(path, lines)


def _write_text(path: Path, lines: list[str]) -> None:
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None
