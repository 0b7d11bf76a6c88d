"""Climate preprocessing: PET, soil moisture deficit, and the rate modifiers.

The decomposition rate modifier rho(t) is the product of a temperature factor
k_a (anchored to 1 at the baseline-year mean temperature), a moisture factor
k_b driven by the accumulated soil moisture deficit, and a soil-cover factor
k_c (a timed monthly schedule for simulation, or a smooth function of the
DPM/RPM ratio for sensitivity analysis).
"""

from __future__ import annotations

import calendar
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

Array = np.ndarray

# k_a anchoring offset: k_a equals 47.91/(1+46.91) = 1 at temp == temp0
KA_SCALE = 47.91
KA_EXPONENT = 106.06
KA_OFFSET = 106.06 / math.log(46.91)

KB_MIN = 0.2
KC_VEGETATED = 0.6

DEFAULT_BARE_MONTHS = 4.0

_MONTH_DAYS = np.array([31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31])
_MONTH_DAYS_LEAP = np.array([31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31])


def month_lengths(year: int) -> Array:
    """Days per calendar month of a year (Feb = 29 in leap years)."""
    return (_MONTH_DAYS_LEAP if calendar.isleap(year) else _MONTH_DAYS).copy()


def day_lengths(latitude_deg: float, year: int) -> Array:
    """Monthly mean day length in hours from a solar-declination model."""
    if not -90.0 <= latitude_deg <= 90.0:
        raise ConfigError(f"latitude must be in [-90, 90] deg, got {latitude_deg}")
    lat = math.radians(latitude_deg)
    ndays = month_lengths(year)
    out = np.empty(12)
    doy = 1
    for m in range(12):
        total = 0.0
        for _ in range(ndays[m]):
            decl = 0.409 * math.sin(2.0 * math.pi * doy / 365.0 - 1.39)
            cos_ws = min(max(-math.tan(lat) * math.tan(decl), -1.0), 1.0)
            total += (24.0 / math.pi) * math.acos(cos_ws)
            doy += 1
        out[m] = total / ndays[m]
    return out


def thornthwaite_pet(monthly_temps, day_lengths_h, month_days) -> Array:
    """Monthly potential evapotranspiration (mm) from mean temperatures.

    Months with non-positive temperature contribute nothing to the heat
    index and get pet = 0; a zero heat index yields an all-zero year.
    """
    temps = np.asarray(monthly_temps, dtype=float)
    ld = np.asarray(day_lengths_h, dtype=float)
    nm = np.asarray(month_days, dtype=float)
    if temps.shape != (12,) or ld.shape != (12,) or nm.shape != (12,):
        raise DataError("thornthwaite_pet expects 12 monthly values per input")
    if np.any(ld <= 0):
        raise DataError("day lengths must be positive")
    positive = temps > 0.0
    heat = float(np.sum((temps[positive] / 5.0) ** 1.5))
    if heat == 0.0:
        return np.zeros(12)
    a = 6.7e-7 * heat**3 - 7.7e-5 * heat**2 + 1.8e-2 * heat + 0.49
    pet = np.zeros(12)
    pet[positive] = (16.0 * (ld[positive] / 12.0) * (nm[positive] / 30.0)
                     * (10.0 * temps[positive] / heat) ** a)
    return pet


@dataclass(frozen=True)
class SiteMoisture:
    """Maximum soil moisture deficit M and respiration slow-down point Mb (mm)."""

    M: float
    Mb: float


def max_deficit(cly: float, d: float) -> SiteMoisture:
    """Site moisture limits from clay percentage and sampling depth (cm)."""
    if not 0.0 <= cly <= 100.0:
        raise ConfigError(f"clay content must be in [0, 100] %, got {cly}")
    if d <= 0:
        raise ConfigError(f"depth must be positive, got {d}")
    m = -(20.0 + 1.3 * cly - 0.01 * cly * cly) * d / 23.0
    return SiteMoisture(M=m, Mb=0.444 * m)


def accumulated_deficit(rain, pet, M: float) -> Array:
    """Accumulated soil moisture deficit for one year of monthly data.

    Zero through the leading run of months with pet <= rain; from the first
    month where pet exceeds rain the running balance rain - pet accrues,
    clamped to [M, 0]. Resets each year.
    """
    rain = np.asarray(rain, dtype=float)
    pet = np.asarray(pet, dtype=float)
    if rain.shape != (12,) or pet.shape != (12,):
        raise DataError("accumulated_deficit expects 12 monthly values")
    if M > 0:
        raise ConfigError(f"maximum deficit M must be <= 0, got {M}")
    acc = np.zeros(12)
    started = False
    prev = 0.0
    for m in range(12):
        if not started:
            if pet[m] <= rain[m]:
                continue
            started = True
        prev = min(max(M, prev + rain[m] - pet[m]), 0.0)
        acc[m] = prev
    return acc


def rate_modifier_temperature(temp: float, temp0: float) -> float:
    """Temperature rate modifier, equal to 1 at the reference temperature."""
    u = temp + KA_OFFSET - temp0
    if u <= 0.01:
        pole = temp0 - KA_OFFSET
        raise ConfigError(
            f"temperature {temp} too close to the modifier pole at "
            f"{pole:.2f} degC (reference {temp0} degC)")
    return KA_SCALE / (1.0 + math.exp(KA_EXPONENT / u))


def rate_modifier_moisture(acc: float, site: SiteMoisture) -> float:
    """Moisture rate modifier in [0.2, 1] from the accumulated deficit."""
    if acc > 0.0 or acc < site.M:
        raise ConfigError(f"deficit {acc} outside [{site.M}, 0]")
    if acc >= site.Mb:
        return 1.0
    return KB_MIN + (1.0 - KB_MIN) * (site.M - acc) / (site.M - site.Mb)


def rate_modifier_cover_timed(month: int, r: float, cover_schedule=None) -> float:
    """Soil-cover rate modifier from the monthly schedule (periodic in the year).

    Below the arable threshold (r < 1) the soil is always vegetated (0.6);
    at or above it the monthly schedule alternates between 0.6 and 1.
    """
    if not 1 <= month <= 12:
        raise ConfigError(f"month must be in 1..12, got {month}")
    if r < 1.0:
        return KC_VEGETATED
    if cover_schedule is None:
        raise ConfigError("arable class (r >= 1) requires a cover schedule")
    return float(cover_schedule[month - 1])


def rate_modifier_cover_smooth(r: float, n_bare: float = DEFAULT_BARE_MONTHS) -> float:
    """Smooth annual-mean soil-cover modifier as a function of the DPM/RPM ratio."""
    if r <= 0:
        raise ConfigError(f"DPM/RPM ratio must be positive, got {r}")
    if not 0.0 <= n_bare <= 12.0:
        raise ConfigError(f"bare months must be in [0, 12], got {n_bare}")
    x = 30.0 * (r - 1.0) / r
    sig = math.exp(x) / (1.0 + math.exp(x)) if x < 0 else 1.0 / (1.0 + math.exp(-x))
    return KC_VEGETATED + (n_bare / 30.0) * sig


@dataclass(frozen=True)
class ReferenceState:
    """Baseline-year averages anchoring the rate modifiers."""

    temp0: float
    acc0: float
    site: SiteMoisture
    n_bare: float = DEFAULT_BARE_MONTHS

    @property
    def kb0(self) -> float:
        return rate_modifier_moisture(self.acc0, self.site)

    def rho0(self, r: float) -> float:
        """Reference modifier rho0(r) = k_b(acc0) * k_c(r); k_a(temp0) = 1."""
        return self.kb0 * rate_modifier_cover_smooth(r, self.n_bare)


def rho_monthly(temp: float, acc: float, month: int, r: float,
                reference: ReferenceState, cover_mode: str = "timed",
                cover_schedule=None) -> float:
    """Product rate modifier for one month record."""
    ka = rate_modifier_temperature(temp, reference.temp0)
    kb = rate_modifier_moisture(acc, reference.site)
    if cover_mode == "timed":
        kc = rate_modifier_cover_timed(month, r, cover_schedule)
    elif cover_mode == "smooth":
        kc = rate_modifier_cover_smooth(r, reference.n_bare)
    else:
        raise ConfigError(f"unknown cover mode {cover_mode!r}")
    return ka * kb * kc


@dataclass(frozen=True)
class ClimateSeries:
    """Contiguous monthly climate over whole years, with derived deficits."""

    start_year: int
    temp: Array   # (nyears, 12) degC
    rain: Array   # (nyears, 12) mm
    pet: Array    # (nyears, 12) mm
    acc: Array    # (nyears, 12) mm, <= 0
    month_days: Array  # (nyears, 12) days

    @classmethod
    def build(cls, start_year: int, temp, rain, site: SiteMoisture,
              pet=None, latitude_deg=None, day_lengths_h=None) -> "ClimateSeries":
        """Assemble a series, computing PET (Thornthwaite) and deficits as needed.

        When ``pet`` is omitted, day lengths come from ``day_lengths_h``
        (per year-month) or from ``latitude_deg`` via the solar model.
        """
        temp = np.atleast_2d(np.asarray(temp, dtype=float))
        rain = np.atleast_2d(np.asarray(rain, dtype=float))
        nyears = temp.shape[0]
        if temp.shape != (nyears, 12) or rain.shape != temp.shape:
            raise DataError("temperature and rainfall must be (nyears, 12)")
        ndays = np.stack([month_lengths(start_year + i) for i in range(nyears)])
        if pet is None:
            pet_arr = np.empty_like(temp)
            for i in range(nyears):
                if day_lengths_h is not None:
                    ld = np.asarray(day_lengths_h, dtype=float)
                    ld_i = ld[i] if ld.ndim == 2 else ld
                elif latitude_deg is not None:
                    ld_i = day_lengths(latitude_deg, start_year + i)
                else:
                    raise ConfigError(
                        "PET missing: provide pet, day lengths, or latitude")
                pet_arr[i] = thornthwaite_pet(temp[i], ld_i, ndays[i])
        else:
            pet_arr = np.atleast_2d(np.asarray(pet, dtype=float))
            if pet_arr.shape != temp.shape:
                raise DataError("pet must match temperature shape")
        acc = np.stack([accumulated_deficit(rain[i], pet_arr[i], site.M)
                        for i in range(nyears)])
        return cls(start_year=start_year, temp=temp, rain=rain,
                   pet=pet_arr, acc=acc, month_days=ndays)

    @property
    def nyears(self) -> int:
        return self.temp.shape[0]

    @property
    def years(self) -> Array:
        return np.arange(self.start_year, self.start_year + self.nyears)

    def index(self, year: int) -> int:
        i = year - self.start_year
        if not 0 <= i < self.nyears:
            raise DataError(f"climate data missing for year {year}")
        return i


def annual_averages(series: ClimateSeries, year: int):
    """Arithmetic means of monthly temperature and deficit for one year."""
    i = series.index(year)
    return float(series.temp[i].mean()), float(series.acc[i].mean())


def annual_rho_field(series: ClimateSeries, year: int, reference: ReferenceState):
    """(Temp^n, Acc^n, rho^n(r)) for one year; the field uses the smooth cover."""
    temp_n, acc_n = annual_averages(series, year)
    ka = rate_modifier_temperature(temp_n, reference.temp0)
    kb = rate_modifier_moisture(acc_n, reference.site)

    def field(r: float) -> float:
        return ka * kb * rate_modifier_cover_smooth(r, reference.n_bare)

    return temp_n, acc_n, field


def reference_from_climate(series: ClimateSeries, baseline_year: int,
                           site: SiteMoisture,
                           n_bare: float = DEFAULT_BARE_MONTHS) -> ReferenceState:
    """Reference state from the baseline year's annual averages."""
    temp0, acc0 = annual_averages(series, baseline_year)
    return ReferenceState(temp0=temp0, acc0=acc0, site=site, n_bare=n_bare)
