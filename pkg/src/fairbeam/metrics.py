"""Per-realization performance measures and unit conversions.

All dBm/watt conversions live here so the rest of the package has one
source of unit truth.
"""

import math
from dataclasses import dataclass

import numpy as np

# Power drawn by one RF chain (watts).
P_RF_WATT = 0.25


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt) + 30.0


def noise_power_watt(psd_dbm_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power over the channel bandwidth."""
    return dbm_to_watt(psd_dbm_hz + 10.0 * math.log10(bandwidth_hz))


def sum_rate(rates) -> float:
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise ValueError("rates must contain at least one UE")
    return float(rates.sum())


def jain_index(rates) -> float:
    """Jain's fairness index (sum r)^2 / (K sum r^2); 1 means absolute fairness.

    Returns NaN for an all-zero rate vector, where the index is undefined;
    callers flag the record instead of failing.
    """
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise ValueError("rates must contain at least one UE")
    denom = rates.size * float((rates**2).sum())
    if denom == 0.0:
        return math.nan
    return float(rates.sum()) ** 2 / denom


def rate_gap(rates) -> float:
    """Spread between the best and worst served UE."""
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise ValueError("rates must contain at least one UE")
    return float(rates.max() - rates.min())


def energy_efficiency(total_rate: float, p_t_watt: float, n_rf: int,
                      p_rf_watt: float = P_RF_WATT) -> float:
    """Sum rate divided by transmit plus RF-chain power consumption."""
    denom = p_t_watt + n_rf * p_rf_watt
    if denom <= 0:
        raise ValueError("total consumed power must be positive")
    return total_rate / denom


@dataclass(frozen=True)
class MetricRecord:
    """Derived measures for one realization and one precoder solution."""

    per_ue_rates: tuple
    sum_rate: float
    jain: float
    rate_gap: float
    energy_efficiency: float

    @classmethod
    def from_rates(cls, rates, p_t_watt: float, n_rf: int,
                   p_rf_watt: float = P_RF_WATT) -> "MetricRecord":
        rates = np.asarray(rates, dtype=float)
        total = sum_rate(rates)
        return cls(
            per_ue_rates=tuple(float(r) for r in rates),
            sum_rate=total,
            jain=jain_index(rates),
            rate_gap=rate_gap(rates),
            energy_efficiency=energy_efficiency(total, p_t_watt, n_rf, p_rf_watt),
        )
