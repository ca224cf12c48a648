"""Random uplink channel gains: COST-231 Hata path loss, log-normal shadowing, Rayleigh fading.

Randomness comes from numpy's PCG64 generator. Each user draws from its own
substream spawned from ``SeedSequence(seed)``, in a fixed order: radius,
angle, shadowing, then one fading draw per channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .model import Instance, ParameterError

COST231_F_RANGE_MHZ = (1500.0, 2000.0)


@dataclass(frozen=True)
class Scenario:
    cell_radius: float = 1000.0
    carrier_frequency: float = 2e9
    M: int = 10
    N: int = 64
    channel_bandwidth: float = 180e3
    bs_antenna_height: float = 30.0
    ms_antenna_height: float = 1.5
    min_user_distance: float = 50.0
    shadowing_sigma: float = 8.0
    noise_psd: float = -174.0
    user_power_limit: float = 0.2
    channel_peak_power_limit: float = 0.01
    demand: float = 400e3
    seed: int = 0
    city_correction_db: float = 0.0

    def violations(self) -> list[str]:
        v = []
        for name in ["cell_radius", "carrier_frequency", "channel_bandwidth", "bs_antenna_height",
                     "ms_antenna_height", "min_user_distance", "user_power_limit",
                     "channel_peak_power_limit", "demand"]:
            if not getattr(self, name) > 0:
                v.append(f"{name} > 0 (got {getattr(self, name)})")
        if self.shadowing_sigma < 0:
            v.append("shadowing_sigma >= 0")
        if not self.min_user_distance < self.cell_radius:
            v.append("min_user_distance < cell_radius")
        if self.M < 1 or self.N < self.M:
            v.append(f"need 1 <= M <= N (got M={self.M}, N={self.N})")
        return v

    def with_seed(self, seed: int) -> Scenario:
        return replace(self, seed=int(seed))

    # Config documents spell units out in the key names.
    _UNITS = {
        "cell_radius": "cell_radius_m",
        "carrier_frequency": "carrier_frequency_hz",
        "channel_bandwidth": "channel_bandwidth_hz",
        "bs_antenna_height": "bs_antenna_height_m",
        "ms_antenna_height": "ms_antenna_height_m",
        "min_user_distance": "min_user_distance_m",
        "shadowing_sigma": "shadowing_sigma_db",
        "noise_psd": "noise_psd_dbm_hz",
        "user_power_limit": "user_power_limit_w",
        "channel_peak_power_limit": "channel_peak_power_limit_w",
        "demand": "demand_bps",
        "city_correction_db": "city_correction_db",
    }

    def to_dict(self) -> dict:
        return {self._UNITS.get(k, k): v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        keys = {cls._UNITS.get(f.name, f.name): f for f in fields(cls)}
        unknown = sorted(set(d) - set(keys))
        if unknown:
            raise ParameterError(f"unknown scenario fields: {', '.join(unknown)}")
        kwargs = {}
        for key, value in d.items():
            f = keys[key]
            kwargs[f.name] = int(value) if f.name in ("M", "N", "seed") else float(value)
        sc = cls(**kwargs)
        if sc.violations():
            raise ParameterError("invalid scenario: " + "; ".join(sc.violations()))
        return sc

    @classmethod
    def from_json(cls, path: str | Path) -> Scenario:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as e:
            raise ParameterError(f"{path}: not valid JSON ({e})") from e


def cost231_path_loss_db(d_km: float, f_mhz, h_b: float, h_m: float, c_db: float = 0.0):
    """COST-231 Hata path loss in dB (``c_db`` = 0 for medium cities, 3 for metropolitan centres)."""
    if not d_km > 0:
        raise ParameterError(f"distance must be positive (got {d_km} km)")
    lf = np.log10(f_mhz)
    a_hm = (1.1 * lf - 0.7) * h_m - (1.56 * lf - 0.8)
    return (46.3 + 33.9 * lf - 13.82 * math.log10(h_b) - a_hm
            + (44.9 - 6.55 * math.log10(h_b)) * math.log10(d_km) + c_db)


def noise_power(psd_dbm_hz: float, bandwidth: float) -> float:
    """Noise power in watts from a PSD in dBm/Hz."""
    if not bandwidth > 0:
        raise ParameterError("bandwidth must be positive")
    return 10.0 ** ((psd_dbm_hz - 30.0) / 10.0) * bandwidth


def channel_frequencies(scenario: Scenario) -> np.ndarray:
    """Centre frequency (Hz) of each channel, with the band centred on the carrier."""
    j = np.arange(1, scenario.N + 1)
    return scenario.carrier_frequency + (j - (scenario.N + 1) / 2) * scenario.channel_bandwidth


def sample_annulus_radius(rng: np.random.Generator, r_min: float, r_max: float, size=None):
    """Distance of a point uniform over the annulus r_min <= r <= r_max."""
    u = rng.random(size)
    return np.sqrt(r_min ** 2 + u * (r_max ** 2 - r_min ** 2))


def user_streams(seed: int, M: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(ss)) for ss in np.random.SeedSequence(seed).spawn(M)]


def sample_gains(scenario: Scenario, fading: bool = True) -> Instance:
    """Draw one Instance; ``fading=False`` fixes every Rayleigh power to 1."""
    bad = scenario.violations()
    if bad:
        raise ParameterError("invalid scenario: " + "; ".join(bad))
    M, N = scenario.M, scenario.N
    f_mhz = channel_frequencies(scenario) / 1e6
    gains = np.empty((M, N))
    distances = np.empty(M)
    for i, rng in enumerate(user_streams(scenario.seed, M)):
        r = sample_annulus_radius(rng, scenario.min_user_distance, scenario.cell_radius)
        rng.uniform(0.0, 2 * math.pi)  # bearing; path loss only needs the distance
        shadow = rng.normal(0.0, scenario.shadowing_sigma)
        fade = rng.exponential(1.0, N) if fading else np.ones(N)
        pl = cost231_path_loss_db(r / 1000.0, f_mhz, scenario.bs_antenna_height,
                                  scenario.ms_antenna_height, scenario.city_correction_db)
        gains[i] = 10.0 ** (-(pl + shadow) / 10.0) * fade
        distances[i] = r
    lo, hi = COST231_F_RANGE_MHZ
    out_of_range = bool(np.any((f_mhz < lo) | (f_mhz > hi)))
    return Instance(
        M=M,
        N=N,
        demands=np.full(M, scenario.demand),
        gains=gains,
        noise_power=noise_power(scenario.noise_psd, scenario.channel_bandwidth),
        channel_bandwidth=scenario.channel_bandwidth,
        user_power_limit=scenario.user_power_limit,
        channel_peak_power_limit=scenario.channel_peak_power_limit,
        metadata={
            "seed": scenario.seed,
            "user_distance_m": distances.tolist(),
            "cost231_frequency_out_of_range": out_of_range,
        },
    )
