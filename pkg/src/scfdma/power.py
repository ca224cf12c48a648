"""Per-user minimum power under equal power per channel and the two power caps.

All solvers go through :func:`min_power_batch`, so that a given (gains, demand,
cap) triple yields bit-identical power whichever path asks for it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from .model import Instance, ParameterError

# Bisection stops once the bracket is no wider than max(ABS_TOL, REL_TOL * upper end).
REL_TOL = 1e-9
ABS_TOL = 1e-24
MAX_ITER = 400


class RateModel(Protocol):
    def __call__(self, gain, p, bandwidth: float, noise: float):
        """Rate in bit/s on one channel; must be increasing in ``p``."""


class ShannonRate:
    """B log2(1 + p g / sigma^2)."""

    def __call__(self, gain, p, bandwidth, noise):
        return bandwidth * np.log2(1.0 + p * gain / noise)


SHANNON = ShannonRate()


def rate(gain: float, p: float, bandwidth: float, noise: float, model: RateModel = SHANNON) -> float:
    if gain <= 0 or bandwidth <= 0 or noise <= 0:
        raise ParameterError("gain, bandwidth and noise must be positive")
    if p < 0:
        raise ParameterError(f"power must be non-negative (got {p})")
    return float(model(gain, p, bandwidth, noise))


def max_per_channel_power(c: int, Pu: float, Ps: float) -> float:
    if c < 1:
        raise ParameterError(f"c must be >= 1 (got {c})")
    return min(Pu / c, Ps)


def total_rate(gains: np.ndarray, p, bandwidth: float, noise: float, model: RateModel = SHANNON) -> np.ndarray:
    """Sum of per-channel rates over the last axis of ``gains`` at power ``p``.

    Channels are accumulated left to right so the result for one row never
    depends on how many rows are evaluated together.
    """
    total = model(gains[..., 0], p, bandwidth, noise)
    for k in range(1, gains.shape[-1]):
        total = total + model(gains[..., k], p, bandwidth, noise)
    return total


def min_power_batch(gains, demands, pmax, bandwidth: float, noise: float,
                    model: RateModel = SHANNON) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized minimum per-channel power.

    ``gains`` has shape ``(..., c)``; ``demands`` and ``pmax`` broadcast to the
    leading shape. Returns ``(feasible, p)`` where ``p`` is NaN for infeasible
    entries and otherwise the upper end of the final bisection bracket.
    """
    gains = np.asarray(gains, dtype=float)
    lead = gains.shape[:-1]
    c = gains.shape[-1]
    g = gains.reshape(-1, c)
    d = np.broadcast_to(np.asarray(demands, dtype=float), lead).reshape(-1)
    hi = np.broadcast_to(np.asarray(pmax, dtype=float), lead).reshape(-1).copy()
    lo = np.zeros_like(hi)

    feasible = total_rate(g, hi, bandwidth, noise, model) >= d
    active = feasible.copy()
    for _ in range(MAX_ITER):
        active &= (hi - lo) > np.maximum(ABS_TOL, REL_TOL * hi)
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        ok = total_rate(g[idx], mid, bandwidth, noise, model) >= d[idx]
        hi[idx] = np.where(ok, mid, hi[idx])
        lo[idx] = np.where(ok, lo[idx], mid)
    p = np.where(feasible, hi, np.nan)
    return feasible.reshape(lead), p.reshape(lead)


def capacity_batch(gains, pmax, bandwidth: float, noise: float, model: RateModel = SHANNON) -> np.ndarray:
    """Total rate at the per-channel cap: the largest demand each channel set can carry."""
    gains = np.asarray(gains, dtype=float)
    lead = gains.shape[:-1]
    p = np.broadcast_to(np.asarray(pmax, dtype=float), lead)
    return total_rate(gains, p, bandwidth, noise, model)


@dataclass(frozen=True)
class UserCost:
    feasible: bool
    per_channel_power: float | None = None
    total: float | None = None


def _channel_gains(user: int, channels: Iterable[int], instance: Instance) -> np.ndarray:
    ch = list(channels)
    if not ch:
        raise ParameterError("channel set must be non-empty")
    if len(set(ch)) != len(ch):
        raise ParameterError(f"duplicate channels in {ch}")
    if not 0 <= user < instance.M:
        raise ParameterError(f"user index must lie in 0..{instance.M - 1} (got {user})")
    if min(ch) < 1 or max(ch) > instance.N:
        raise ParameterError(f"channels must lie in 1..{instance.N} (got {ch})")
    return instance.gains[user, np.asarray(ch) - 1]


def min_power_for_demand(user: int, channels: Iterable[int], instance: Instance,
                         model: RateModel = SHANNON) -> UserCost:
    g = _channel_gains(user, channels, instance)
    c = g.size
    pmax = max_per_channel_power(c, instance.user_power_limit, instance.channel_peak_power_limit)
    feasible, p = min_power_batch(
        g[None, :], instance.demands[user], pmax, instance.channel_bandwidth, instance.noise_power, model
    )
    if not feasible[0]:
        return UserCost(False)
    p0 = float(p[0])
    return UserCost(True, p0, c * p0)


def feasibility_check(user: int, channels: Iterable[int], instance: Instance,
                      model: RateModel = SHANNON) -> bool:
    g = _channel_gains(user, channels, instance)
    pmax = max_per_channel_power(g.size, instance.user_power_limit, instance.channel_peak_power_limit)
    cap = capacity_batch(g[None, :], pmax, instance.channel_bandwidth, instance.noise_power, model)
    return bool(cap[0] >= instance.demands[user])
