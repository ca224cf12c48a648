"""Exact localized (contiguous-interval) allocation by subset dynamic programming.

Each user receives one run of adjacent channels; runs are pairwise disjoint,
may differ in length, and need not cover the band.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .model import GuardError, Instance, ParameterError, check_instance
from .mpca import SolveReport
from .power import (
    SHANNON, RateModel, UserCost, capacity_batch, max_per_channel_power, min_power_batch,
    min_power_for_demand,
)

MAX_USERS = 16


@dataclass(frozen=True)
class ContiguousResult:
    intervals: tuple[tuple[int, int], ...]  # per user: (1-based start channel, length)
    per_user_channel_power: tuple[float, ...]
    total_power: float

    def to_dict(self) -> dict:
        return {
            "intervals": [{"start": a, "length": n} for a, n in self.intervals],
            "channels": [list(range(a, a + n)) for a, n in self.intervals],
            "per_user_channel_power_w": list(self.per_user_channel_power),
            "total_power_w": self.total_power,
        }


def lfdma_user_block_cost(user: int, start: int, length: int, instance: Instance,
                          model: RateModel = SHANNON) -> UserCost:
    if length < 1 or start < 1 or start + length - 1 > instance.N:
        raise ParameterError(f"interval start={start}, length={length} outside 1..{instance.N}")
    return min_power_for_demand(user, range(start, start + length), instance, model)


def max_interval_length(M: int, N: int) -> int:
    # Every other user needs at least one channel of its own.
    return N - M + 1


def _interval_gains(instance: Instance, length: int) -> np.ndarray:
    starts = np.arange(instance.N - length + 1)
    cols = starts[:, None] + np.arange(length)[None, :]
    return instance.gains[:, cols]


def interval_cost_table(instance: Instance, model: RateModel = SHANNON) -> tuple[np.ndarray, np.ndarray]:
    """``cost[u, a, n]`` = n * p for user u on channels a+1 .. a+n (inf when infeasible).

    Also returns the matching per-channel powers ``p[u, a, n]``.
    """
    M, N = instance.M, instance.N
    cost = np.full((M, N, N + 1), np.inf)
    power = np.full((M, N, N + 1), np.nan)
    for n in range(1, max_interval_length(M, N) + 1):
        pmax = max_per_channel_power(n, instance.user_power_limit, instance.channel_peak_power_limit)
        feasible, p = min_power_batch(
            _interval_gains(instance, n), instance.demands[:, None], pmax,
            instance.channel_bandwidth, instance.noise_power, model,
        )
        cost[:, : N - n + 1, n] = np.where(feasible, n * p, np.inf)
        power[:, : N - n + 1, n] = p
    return cost, power


def interval_capacity_table(instance: Instance, model: RateModel = SHANNON) -> np.ndarray:
    M, N = instance.M, instance.N
    cap = np.full((M, N, N + 1), -np.inf)
    for n in range(1, max_interval_length(M, N) + 1):
        pmax = max_per_channel_power(n, instance.user_power_limit, instance.channel_peak_power_limit)
        cap[:, : N - n + 1, n] = capacity_batch(
            _interval_gains(instance, n), pmax, instance.channel_bandwidth, instance.noise_power, model
        )
    return cap


def _subset_dp(cost: np.ndarray) -> np.ndarray:
    """``best[j, S]``: least cost placing exactly the users in bitmask S within channels 1..j."""
    M, N, _ = cost.shape
    full = 1 << M
    subsets = np.arange(full)
    best = np.full((N + 1, full), np.inf)
    best[0, 0] = 0.0
    with_u = [subsets[(subsets >> u) & 1 == 1] for u in range(M)]
    for j in range(1, N + 1):
        cur = best[j - 1].copy()
        lengths = np.arange(1, j + 1)
        starts = j - lengths
        for u in range(M):
            c = cost[u, starts, lengths]
            fin = np.isfinite(c)
            if not fin.any():
                continue
            prev = best[starts[fin]][:, with_u[u] ^ (1 << u)]
            cand = (prev + c[fin][:, None]).min(axis=0)
            cur[with_u[u]] = np.minimum(cur[with_u[u]], cand)
        best[j] = cur
    return best


def _backtrack(best: np.ndarray, cost: np.ndarray) -> list[tuple[int, int]]:
    M, N, _ = cost.shape
    intervals: list[tuple[int, int] | None] = [None] * M
    S = (1 << M) - 1
    j = N
    while S:
        if best[j - 1, S] == best[j, S]:
            j -= 1
            continue
        for u in range(M):
            if not (S >> u) & 1:
                continue
            hit = False
            for n in range(1, j + 1):
                if best[j - n, S ^ (1 << u)] + cost[u, j - n, n] == best[j, S]:
                    intervals[u] = (j - n + 1, n)
                    S ^= 1 << u
                    j -= n
                    hit = True
                    break
            if hit:
                break
        else:
            raise RuntimeError("backtracking failed to reproduce the DP value")
    return intervals


def _guard(instance: Instance, max_users: int) -> None:
    check_instance(instance)
    if instance.M > max_users:
        raise GuardError(
            f"LFDMA subset DP refused for M={instance.M} > {max_users}; downsize the instance"
        )


def lfdma_optimal(instance: Instance, model: RateModel = SHANNON, max_users: int = MAX_USERS) -> SolveReport:
    """Least total power over all assignments of disjoint contiguous intervals."""
    _guard(instance, max_users)
    t0 = time.perf_counter()
    meta = {"interval_lengths": "variable per user", "unused_channels": "allowed"}
    if not LfdmaFeasibility(instance, model, max_users)(instance.demands):
        return SolveReport(None, 0, 0, time.perf_counter() - t0, "lfdma", meta)
    cost, power = interval_cost_table(instance, model)
    best = _subset_dp(cost)
    full = (1 << instance.M) - 1
    n_intervals = int(sum(instance.N - n + 1 for n in range(1, max_interval_length(instance.M, instance.N) + 1)))
    n_feasible = int(np.isfinite(cost).sum())
    result = None
    if np.isfinite(best[instance.N, full]):
        intervals = _backtrack(best, cost)
        total = 0.0
        for u, (a, n) in enumerate(intervals):
            total += cost[u, a - 1, n]
        result = ContiguousResult(
            tuple(intervals),
            tuple(float(power[u, a - 1, n]) for u, (a, n) in enumerate(intervals)),
            float(total),
        )
    return SolveReport(result, instance.M * n_intervals, n_feasible, time.perf_counter() - t0, "lfdma", meta)


class LfdmaFeasibility:
    """Decides whether a uniform demand admits any disjoint contiguous assignment."""

    def __init__(self, instance: Instance, model: RateModel = SHANNON, max_users: int = MAX_USERS):
        _guard(instance, max_users)
        self.M, self.N = instance.M, instance.N
        self.cap = interval_capacity_table(instance, model)

    @property
    def upper_bound(self) -> float:
        return float(self.cap.max())

    def __call__(self, demand) -> bool:
        d = np.broadcast_to(np.asarray(demand, dtype=float), (self.M,))[:, None, None]
        cost = np.where(self.cap >= d, 0.0, np.inf)
        return bool(np.isfinite(_subset_dp(cost)[self.N, (1 << self.M) - 1]))


def lfdma_feasible(instance: Instance, model: RateModel = SHANNON) -> bool:
    return LfdmaFeasibility(instance, model)(instance.demands)


def lfdma_bruteforce(instance: Instance, model: RateModel = SHANNON) -> tuple[float, list[tuple[int, int]]] | None:
    """Oracle: enumerate every assignment of disjoint intervals (tiny instances only)."""
    check_instance(instance)
    M, N = instance.M, instance.N
    if M > 4 or N > 12:
        raise GuardError("brute-force LFDMA refused beyond M=4, N=12")
    costs = {}
    for u in range(M):
        for a in range(1, N + 1):
            for n in range(1, N - a + 2):
                uc = lfdma_user_block_cost(u, a, n, instance, model)
                if uc.feasible:
                    costs[u, a, n] = uc.total
    best = None

    def rec(u, used, chosen):
        nonlocal best
        if u == M:
            total = 0.0
            for v, (a, n) in enumerate(chosen):
                total += costs[v, a, n]
            if best is None or total < best[0]:
                best = (total, list(chosen))
            return
        for a in range(1, N + 1):
            for n in range(1, N - a + 2):
                bits = ((1 << n) - 1) << (a - 1)
                if bits & used:
                    break
                if (u, a, n) in costs:
                    chosen.append((a, n))
                    rec(u + 1, used | bits, chosen)
                    chosen.pop()

    rec(0, 0, [])
    return best
