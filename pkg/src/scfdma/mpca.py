"""Exact minimum-power interleaved allocation: block enumeration plus matching."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Container, Iterable, Sequence

import numpy as np

from .blocks import block_groups
from .matching import WeightMatrix, kuhn_munkres
from .model import (
    Allocation, AllocationResult, ChannelBlock, GuardError, Instance, ParameterError,
    check_instance, channels_of,
)
from .power import (
    SHANNON, RateModel, capacity_batch, feasibility_check, max_per_channel_power,
    min_power_batch, min_power_for_demand,
)


@dataclass
class SolveReport:
    result: Any  # AllocationResult, ContiguousResult, or None when infeasible
    blocks_examined: int
    blocks_feasible: int
    wall_time: float
    scheme: str = "ifdma"
    metadata: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.result is not None

    @property
    def total_power(self) -> float | None:
        return None if self.result is None else self.result.total_power

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "feasible": self.feasible,
            "result": None if self.result is None else self.result.to_dict(),
            "blocks_examined": self.blocks_examined,
            "blocks_feasible": self.blocks_feasible,
            "wall_time_s": self.wall_time,
            "metadata": dict(self.metadata),
        }


def _start_windows(M: int, N: int, c: int, s: int) -> np.ndarray:
    """0-based channel columns for every start channel of a (c, s) layout, shape (starts, c)."""
    stride = M + s
    n_starts = N - (c - 1) * stride
    return np.arange(n_starts)[:, None] + stride * np.arange(c)[None, :]


def group_cost_table(instance: Instance, c: int, s: int,
                     model: RateModel = SHANNON) -> tuple[np.ndarray, np.ndarray]:
    """Per-user cost of every interleaved channel set with c channels at spacing M+s.

    Column ``a`` holds the set starting at channel ``a + 1``; the block
    ``(c, s, q)`` uses columns ``q .. q+M-1`` (positions 1..M). Returns
    ``(cost, p)`` with ``cost = c * p`` and ``inf``/``nan`` where infeasible.
    """
    cols = _start_windows(instance.M, instance.N, c, s)
    g = instance.gains[:, cols]
    pmax = max_per_channel_power(c, instance.user_power_limit, instance.channel_peak_power_limit)
    feasible, p = min_power_batch(
        g, instance.demands[:, None], pmax, instance.channel_bandwidth, instance.noise_power, model
    )
    cost = np.where(feasible, c * p, np.inf)
    return cost, p


def group_capacity_table(instance: Instance, c: int, s: int, model: RateModel = SHANNON) -> np.ndarray:
    cols = _start_windows(instance.M, instance.N, c, s)
    pmax = max_per_channel_power(c, instance.user_power_limit, instance.channel_peak_power_limit)
    return capacity_batch(instance.gains[:, cols], pmax, instance.channel_bandwidth, instance.noise_power, model)


def build_weight_matrix(instance: Instance, block: ChannelBlock, model: RateModel = SHANNON) -> WeightMatrix:
    """Weights ``-c * p`` for user i at position j+1 of ``block``; infeasible pairs masked."""
    M, N = instance.M, instance.N
    if not block.is_valid(M, N):
        raise ParameterError(f"invalid block {block} for M={M}, N={N}: {block.violations(M, N)}")
    cost, _ = group_cost_table(instance, block.c, block.s, model)
    sub = cost[:, block.q:block.q + M]
    return WeightMatrix(-sub, np.isfinite(sub))


def _no_perfect_matching(mask: np.ndarray) -> bool:
    return not (mask.any(axis=1).all() and mask.any(axis=0).all())


def mpca(instance: Instance, model: RateModel = SHANNON, c_values: Container[int] | None = None) -> SolveReport:
    """Minimum total power over every channel block and user permutation.

    ``c_values`` restricts the search to blocks with those channel counts.
    Ties keep the earliest block in enumeration order.
    """
    check_instance(instance)
    t0 = time.perf_counter()
    M = instance.M
    examined = n_feasible = 0
    best = None
    for c, s, n_shifts in block_groups(M, instance.N):
        if c_values is not None and c not in c_values:
            continue
        cost, p = group_cost_table(instance, c, s, model)
        finite = np.isfinite(cost)
        for q in range(n_shifts):
            examined += 1
            mask = finite[:, q:q + M]
            if _no_perfect_matching(mask):
                continue
            res = kuhn_munkres(WeightMatrix(-cost[:, q:q + M], mask))
            if not res.feasible:
                continue
            n_feasible += 1
            total = -res.total_weight
            if best is None or total < best[0]:
                best = (total, ChannelBlock(c, s, q), res.perm, p[:, q:q + M])
    result = None
    if best is not None:
        total, block, perm, pw = best
        result = AllocationResult(
            Allocation(block, tuple(j + 1 for j in perm)),
            tuple(float(pw[i, j]) for i, j in enumerate(perm)),
            total,
        )
    return SolveReport(result, examined, n_feasible, time.perf_counter() - t0, "ifdma")


class IfdmaFeasibility:
    """Decides, for a uniform demand, whether any block admits a feasible perfect matching.

    Capacities at the power cap do not depend on the demand, so they are
    computed once and reused across a demand search.
    """

    def __init__(self, instance: Instance, model: RateModel = SHANNON):
        self.M = instance.M
        self.groups = [
            (c, s, group_capacity_table(instance, c, s, model))
            for c, s, _ in block_groups(instance.M, instance.N)
        ]

    @property
    def upper_bound(self) -> float:
        return max(float(t.max()) for _, _, t in self.groups)

    def __call__(self, demand) -> bool:
        M = self.M
        d = np.broadcast_to(np.asarray(demand, dtype=float), (M,))[:, None]
        zeros = np.zeros((M, M))
        for _, _, cap in self.groups:
            ok = cap >= d
            n_shifts = ok.shape[1] - M + 1
            # Sliding-window Hall checks on single rows/columns before matching.
            csum = np.concatenate([np.zeros((M, 1), int), np.cumsum(ok, axis=1)], axis=1)
            rows_ok = np.all(csum[:, M:M + n_shifts] - csum[:, :n_shifts] > 0, axis=0)
            col_any = np.concatenate([[0], np.cumsum(ok.any(axis=0))])
            cols_ok = (col_any[M:M + n_shifts] - col_any[:n_shifts]) == M
            for q in np.flatnonzero(rows_ok & cols_ok):
                if kuhn_munkres(WeightMatrix(zeros, ok[:, q:q + M])).feasible:
                    return True
        return False


def ifdma_feasible(instance: Instance, model: RateModel = SHANNON) -> bool:
    check_instance(instance)
    return IfdmaFeasibility(instance, model)(instance.demands)


def evaluate_allocation(instance: Instance, allocation: Allocation, model: RateModel = SHANNON) -> float | None:
    """Total power of a fixed allocation, recomputed user by user; None if any user is infeasible."""
    M = instance.M
    block = allocation.block
    if len(allocation.perm) != M:
        raise ParameterError(f"allocation has {len(allocation.perm)} users, instance has {M}")
    if not block.is_valid(M, instance.N):
        raise ParameterError(f"invalid block {block}: {block.violations(M, instance.N)}")
    total = 0.0
    for i in range(M):
        ch = channels_of(block, allocation.perm[i], M)
        if not feasibility_check(i, ch, instance, model):
            return None
        total += min_power_for_demand(i, ch, instance, model).total
    return total


def evaluate_allocations(instance: Instance, allocations: Sequence[Allocation],
                         model: RateModel = SHANNON) -> np.ndarray:
    """Batched :func:`evaluate_allocation`; NaN marks infeasible allocations."""
    M = instance.M
    out = np.full(len(allocations), np.nan)
    by_c: dict[int, list[int]] = {}
    for k, a in enumerate(allocations):
        by_c.setdefault(a.block.c, []).append(k)
    for c, ks in by_c.items():
        cols = np.array([[channels_of(allocations[k].block, allocations[k].perm[i], M) for i in range(M)]
                         for k in ks]) - 1
        g = instance.gains[np.arange(M)[None, :, None], cols]
        pmax = max_per_channel_power(c, instance.user_power_limit, instance.channel_peak_power_limit)
        feasible, p = min_power_batch(
            g, instance.demands[None, :], pmax, instance.channel_bandwidth, instance.noise_power, model
        )
        cost = c * p
        total = np.zeros(len(ks))
        for i in range(M):
            total = total + cost[:, i]
        out[ks] = np.where(feasible.all(axis=1), total, np.nan)
    return out


def exhaustive_search(instance: Instance, blocks: Iterable[ChannelBlock] | None = None,
                      model: RateModel = SHANNON) -> tuple[float, Allocation] | None:
    """Oracle: scan every (block, permutation) pair over the same cost pipeline."""
    check_instance(instance)
    M = instance.M
    if M > 7:
        raise GuardError(f"exhaustive search refused for M={M} > 7")
    if blocks is None:
        from .blocks import iter_blocks
        blocks = iter_blocks(M, instance.N)
    tables: dict[tuple[int, int], np.ndarray] = {}
    best = None
    for block in blocks:
        key = (block.c, block.s)
        if key not in tables:
            tables[key] = group_cost_table(instance, block.c, block.s, model)[0].tolist()
        cost = [row[block.q:block.q + M] for row in tables[key]]
        for perm in itertools.permutations(range(M)):
            total = 0.0
            for i, j in enumerate(perm):
                total += cost[i][j]
            if total != float("inf") and (best is None or total < best[0]):
                best = (total, Allocation(block, tuple(j + 1 for j in perm)))
    return best
