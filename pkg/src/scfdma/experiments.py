"""Demand sweeps and maximum-supported-demand searches over random channel draws."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .gainsim import Scenario, sample_gains
from .lfdma import LfdmaFeasibility, lfdma_optimal
from .model import GuardError, Instance, ParameterError
from .mpca import IfdmaFeasibility, mpca

SCHEMES = ("ifdma", "lfdma")
DEFAULT_RESOLUTION = 10e3


@dataclass(frozen=True)
class SweepRow:
    demand: float
    scheme: str
    seed: int
    feasible: bool
    total_power: float | None
    solve_time: float | None = None
    note: str = ""

    def key(self):
        return (self.seed, self.demand, self.scheme)


def _check_schemes(schemes: Iterable[str]) -> list[str]:
    schemes = list(schemes)
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise ParameterError(f"schemes must be drawn from {SCHEMES} (got {schemes})")
    return schemes


def solve(instance: Instance, scheme: str):
    if scheme == "ifdma":
        return mpca(instance)
    if scheme == "lfdma":
        return lfdma_optimal(instance)
    raise ParameterError(f"unknown scheme {scheme!r}")


def _sweep_one_seed(scenario: Scenario, demands: Sequence[float], schemes: Sequence[str], seed: int) -> list[SweepRow]:
    base = sample_gains(scenario.with_seed(seed))
    rows = []
    for d in demands:
        inst = base.with_demands(d)
        for scheme in schemes:
            try:
                rep = solve(inst, scheme)
            except GuardError as e:
                rows.append(SweepRow(float(d), scheme, seed, False, None, None, f"guard: {e}"))
                continue
            rows.append(SweepRow(float(d), scheme, seed, rep.feasible, rep.total_power, rep.wall_time))
    return rows


def _pool_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_sweep(scenario: Scenario, demands: Sequence[float], seeds: Sequence[int],
              schemes: Sequence[str] = SCHEMES, workers: int = 1) -> list[SweepRow]:
    """Solve every (seed, demand, scheme); one gain draw per seed is shared by all its solves."""
    if not demands or not seeds:
        raise ParameterError("demands and seeds must be non-empty")
    schemes = _check_schemes(schemes)
    chunks = _pool_map(partial(_sweep_one_seed, scenario, list(demands), schemes), list(seeds), workers)
    return sorted((r for chunk in chunks for r in chunk), key=SweepRow.key)


def feasibility_oracle(instance: Instance, scheme: str):
    """Demand -> bool for a fixed gain draw; exposes ``upper_bound`` (no demand above it is feasible)."""
    if scheme == "ifdma":
        return IfdmaFeasibility(instance)
    if scheme == "lfdma":
        return LfdmaFeasibility(instance)
    raise ParameterError(f"unknown scheme {scheme!r}")


def max_supported_demand_on(instance: Instance, scheme: str, resolution: float = DEFAULT_RESOLUTION) -> float:
    """Largest multiple of ``resolution`` that is feasible as a uniform demand (0 if none).

    Feasibility is monotone in the demand, so bisection over the grid index suffices.
    """
    if not resolution > 0:
        raise ParameterError("resolution must be positive")
    feasible = feasibility_oracle(instance, scheme)
    lo, hi = 0, int(math.floor(feasible.upper_bound / resolution))
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(mid * resolution):
            lo = mid
        else:
            hi = mid - 1
    return lo * resolution


def max_supported_demand(scenario: Scenario, scheme: str, resolution: float = DEFAULT_RESOLUTION) -> float:
    return max_supported_demand_on(sample_gains(scenario), scheme, resolution)


@dataclass(frozen=True)
class MaxDemandRow:
    seed: int
    scheme: str
    max_demand: float


def _max_one_seed(scenario: Scenario, schemes: Sequence[str], resolution: float, seed: int) -> list[MaxDemandRow]:
    inst = sample_gains(scenario.with_seed(seed))
    return [MaxDemandRow(seed, s, max_supported_demand_on(inst, s, resolution)) for s in schemes]


def run_max_demand(scenario: Scenario, seeds: Sequence[int], schemes: Sequence[str] = SCHEMES,
                   resolution: float = DEFAULT_RESOLUTION, workers: int = 1) -> list[MaxDemandRow]:
    schemes = _check_schemes(schemes)
    chunks = _pool_map(partial(_max_one_seed, scenario, schemes, resolution), list(seeds), workers)
    return sorted((r for chunk in chunks for r in chunk), key=lambda r: (r.seed, r.scheme))


# -- CSV and summaries ---------------------------------------------------------

SWEEP_FIELDS = ["seed", "demand_bps", "scheme", "feasible", "total_power_w", "note"]


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_rows_csv(rows: Iterable[SweepRow], path_or_buf, include_timing: bool = False) -> None:
    """Write sweep rows; timing is opt-in because it breaks byte-for-byte reproducibility."""
    fields = SWEEP_FIELDS + (["solve_time_s"] if include_timing else [])
    own = isinstance(path_or_buf, (str, Path))
    f = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            line = [r.seed, _fmt(r.demand), r.scheme, int(r.feasible), _fmt(r.total_power), r.note]
            if include_timing:
                line.append(_fmt(r.solve_time))
            w.writerow(line)
    finally:
        if own:
            f.close()


def read_rows_csv(path_or_buf) -> list[SweepRow]:
    text = Path(path_or_buf).read_text() if isinstance(path_or_buf, (str, Path)) else path_or_buf.read()
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        t = rec.get("solve_time_s")
        out.append(SweepRow(
            demand=float(rec["demand_bps"]),
            scheme=rec["scheme"],
            seed=int(rec["seed"]),
            feasible=rec["feasible"] == "1",
            total_power=float(rec["total_power_w"]) if rec["total_power_w"] else None,
            solve_time=float(t) if t else None,
            note=rec["note"],
        ))
    return out


def write_max_demand_csv(rows: Iterable[MaxDemandRow], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["seed", "scheme", "max_demand_bps"])
        for r in rows:
            w.writerow([r.seed, r.scheme, _fmt(r.max_demand)])


def _stats(values) -> dict:
    if len(values) == 0:
        return {"mean": None, "p10": None, "p90": None}
    v = np.asarray(values, dtype=float)
    return {"mean": float(v.mean()), "p10": float(np.percentile(v, 10)), "p90": float(np.percentile(v, 90))}


def summarize_sweep(rows: Sequence[SweepRow]) -> list[dict]:
    """Per (demand, scheme): feasibility fraction and power statistics over feasible seeds.

    ``paired_*`` entries restrict to seeds where every scheme at that demand was feasible.
    """
    by_point: dict[tuple[float, str], list[SweepRow]] = {}
    for r in rows:
        by_point.setdefault((r.demand, r.scheme), []).append(r)
    schemes = sorted({r.scheme for r in rows})
    all_feasible: dict[float, set[int]] = {}
    for d in sorted({r.demand for r in rows}):
        seeds = None
        for s in schemes:
            ok = {r.seed for r in by_point.get((d, s), []) if r.feasible}
            seeds = ok if seeds is None else seeds & ok
        all_feasible[d] = seeds or set()
    out = []
    for (d, s), rs in sorted(by_point.items()):
        powers = [r.total_power for r in rs if r.feasible]
        paired = [r.total_power for r in rs if r.feasible and r.seed in all_feasible[d]]
        st = _stats(powers)
        out.append({
            "demand_bps": d,
            "scheme": s,
            "seeds": len(rs),
            "feasible_fraction": sum(r.feasible for r in rs) / len(rs),
            "mean_power_w": st["mean"],
            "p10_power_w": st["p10"],
            "p90_power_w": st["p90"],
            "paired_seeds": len(paired),
            "paired_mean_power_w": _stats(paired)["mean"],
        })
    return out


def summarize_max_demand(rows: Sequence[MaxDemandRow]) -> dict:
    out: dict = {}
    for s in sorted({r.scheme for r in rows}):
        st = _stats([r.max_demand for r in rows if r.scheme == s])
        out[s] = {"mean_bps": st["mean"], "p10_bps": st["p10"], "p90_bps": st["p90"]}
    if {"ifdma", "lfdma"} <= out.keys() and out["ifdma"]["mean_bps"]:
        out["ratio_of_means_lfdma_over_ifdma"] = out["lfdma"]["mean_bps"] / out["ifdma"]["mean_bps"]
    return out


def parse_demands(text: str) -> list[float]:
    """``start:step:stop`` (inclusive) or a comma-separated list, in bit/s."""
    try:
        if ":" in text:
            start, step, stop = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9))
            return [start + k * step for k in range(n + 1)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"cannot parse demand list {text!r}") from None
