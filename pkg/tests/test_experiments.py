import io

import numpy as np
import pytest

from scfdma.experiments import (
    SweepRow, feasibility_oracle, max_supported_demand, max_supported_demand_on, parse_demands,
    read_rows_csv, run_max_demand, run_sweep, summarize_max_demand, summarize_sweep, write_rows_csv,
)
from scfdma.gainsim import Scenario, sample_gains
from scfdma.model import ParameterError
from scfdma.mpca import mpca

# A small cell keeps most draws feasible at moderate demand.
SMALL = Scenario(cell_radius=300.0, M=4, N=16, seed=100)


def test_sweep_pairs_rows_and_is_deterministic():
    rows = run_sweep(SMALL, [400e3], [100], ["ifdma", "lfdma"])
    assert [(r.scheme, r.demand, r.seed) for r in rows] == [("ifdma", 400e3, 100), ("lfdma", 400e3, 100)]
    inst = sample_gains(SMALL.with_seed(100))
    assert rows[0].total_power == mpca(inst).total_power
    again = run_sweep(SMALL, [400e3], [100], ["lfdma", "ifdma"])
    assert [(r.feasible, r.total_power) for r in again] == [(r.feasible, r.total_power) for r in rows]


def test_sweep_infeasible_demand():
    rows = run_sweep(SMALL, [1e12], [100, 101], ["ifdma", "lfdma"])
    assert len(rows) == 4 and not any(r.feasible for r in rows)
    assert all(r.total_power is None for r in rows)


def test_sweep_guard_becomes_row_note():
    rows = run_sweep(Scenario(M=17, N=40), [1e3], [0], ["lfdma"])
    assert not rows[0].feasible and rows[0].note.startswith("guard")


def test_sweep_rejects_bad_arguments():
    with pytest.raises(ParameterError):
        run_sweep(SMALL, [], [1])
    with pytest.raises(ParameterError):
        run_sweep(SMALL, [1e5], [1], ["ofdma"])


def test_worker_pool_matches_sequential():
    seq = run_sweep(SMALL, [300e3, 900e3], [1, 2, 3], workers=1)
    par = run_sweep(SMALL, [300e3, 900e3], [1, 2, 3], workers=2)
    strip = lambda rows: [(r.key(), r.feasible, r.total_power) for r in rows]
    assert strip(seq) == strip(par)


def _grid_scan(inst, scheme, res):
    feasible = feasibility_oracle(inst, scheme)
    k_max = int(np.floor(feasible.upper_bound / res))
    ok = [k for k in range(1, k_max + 1) if feasible(k * res)]
    return max(ok, default=0) * res


@pytest.mark.parametrize("scheme", ["ifdma", "lfdma"])
def test_bisection_agrees_with_grid_scan(scheme):
    for seed in range(3):
        inst = sample_gains(SMALL.with_seed(seed))
        assert max_supported_demand_on(inst, scheme, 100e3) == _grid_scan(inst, scheme, 100e3)


def test_max_demand_is_tight_for_the_solver():
    sc = SMALL.with_seed(7)
    d = max_supported_demand(sc, "ifdma", 50e3)
    inst = sample_gains(sc)
    assert d > 0
    assert mpca(inst.with_demands(d)).feasible
    assert not mpca(inst.with_demands(d + 50e3)).feasible


def test_enormous_gains_bounded_by_capacity():
    sc = Scenario(cell_radius=60.0, min_user_distance=10.0, M=2, N=6, shadowing_sigma=0.0, seed=3)
    inst = sample_gains(sc)
    for scheme in ("ifdma", "lfdma"):
        d = max_supported_demand_on(inst, scheme, 500e3)
        assert d == _grid_scan(inst, scheme, 500e3)
        assert d <= feasibility_oracle(inst, scheme).upper_bound


def test_lfdma_max_demand_dominates_single_channel_ifdma():
    res = 50e3
    for seed in range(3):
        inst = sample_gains(SMALL.with_seed(seed))
        lf = max_supported_demand_on(inst, "lfdma", res)
        k, c1 = 1, 0.0
        while mpca(inst.with_demands(k * res), c_values={1}).feasible:
            c1 = k * res
            k += 1
        assert lf >= c1


def test_csv_roundtrip():
    rows = [
        SweepRow(400e3, "ifdma", 3, True, 0.012345678901234567, 0.25),
        SweepRow(400e3, "lfdma", 3, False, None, 0.5, "guard: refused"),
    ]
    buf = io.StringIO()
    write_rows_csv(rows, buf, include_timing=True)
    buf.seek(0)
    assert read_rows_csv(buf) == rows
    buf = io.StringIO()
    write_rows_csv(rows, buf)
    assert "solve_time" not in buf.getvalue()
    buf.seek(0)
    assert [r.total_power for r in read_rows_csv(buf)] == [r.total_power for r in rows]


def test_summaries():
    rows = [
        SweepRow(1.0, "ifdma", 0, True, 2.0), SweepRow(1.0, "lfdma", 0, True, 1.0),
        SweepRow(1.0, "ifdma", 1, False, None), SweepRow(1.0, "lfdma", 1, True, 3.0),
    ]
    s = {(p["demand_bps"], p["scheme"]): p for p in summarize_sweep(rows)}
    assert s[1.0, "ifdma"]["feasible_fraction"] == 0.5
    assert s[1.0, "lfdma"]["mean_power_w"] == 2.0
    assert s[1.0, "lfdma"]["paired_mean_power_w"] == 1.0
    mrows = run_max_demand(SMALL, [1, 2], resolution=100e3)
    summ = summarize_max_demand(mrows)
    assert set(summ) >= {"ifdma", "lfdma", "ratio_of_means_lfdma_over_ifdma"}


def test_parse_demands():
    assert parse_demands("400000:200000:1000000") == [400e3, 600e3, 800e3, 1000e3]
    assert len(parse_demands("400000:200000:3000000")) == 14
    assert parse_demands("1e5,2e5") == [1e5, 2e5]
    with pytest.raises(ParameterError):
        parse_demands("1:0:5")
