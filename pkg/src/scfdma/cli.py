"""Command-line entry point: ``scfdma <subcommand> ...``.

Exit codes: 0 success, 2 bad configuration or input, 3 solver guard refusal.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .blocks import iter_blocks
from .experiments import (
    DEFAULT_RESOLUTION, parse_demands, run_max_demand, run_sweep, solve, summarize_max_demand,
    summarize_sweep, write_max_demand_csv, write_rows_csv,
)
from .gainsim import Scenario, sample_gains
from .model import GuardError, Instance, ParameterError, check_instance

log = logging.getLogger("scfdma")

EXIT_CONFIG = 2
EXIT_GUARD = 3


def _schemes(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def cmd_enumerate_blocks(args) -> int:
    out = sys.stdout
    out.write("c,s,q,L\n")
    k = 0
    for b in iter_blocks(args.users, args.channels):
        out.write(f"{b.c},{b.s},{b.q},{b.length(args.users)}\n")
        k += 1
    out.write(f"K={k}\n")
    return 0


def _print_report(rep) -> None:
    print(f"scheme: {rep.scheme}")
    if not rep.feasible:
        print("feasible: no")
        return
    res = rep.result
    print("feasible: yes")
    if rep.scheme == "ifdma":
        b = res.allocation.block
        print(f"block: c={b.c} s={b.s} q={b.q}")
        print("permutation: " + " ".join(str(x) for x in res.allocation.perm))
    else:
        print("intervals: " + " ".join(f"[{a},{a + n - 1}]" for a, n in res.intervals))
    print("per-user channel power (mW): " + " ".join(f"{p * 1e3:.6g}" for p in res.per_user_channel_power))
    print(f"total power (mW): {res.total_power * 1e3:.9g}")


def cmd_solve(args) -> int:
    inst = Instance.from_json(args.instance)
    check_instance(inst)
    rep = solve(inst, args.scheme)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=1))
    else:
        _print_report(rep)
    return 0


def cmd_gen_scenario(args) -> int:
    sc = Scenario.from_json(args.config)
    if args.seed is not None:
        sc = sc.with_seed(args.seed)
    sample_gains(sc).to_json(args.out)
    return 0


def _seed_list(sc: Scenario, n: int) -> list[int]:
    if n < 1:
        raise ParameterError("--seeds must be >= 1")
    return [sc.seed + k for k in range(n)]


def cmd_sweep_demand(args) -> int:
    sc = Scenario.from_json(args.config)
    rows = run_sweep(sc, parse_demands(args.demands), _seed_list(sc, args.seeds), _schemes(args.schemes),
                     workers=args.workers)
    write_rows_csv(rows, args.out, include_timing=args.timing)
    summary = {"scenario": sc.to_dict(), "seeds": args.seeds, "points": summarize_sweep(rows)}
    Path(args.summary or Path(args.out).with_suffix(".summary.json")).write_text(
        json.dumps(summary, indent=1) + "\n")
    return 0


def cmd_max_demand(args) -> int:
    sc = Scenario.from_json(args.config)
    rows = run_max_demand(sc, _seed_list(sc, args.seeds), _schemes(args.schemes), args.resolution,
                          workers=args.workers)
    write_max_demand_csv(rows, args.out)
    summary = {"scenario": sc.to_dict(), "seeds": args.seeds, "resolution_bps": args.resolution,
               "summary": summarize_max_demand(rows)}
    Path(args.summary or Path(args.out).with_suffix(".summary.json")).write_text(
        json.dumps(summary, indent=1) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scfdma", description="SC-FDMA minimum-power channel allocation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate-blocks", help="list every interleaved channel block as CSV")
    e.add_argument("--users", type=int, required=True)
    e.add_argument("--channels", type=int, required=True)
    e.set_defaults(func=cmd_enumerate_blocks)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("--instance", required=True)
    s.add_argument("--scheme", choices=["ifdma", "lfdma"], default="ifdma")
    s.add_argument("--json", action="store_true", help="machine-readable output")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen-scenario", help="sample one instance from a scenario config")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_gen_scenario)

    w = sub.add_parser("sweep-demand", help="total power vs uniform demand")
    w.add_argument("--config", required=True)
    w.add_argument("--demands", default="400000:200000:3000000")
    w.add_argument("--seeds", type=int, default=50)
    w.add_argument("--schemes", default="ifdma,lfdma")
    w.add_argument("--out", required=True)
    w.add_argument("--summary", help="JSON summary path (default: <out>.summary.json)")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--timing", action="store_true", help="add a solve_time_s column")
    w.set_defaults(func=cmd_sweep_demand)

    m = sub.add_parser("max-demand", help="maximal supported uniform demand per seed")
    m.add_argument("--config", required=True)
    m.add_argument("--seeds", type=int, default=50)
    m.add_argument("--schemes", default="ifdma,lfdma")
    m.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)
    m.add_argument("--out", required=True)
    m.add_argument("--summary")
    m.add_argument("--workers", type=int, default=1)
    m.set_defaults(func=cmd_max_demand)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GuardError as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (ParameterError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
