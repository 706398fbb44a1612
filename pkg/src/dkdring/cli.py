"""Command line: run, sweep, check, replay."""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from .check import all_placements, exhaustive_search, representative_placements
from .replay import TraceError, replay_trace
from .scenario import ScenarioError, parse_scenario, run_scenario
from .sweep import SweepError, parse_sweep, run_batch, write_report


def cmd_run(args) -> int:
    with open(args.scenario, encoding="utf-8") as fh:
        sc = parse_scenario(fh.read())
    res = run_scenario(sc, max_rounds=args.max_rounds)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("\n".join(res.trace) + "\n")
    print(f"outcome\t{res.outcome.kind}")
    print(f"rounds\t{res.outcome.rounds}")
    print(f"rounds_to_chirality\t{res.rounds_to_chirality}")
    print(f"rounds_to_dispersion\t{res.rounds_to_dispersion}")
    print(f"rounds_to_kdd\t{res.rounds_to_kdd}")
    print(f"blocked_moves\t{res.blocked_moves}")
    print(f"violations\t{len(res.violations)}")
    for v in res.violations:
        print(f"  round {v.round}: {v.kind}: {v.detail}")
    print("final\t" + " ".join(f"{a}@{v}" for a, v in res.final.cfg.positions))
    return 0 if res.outcome.ok and not res.violations else 1


def cmd_sweep(args) -> int:
    with open(args.sweep, encoding="utf-8") as fh:
        spec = parse_sweep(fh.read())
    t0 = time.perf_counter()
    report = run_batch(spec, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    if args.report:
        table_path, summary_path = write_report(report, args.report)
        print(f"report written to {table_path} and {summary_path}", file=sys.stderr)
    else:
        sys.stdout.write(report.table())
    summary = report.summary()
    summary["seconds"] = round(elapsed, 2)
    print(json.dumps(summary, sort_keys=True))
    return 0 if report.ok else 1


def cmd_check(args) -> int:
    if args.all_placements:
        placements = all_placements(args.n, args.l)
    else:
        placements = representative_placements(args.n, args.l, args.placements, args.seed)
    t0 = time.perf_counter()
    verdict = exhaustive_search(args.n, args.l, args.k, args.depth, placements,
                                max_states=args.max_states)
    print(verdict.describe() + f" seconds={time.perf_counter() - t0:.1f}")
    if verdict.trace and args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("\n".join(verdict.trace) + "\n")
        print(f"counterexample trace written to {args.trace}")
    return 0 if verdict.ok else 1


def cmd_replay(args) -> int:
    with open(args.trace, encoding="utf-8") as fh:
        report = replay_trace(fh.read().splitlines())
    print(f"rounds\t{report.rounds}")
    print(f"violations\t{len(report.violations)}")
    for v in report.violations:
        print(f"  round {v.round}: {v.kind}: {v.detail}")
    print(f"mismatched_records\t{len(report.mismatches)}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dkdring",
                                description="Ring dispersion simulator and verifier.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario file")
    r.add_argument("scenario")
    r.add_argument("--trace", help="write JSON-lines trace here")
    r.add_argument("--max-rounds", type=int, default=None)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter sweep")
    s.add_argument("sweep")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--report", help="delimited table path; a .summary.json is written beside it")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="exhaustive search over adversary choices")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--l", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--depth", type=int, required=True)
    c.add_argument("--all-placements", action="store_true")
    c.add_argument("--placements", type=int, default=12,
                   help="number of representative placements without --all-placements")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-states", type=int, default=2_000_000)
    c.add_argument("--trace", help="write a counterexample trace here if one is found")
    c.set_defaults(func=cmd_check)

    rp = sub.add_parser("replay", help="re-validate a recorded trace")
    rp.add_argument("trace")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, SweepError, TraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
