"""Re-validate a recorded trace.

Two independent checks: the monitors are re-run on the recorded states, and
the scenario is re-simulated with the recorded edge choices so every record
can be compared byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence

from .engine import initial_state, monitor_invariants, parse_edge, state_from_record, Violation
from .ring import GlobalConfiguration
from .scenario import AdversarySpec, parse_scenario, run_scenario


class TraceError(ValueError):
    pass


@dataclass
class ReplayReport:
    rounds: int
    violations: List[Violation] = field(default_factory=list)
    mismatches: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.mismatches


def replay_trace(lines: Sequence[str]) -> ReplayReport:
    lines = [ln for ln in (l.strip() for l in lines) if ln]
    if not lines:
        raise TraceError("empty trace")
    header = json.loads(lines[0])
    if header.get("type") != "header":
        raise TraceError("first record is not a header")
    n, k = header["n"], header["k"]
    orient = {int(a): v for a, v in header["orientations"].items()}
    start = {int(a): v for a, v in header["initial"].items()}
    records = [json.loads(ln) for ln in lines[1:]]
    rounds = [r for r in records if r.get("type") == "round"]

    prev = initial_state(GlobalConfiguration.from_mapping(n, start), orient)
    found: List[Violation] = []
    script = {}
    for rec in rounds:
        edge = parse_edge(rec["missing_edge"])
        script[rec["round"] - 1] = edge
        nxt = state_from_record(rec, n, orient)
        events = [e for e in rec["events"] if e.get("type") != "violation"]
        found.extend(monitor_invariants(prev, nxt, k, edge, events))
        prev = nxt

    sc = parse_scenario(header["scenario"])
    adv = AdversarySpec("scripted", (("script", tuple(sorted(script.items()))),))
    sc = type(sc)(sc.n, sc.k, sc.agents, sc.c, adv, sc.max_rounds, sc.seed)
    again = run_scenario(sc, max_rounds=len(rounds), stop_on_violation=False).trace
    mismatches = []
    for i, ln in enumerate(lines[1:1 + len(rounds)], 1):
        if i >= len(again) or again[i] != ln:
            mismatches.append(i)
    return ReplayReport(len(rounds), found, mismatches)
