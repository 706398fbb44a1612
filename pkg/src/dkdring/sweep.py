"""Batch sweeps over (n, l, k, placement, adversary) with scaling statistics.

Sweep file grammar (``#`` comments, one key per line)::

    n = 9..24
    l = 3,4,5
    k = 1,2,3
    placements = 5
    adversaries = none random:0.5:3 blocker
    seed = 2024

``random:p:m`` expands to ``m`` random adversaries with removal probability
``p`` and distinct derived seeds; ``fixed:e`` is also accepted.
"""

from __future__ import annotations

import csv
import io
import json
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import RunResult
from .scenario import AdversarySpec, Scenario, random_placement, run_scenario

ROW_FIELDS = ("n", "l", "k", "placement", "adversary", "seed", "outcome", "rounds",
              "rounds_to_chirality", "rounds_to_dispersion", "rounds_to_kdd",
              "blocked_moves", "violations", "agreement_ok", "cap")


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    ns: Tuple[int, ...]
    ls: Tuple[int, ...]
    ks: Tuple[int, ...]
    placements: int = 5
    adversaries: Tuple[str, ...] = ("none",)
    seed: int = 0
    c: int = 2


@dataclass
class Row:
    n: int
    l: int
    k: int
    placement: int
    adversary: str
    seed: int
    outcome: str
    rounds: int
    rounds_to_chirality: Optional[int]
    rounds_to_dispersion: Optional[int]
    rounds_to_kdd: Optional[int]
    blocked_moves: int
    violations: int
    agreement_ok: Optional[bool]
    cap: int


@dataclass
class Fit:
    count: int
    slope: Optional[float]
    intercept: Optional[float]
    max_ratio: Optional[float]


@dataclass
class SweepReport:
    rows: List[Row] = field(default_factory=list)
    fit: Fit = field(default_factory=lambda: Fit(0, None, None, None))

    @property
    def ok(self) -> bool:
        return all(r.outcome == "Terminated" and r.violations == 0 for r in self.rows)

    def table(self, delimiter: str = "\t") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in self.rows:
            d = asdict(r)
            w.writerow(["" if d[f] is None else d[f] for f in ROW_FIELDS])
        return buf.getvalue()

    def summary(self) -> dict:
        by_outcome: Dict[str, int] = {}
        for r in self.rows:
            by_outcome[r.outcome] = by_outcome.get(r.outcome, 0) + 1

        def worst(attr):
            vals = [getattr(r, attr) for r in self.rows if getattr(r, attr) is not None]
            return max(vals) if vals else None

        return {
            "runs": len(self.rows),
            "outcomes": by_outcome,
            "violations": sum(r.violations for r in self.rows),
            "ok": self.ok,
            "max_rounds_to_chirality": worst("rounds_to_chirality"),
            "max_rounds_to_dispersion": worst("rounds_to_dispersion"),
            "max_rounds_to_kdd": worst("rounds_to_kdd"),
            "max_dispersion_over_l": _max_ratio(self.rows, "rounds_to_dispersion", lambda r: r.l),
            "max_kdd_over_lk": _max_ratio(self.rows, "rounds_to_kdd", lambda r: r.l * r.k),
            "chirality_fit": asdict(self.fit),
        }


def _max_ratio(rows, attr, denom) -> Optional[float]:
    vals = [getattr(r, attr) / denom(r) for r in rows if getattr(r, attr) is not None]
    return max(vals) if vals else None


def _int_list(text: str) -> Tuple[int, ...]:
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def parse_sweep(text: str) -> SweepSpec:
    vals: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SweepError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in ("n", "l", "k", "placements", "adversaries", "seed", "c"):
            raise SweepError(f"line {lineno}: unknown key {key!r}")
        vals[key] = val
    try:
        advs = tuple(vals.get("adversaries", "none").split())
        for a in advs:
            expand_adversary(a, 0)
        return SweepSpec(_int_list(vals.get("n", "")), _int_list(vals.get("l", "")),
                         _int_list(vals.get("k", "")), int(vals.get("placements", 5)),
                         advs, int(vals.get("seed", 0)), int(vals.get("c", 2)))
    except ValueError as exc:
        raise SweepError(str(exc)) from None


def expand_adversary(token: str, seed: int) -> List[Tuple[str, AdversarySpec]]:
    """One sweep token to labelled adversary specs."""
    parts = token.lower().split(":")
    name = parts[0]
    if name in ("none", "blocker"):
        return [(name, AdversarySpec(name))]
    if name == "fixed":
        return [(token, AdversarySpec("fixed", (("edge", int(parts[1])),)))]
    if name == "random":
        p = float(parts[1]) if len(parts) > 1 else 0.5
        m = int(parts[2]) if len(parts) > 2 else 1
        out = []
        for j in range(m):
            s = random.Random(f"adv:{seed}:{j}").randrange(2 ** 31)
            out.append((f"random:{p}:{j}", AdversarySpec("random", (("p", p), ("seed", s)))))
        return out
    raise ValueError(f"unknown adversary {token!r}")


def scenarios(spec: SweepSpec) -> List[Tuple[dict, Scenario]]:
    out = []
    for n in spec.ns:
        for l in spec.ls:
            for k in spec.ks:
                if not 3 <= l <= n // k:
                    continue
                for p in range(spec.placements):
                    rng = random.Random(f"place:{spec.seed}:{n}:{l}:{k}:{p}")
                    agents = random_placement(n, l, rng, spec.c)
                    cell_seed = rng.randrange(2 ** 31)
                    for token in spec.adversaries:
                        for label, adv in expand_adversary(token, cell_seed):
                            sc = Scenario(n, k, agents, spec.c, adv, None, cell_seed)
                            meta = {"n": n, "l": l, "k": k, "placement": p,
                                    "adversary": label, "seed": cell_seed}
                            out.append((meta, sc))
    return out


def run_cell(item: Tuple[dict, Scenario]) -> Row:
    meta, sc = item
    return row_from(meta, sc, run_scenario(sc))


def row_from(meta: dict, sc: Scenario, res: RunResult) -> Row:
    return Row(outcome=res.outcome.kind, rounds=res.outcome.rounds,
               rounds_to_chirality=res.rounds_to_chirality,
               rounds_to_dispersion=res.rounds_to_dispersion,
               rounds_to_kdd=res.rounds_to_kdd, blocked_moves=res.blocked_moves,
               violations=len(res.violations), agreement_ok=res.agreement_ok,
               cap=sc.cap, **meta)


def chirality_fit(rows: Sequence[Row], adversary: Optional[str] = "blocker") -> Fit:
    """Least-squares line of rounds_to_chirality against l*n."""
    pts = [(r.l * r.n, r.rounds_to_chirality) for r in rows
           if r.rounds_to_chirality is not None and (adversary is None or r.adversary == adversary)]
    if not pts:
        return Fit(0, None, None, None)
    xs, ys = zip(*pts)
    ratio = max(y / x for x, y in pts)
    if len(set(xs)) < 2:
        return Fit(len(pts), None, None, ratio)
    slope, intercept = statistics.linear_regression(xs, ys)
    return Fit(len(pts), slope, intercept, ratio)


def run_batch(spec: SweepSpec, jobs: int = 1) -> SweepReport:
    items = scenarios(spec)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, items, chunksize=8))
    else:
        rows = [run_cell(it) for it in items]
    return SweepReport(rows, chirality_fit(rows))


def write_report(report: SweepReport, path: str) -> Tuple[str, str]:
    """Write the delimited table to ``path`` and the summary next to it as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.table())
    summary_path = path.rsplit(".", 1)[0] + ".summary.json" if "." in path else path + ".summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(report.summary(), fh, indent=2, sort_keys=True)
    return path, summary_path
