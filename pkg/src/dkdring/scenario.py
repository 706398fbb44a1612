"""Scenario files: ring parameters, agent placement and the adversary.

Grammar, one item per line (``#`` starts a comment)::

    n=12 k=3 c=2 seed=1 max_rounds=5000
    adversary random p=0.5 seed=7
    agent 5 0 cw
    agent 9 0 ccw

Several ``key=value`` pairs may share a line.  Adversaries: ``none``,
``fixed <edge>``, ``random [p=..] [seed=..]``, ``blocker`` and
``scripted r:edge,r:edge,...`` where an edge is ``u``, ``(u,v)`` or ``none``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .adversary import Adversary, make_adversary
from .engine import RunResult, initial_state, parse_edge, round_cap, simulate
from .protocol import Params, StepFn, id_bit_length, step
from .ring import GlobalConfiguration

KEYS = ("n", "k", "c", "seed", "max_rounds")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class AgentSpec:
    id: int
    node: int
    cw: bool  # local CW equals global CW


@dataclass(frozen=True)
class AdversarySpec:
    name: str = "none"
    params: Tuple[Tuple[str, object], ...] = ()

    def build(self) -> Adversary:
        return make_adversary(self.name, **dict(self.params))

    def emit(self) -> str:
        p = dict(self.params)
        if self.name == "fixed":
            return f"fixed {p['edge']}"
        if self.name == "random":
            return f"random p={p.get('p', 0.5)} seed={p.get('seed', 0)}"
        if self.name == "scripted":
            items = sorted(dict(p.get("script", ())).items())
            body = ",".join(f"{r}:{'none' if e is None else e}" for r, e in items)
            return f"scripted {body}".rstrip()
        return self.name


@dataclass(frozen=True)
class Scenario:
    n: int
    k: int
    agents: Tuple[AgentSpec, ...]
    c: int = 2
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    max_rounds: Optional[int] = None
    seed: int = 0

    @property
    def l(self) -> int:
        return len(self.agents)

    @property
    def params(self) -> Params:
        return Params(self.n, self.k, id_bit_length(self.n, self.c))

    @property
    def cap(self) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        return round_cap(self.n, self.l, self.params.id_bits)

    def configuration(self) -> GlobalConfiguration:
        return GlobalConfiguration.from_mapping(self.n, {a.id: a.node for a in self.agents})

    def orientations(self) -> Dict[int, bool]:
        return {a.id: a.cw for a in self.agents}


def validate(sc: Scenario) -> List[Tuple[str, str]]:
    """Constraint violations as ``(anchor, message)``; the anchor names the offending item."""
    errs = []
    if sc.n < 3:
        errs.append(("n", f"ring size {sc.n} is below 3"))
    if sc.k < 1:
        errs.append(("k", "k must be at least 1"))
    if sc.c < 1:
        errs.append(("c", "c must be at least 1"))
    if sc.l < 3:
        errs.append(("n", f"need at least 3 agents, got {sc.l}"))
    if sc.k >= 1 and sc.l > sc.n // sc.k:
        errs.append(("k", f"l={sc.l} exceeds floor(n/k)={sc.n // sc.k}"))
    seen = set()
    for i, a in enumerate(sc.agents):
        anchor = f"agent#{i}"
        if a.id in seen:
            errs.append((anchor, f"duplicate agent id {a.id}"))
        seen.add(a.id)
        if not 1 <= a.id <= sc.n ** sc.c:
            errs.append((anchor, f"agent id {a.id} outside [1, {sc.n ** sc.c}]"))
        if not 0 <= a.node < sc.n:
            errs.append((anchor, f"agent {a.id} on node {a.node} outside [0, {sc.n - 1}]"))
    return errs


def _parse_adversary(tokens: List[str], lineno: int) -> AdversarySpec:
    if not tokens:
        raise ScenarioError(f"line {lineno}: adversary needs a name")
    name, rest = tokens[0].lower(), tokens[1:]
    try:
        if name in ("none", "blocker"):
            if rest:
                raise ValueError(f"{name} takes no parameters")
            return AdversarySpec(name)
        if name == "fixed":
            if len(rest) != 1:
                raise ValueError("fixed needs exactly one edge")
            return AdversarySpec(name, (("edge", parse_edge(rest[0])),))
        if name == "random":
            kv = dict(t.split("=", 1) for t in rest)
            unknown = set(kv) - {"p", "seed"}
            if unknown:
                raise ValueError(f"unknown random parameter(s) {sorted(unknown)}")
            p = float(kv.get("p", 0.5))
            if not 0.0 <= p <= 1.0:
                raise ValueError("p must lie in [0, 1]")
            return AdversarySpec(name, (("p", p), ("seed", int(kv.get("seed", 0)))))
        if name == "scripted":
            script = {}
            for item in _split_script(" ".join(rest)):
                if not item:
                    continue
                r, e = item.split(":", 1)
                script[int(r)] = parse_edge(e)
            return AdversarySpec(name, (("script", tuple(sorted(script.items()))),))
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"line {lineno}: bad adversary: {exc}") from None
    raise ScenarioError(f"line {lineno}: unknown adversary {name!r}")


def _split_script(text: str) -> List[str]:
    # commas separate entries, except those inside "(u,v)"
    out, depth, cur = [], 0, ""
    for ch in text.replace(" ", ""):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return out


def parse_scenario(text: str) -> Scenario:
    values: Dict[str, int] = {}
    agents: List[AgentSpec] = []
    adversary = AdversarySpec()
    lines_of: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0].lower()
        if head == "agent":
            if len(toks) != 4 or toks[3].lower() not in ("cw", "ccw"):
                raise ScenarioError(f"line {lineno}: expected 'agent <id> <node> <cw|ccw>'")
            try:
                agents.append(AgentSpec(int(toks[1]), int(toks[2]), toks[3].lower() == "cw"))
            except ValueError:
                raise ScenarioError(f"line {lineno}: agent id and node must be integers") from None
            lines_of[f"agent#{len(agents) - 1}"] = lineno
            continue
        if head == "adversary":
            adversary = _parse_adversary(toks[1:], lineno)
            continue
        for tok in toks:
            if "=" not in tok:
                raise ScenarioError(f"line {lineno}: cannot parse {tok!r}")
            key, val = tok.split("=", 1)
            if key not in KEYS:
                raise ScenarioError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = int(val)
            except ValueError:
                raise ScenarioError(f"line {lineno}: {key} must be an integer") from None
            lines_of[key] = lineno
    for key in ("n", "k"):
        if key not in values:
            raise ScenarioError(f"missing required key {key!r}")
    sc = Scenario(values["n"], values["k"], tuple(agents), values.get("c", 2), adversary,
                  values.get("max_rounds"), values.get("seed", 0))
    errs = validate(sc)
    if errs:
        raise ScenarioError("; ".join(f"line {lines_of.get(anchor, lines_of.get('n', 1))}: {msg}"
                                      for anchor, msg in errs))
    return sc


def emit_scenario(sc: Scenario) -> str:
    head = f"n={sc.n} k={sc.k} c={sc.c} seed={sc.seed}"
    if sc.max_rounds is not None:
        head += f" max_rounds={sc.max_rounds}"
    lines = [head, "adversary " + sc.adversary.emit()]
    for a in sc.agents:
        lines.append(f"agent {a.id} {a.node} {'cw' if a.cw else 'ccw'}")
    return "\n".join(lines) + "\n"


def random_placement(n: int, l: int, rng: random.Random, c: int = 2) -> Tuple[AgentSpec, ...]:
    """Uniform nodes (collisions allowed), uniform orientations, distinct ids."""
    ids = rng.sample(range(1, n ** c + 1), l)
    return tuple(AgentSpec(i, rng.randrange(n), rng.random() < 0.5) for i in ids)


def run_scenario(sc: Scenario, step_fn: StepFn = step, max_rounds: Optional[int] = None,
                 stop_on_violation: bool = True) -> RunResult:
    state = initial_state(sc.configuration(), sc.orientations())
    header = {"type": "header", "scenario": emit_scenario(sc), "n": sc.n, "k": sc.k,
              "l": sc.l, "id_bits": sc.params.id_bits,
              "orientations": {str(a.id): a.cw for a in sc.agents},
              "initial": {str(a.id): a.node for a in sc.agents}}
    cap = max_rounds if max_rounds is not None else sc.cap
    return simulate(state, sc.params, sc.adversary.build(), cap, step_fn, header,
                    stop_on_violation)
