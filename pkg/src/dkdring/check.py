"""Exhaustive search over every adversary choice sequence for small rings.

From each initial placement the search explores all ``n + 1`` edge choices
per round (each edge or none), memoizing exact states (positions plus all
agent memories).  It computes the longest number of rounds the adversary
can delay termination; a reachable cycle means it can delay forever.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .adversary import Scripted
from .chains import is_k_dispersed
from .engine import (SimulationState, Violation, apply_round, initial_state,
                     monitor_invariants)
from .protocol import DONE, Params, StepFn, id_bit_length, step
from .ring import GlobalConfiguration
from .scenario import AdversarySpec, AgentSpec, Scenario, run_scenario

INF = float("inf")
_END = object()  # marks a path that ends at the offending state itself


@dataclass
class Verdict:
    kind: str  # AllTerminate | DepthExhausted | Violation | BudgetExceeded
    max_depth: int = 0
    states: int = 0
    placements: int = 0
    frontier: int = 0
    violation: Optional[Violation] = None
    counterexample: Optional[Scenario] = None
    trace: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.kind == "AllTerminate"

    def describe(self) -> str:
        head = (f"{self.kind}: placements={self.placements} states={self.states} "
                f"max_depth={self.max_depth}")
        if self.kind == "DepthExhausted":
            head += f" frontier={self.frontier}"
        if self.violation is not None:
            head += f" violation={self.violation.kind} ({self.violation.detail})"
        return head


def all_placements(n: int, l: int) -> List[Tuple[AgentSpec, ...]]:
    """Every placement and orientation with ids 1..l, agent 1 pinned to node 0."""
    out = []
    for nodes in itertools.product(range(n), repeat=l - 1):
        for orient in itertools.product((True, False), repeat=l):
            spots = (0,) + nodes
            out.append(tuple(AgentSpec(i + 1, spots[i], orient[i]) for i in range(l)))
    return out


def representative_placements(n: int, l: int, count: int = 12, seed: int = 0) -> List[Tuple[AgentSpec, ...]]:
    """A few structured placements plus seeded random ones."""
    ids = list(range(1, l + 1))
    out = [
        tuple(AgentSpec(i, 0, i % 2 == 1) for i in ids),            # all on one node, mixed
        tuple(AgentSpec(i, 0, True) for i in ids),                  # all on one node, aligned
        tuple(AgentSpec(i, (i - 1) * (n // l), i % 2 == 0) for i in ids),  # spread out
        tuple(AgentSpec(i, i - 1, i != 2) for i in ids),            # one chain
        tuple(AgentSpec(i, 0 if i < l else n // 2, i == 1) for i in ids),
    ]
    rng = random.Random(f"check:{seed}:{n}:{l}")
    while len(out) < count:
        out.append(tuple(AgentSpec(i, rng.randrange(n), rng.random() < 0.5) for i in ids))
    return out


def _scenario(n: int, k: int, agents, script: Dict[int, Optional[int]]) -> Scenario:
    adv = AdversarySpec("scripted", (("script", tuple(sorted(script.items()))),))
    return Scenario(n, k, tuple(agents), 2, adv)


def exhaustive_search(n: int, l: int, k: int, depth_cap: int,
                      placements: Optional[Sequence[Tuple[AgentSpec, ...]]] = None,
                      max_states: int = 2_000_000, step_fn: StepFn = step) -> Verdict:
    if placements is None:
        placements = all_placements(n, l)
    params = Params(n, k, id_bit_length(n))
    memo: Dict[tuple, float] = {}
    worst = 0
    frontier = 0
    for agents in placements:
        cfg = GlobalConfiguration.from_mapping(n, {a.id: a.node for a in agents})
        root = initial_state(cfg, {a.id: a.cw for a in agents})
        res = _search(root, params, memo, max_states, step_fn)
        if isinstance(res, tuple):
            kind, violation, path = res
            script = {r: e for r, e in enumerate(path)}
            sc = _scenario(n, k, agents, script)
            trace = []
            if kind == "Violation":
                trace = run_scenario(sc, step_fn=step_fn, max_rounds=len(path)).trace
            return Verdict(kind, worst, len(memo), len(placements), frontier,
                           violation, sc, trace)
        if res > depth_cap:
            frontier += 1
        if res != INF:
            worst = max(worst, int(res))
    kind = "AllTerminate" if frontier == 0 else "DepthExhausted"
    return Verdict(kind, worst, len(memo), len(placements), frontier)


def _children(state: SimulationState, params: Params, step_fn: StepFn):
    seen = {}
    for e in [None] + list(range(params.n)):
        nxt, events = apply_round(state, e, params, step_fn)
        found = monitor_invariants(state, nxt, params.k, e, events)
        if found:
            return None, (e, found[0])
        nxt.round = 0  # memo key ignores the absolute round
        key = nxt.key()
        if key not in seen:
            seen[key] = (e, nxt)
    return list(seen.items()), None


def _search(root: SimulationState, params: Params, memo: Dict[tuple, float],
            max_states: int, step_fn: StepFn):
    """Longest rounds-to-termination from ``root``; INF if a cycle is reachable.

    Returns a ``(kind, violation, edge_path)`` tuple when the search has to stop.
    """
    root_key = root.key()
    if root_key in memo:
        return memo[root_key]
    on_path = set()
    # frame: [key, state, children, next_index, best, edge_taken]
    stack: List[list] = []

    def push(key, state, edge):
        if all(m.phase == DONE for m in state.memories.values()):
            if not is_k_dispersed(state.cfg, params.k):
                return ("Violation", Violation("bad-terminal", "terminated but not k-dispersed", 0), _END)
            memo[key] = 0
            return 0
        kids, bad = _children(state, params, step_fn)
        if bad is not None:
            return ("Violation", bad[1], bad[0])
        stack.append([key, state, kids, 0, 0, edge])
        on_path.add(key)
        return None

    def path_edges(extra=()):
        return [fr[5] for fr in stack[1:]] + list(extra)

    r = push(root_key, root, None)
    if isinstance(r, tuple):
        return (r[0], r[1], [] if r[2] is _END else [r[2]])
    if r is not None:
        return r
    while stack:
        fr = stack[-1]
        key, state, kids, i, best, _ = fr
        if i == len(kids):
            stack.pop()
            on_path.discard(key)
            memo[key] = best
            if stack:
                stack[-1][4] = max(stack[-1][4], best + 1)
            continue
        fr[3] += 1
        ckey, (edge, child) = kids[i]
        if ckey in on_path:
            fr[4] = INF
            continue
        if ckey in memo:
            fr[4] = max(fr[4], memo[ckey] + 1)
            continue
        if len(memo) >= max_states:
            return ("BudgetExceeded", None, path_edges([edge]))
        r = push(ckey, child, edge)
        if isinstance(r, tuple):
            tail = [edge] if r[2] is _END else [edge, r[2]]
            return (r[0], r[1], path_edges(tail))
        if r is not None:
            fr[4] = max(fr[4], r + 1)
    return memo[root_key]
