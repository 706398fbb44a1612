"""Synchronous round loop, invariant monitors and trace records.

A round is: the adversary picks at most one edge, every agent looks at the
same snapshot, all moves are applied at once.  Crossing an edge in opposite
directions is allowed; a move over the missing edge turns into a stay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .chains import (ASYMMETRIC, cyclic_gaps, global_direction, is_dispersed, is_k_dispersed,
                     classify_symmetry, metrics)
from .protocol import (CHIRALITY, DISPERSION, DONE, KDISPERSION, PHASE_ORDER, PRE_ROUNDABOUT,
                       ROUNDABOUT, Action, AgentMemory, Params, StepFn, step)
from .ring import MULTI, GlobalConfiguration, ReadableMemory, RingView, engine_view, localize


@dataclass
class SimulationState:
    round: int
    cfg: GlobalConfiguration
    memories: Dict[int, AgentMemory]
    orientations: Dict[int, bool]  # True: the agent's local CW is the global CW

    def key(self) -> tuple:
        return (self.cfg.positions, tuple(self.memories[a] for a in sorted(self.memories)))


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    round: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "detail": self.detail, "round": self.round}


@dataclass
class Outcome:
    kind: str  # Terminated | RoundCapExceeded | InvariantViolation
    rounds: int
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.kind == "Terminated"


@dataclass
class RunResult:
    outcome: Outcome
    final: SimulationState
    trace: List[str]
    violations: List[Violation]
    blocked_moves: int = 0
    rounds_to_chirality: Optional[int] = None
    rounds_to_dispersion: Optional[int] = None
    rounds_to_kdd: Optional[int] = None
    agreement_ok: Optional[bool] = None  # orientation/chiral agreement at first all-set round


def fmt_edge(n: int, e: Optional[int]) -> Optional[str]:
    return None if e is None else f"({e},{(e + 1) % n})"


def parse_edge(text) -> Optional[int]:
    """Accept ``None``, ``"none"``, ``3`` or ``"(3,4)"`` and return the CW-lower endpoint."""
    if text is None:
        return None
    if isinstance(text, int):
        return text
    t = text.strip().lower()
    if t in ("none", "-", ""):
        return None
    if t.startswith("("):
        u, v = (int(x) for x in t.strip("()").split(","))
        if v == u + 1 or v == 0:
            return u
        if u == v + 1 or u == 0:
            return v
        raise ValueError(f"edge {text} does not join adjacent nodes")
    return int(t)


def initial_state(cfg: GlobalConfiguration, orientations: Mapping[int, bool]) -> SimulationState:
    mems = {a: AgentMemory(a) for a in cfg.agent_ids}
    return SimulationState(0, cfg.with_edge(None), mems, dict(orientations))


def readable(mem: AgentMemory) -> ReadableMemory:
    return ReadableMemory(mem.id, mem.state, mem.round, mem.osc_wait, mem.ret, mem.move_flag)


def build_views(state: SimulationState, edge: Optional[int]) -> Dict[int, RingView]:
    cfg = state.cfg.with_edge(edge)
    occ = cfg.occupancy()
    views = {}
    for a, v in cfg.positions:
        others = tuple(readable(state.memories[b]) for b in sorted(occ[v]) if b != a)
        views[a] = localize(cfg, a, state.orientations[a], others)
    return views


def compute_actions(state: SimulationState, edge: Optional[int], params: Params,
                    step_fn: StepFn = step) -> Dict[int, Action]:
    views = build_views(state, edge)
    return {a: step_fn(state.memories[a], views[a], params) for a in views}


def global_moves(state: SimulationState, actions: Mapping[int, Action]) -> Dict[int, int]:
    out = {}
    for a, act in actions.items():
        m = int(act.move)
        out[a] = m if state.orientations[a] else -m
    return out


def crosses(n: int, node: int, d: int, edge: Optional[int]) -> bool:
    if edge is None or d == 0:
        return False
    return (node if d == 1 else (node - 1) % n) == edge


def apply_round(state: SimulationState, edge: Optional[int], params: Params,
                step_fn: StepFn = step) -> Tuple[SimulationState, List[dict]]:
    """Advance one round; returns the next state and the round's events."""
    n = state.cfg.n
    actions = compute_actions(state, edge, params, step_fn)
    moves = global_moves(state, actions)
    where = state.cfg.where()
    events = []
    for a in sorted(moves):
        d = moves[a]
        if d == 0:
            continue
        if state.memories[a].phase == DONE:
            events.append({"type": "done-moved", "agent": a})
            continue
        if crosses(n, where[a], d, edge):
            events.append({"type": "blocked-move", "agent": a, "edge": fmt_edge(n, edge)})
            continue
        where[a] = (where[a] + d) % n
    mems = {a: actions[a].memory for a in actions}
    for a in sorted(mems):
        old, new = state.memories[a].phase, mems[a].phase
        if old != new:
            events.append({"type": "phase-change", "agent": a, "from": old, "to": new})
    nxt = SimulationState(state.round + 1, state.cfg.moved(where), mems, state.orientations)
    return nxt, events


# --- monitors -----------------------------------------------------------------

def agreed_cw(state: SimulationState) -> Optional[int]:
    """Global direction the agents agreed on (+1/-1), if any agent has chiral set."""
    for a in sorted(state.memories):
        ch = state.memories[a].chiral
        if ch is not None:
            return 1 if ch == state.orientations[a] else -1
    return None


def _round_kind(prev: SimulationState) -> str:
    phases = {m.phase for m in prev.memories.values()}
    if phases & {CHIRALITY, DONE}:
        return "other"
    if any(c == MULTI for c in prev.cfg.classes()):
        return "dispersion"
    return "kdispersion"


def expected_phases(prev: SimulationState, edge: Optional[int], k: int) -> Dict[int, Tuple[str, ...]]:
    """Phases each agent may hold after the round, from global facts only."""
    cfg = prev.cfg.with_edge(edge)
    out = {}
    kdd = is_k_dispersed(cfg, k)
    multi = not is_dispersed(cfg)
    asym = classify_symmetry(cfg).kind == ASYMMETRIC
    glob = global_direction(engine_view(cfg)) is not None
    for a, m in prev.memories.items():
        if m.phase == DONE or kdd:
            out[a] = (DONE,)
        elif m.phase == CHIRALITY:
            if asym or glob:
                out[a] = (DISPERSION,)
            elif m.state in (ROUNDABOUT, PRE_ROUNDABOUT):
                out[a] = (CHIRALITY, DISPERSION)
            else:
                out[a] = (CHIRALITY,)
        else:
            out[a] = (DISPERSION,) if multi else (KDISPERSION,)
    return out


def _ordered_gaps(state: SimulationState, d: int) -> Dict[int, Tuple[int, int]]:
    """agent -> (successor in direction d, distance along d)."""
    n = state.cfg.n
    where = state.cfg.where()
    order = sorted(where, key=lambda a: (where[a] * d) % n)
    out = {}
    for i, a in enumerate(order):
        b = order[(i + 1) % len(order)]
        out[a] = (b, ((where[b] - where[a]) * d) % n or n)
    return out


def monitor_invariants(prev: SimulationState, nxt: SimulationState, k: int,
                       edge: Optional[int] = None, events: Sequence[dict] = ()) -> List[Violation]:
    r = nxt.round
    out: List[Violation] = []
    n = prev.cfg.n
    if sorted(prev.memories) != sorted(nxt.memories) or prev.cfg.l != nxt.cfg.l:
        out.append(Violation("conservation", "agent set changed", r))
    for a, v in nxt.cfg.positions:
        if not 0 <= v < n:
            out.append(Violation("node-range", f"agent {a} at {v}", r))
    for ev in events:
        if ev.get("type") == "done-moved":
            out.append(Violation("done-moved", f"terminated agent {ev['agent']} asked to move", r))
    live = [m for m in nxt.memories.values() if m.phase != DONE]
    if len({(m.state, m.round) for m in live}) > 1:
        labels = sorted({f"{m.state}/{m.round}" for m in live})
        out.append(Violation("state-sync", "agents disagree: " + ", ".join(labels), r))
    seen = {m.chiral == nxt.orientations[a] for a, m in nxt.memories.items() if m.chiral is not None}
    if len(seen) > 1:
        out.append(Violation("chirality", "agents adopted different global directions", r))
    for a, m in nxt.memories.items():
        if (m.phase == CHIRALITY) != (m.chiral is None) and m.phase != DONE:
            out.append(Violation("chiral-flag", f"agent {a} phase {m.phase} chiral {m.chiral}", r))
        if PHASE_ORDER[m.phase] < PHASE_ORDER[prev.memories[a].phase]:
            out.append(Violation("phase-regress", f"agent {a} {prev.memories[a].phase}->{m.phase}", r))
    exp = expected_phases(prev, edge, k)
    for a, m in nxt.memories.items():
        if m.phase not in exp[a]:
            out.append(Violation("phase-mismatch",
                                 f"agent {a} in {m.phase}, expected {'/'.join(exp[a])}", r))
    kind = _round_kind(prev)
    if kind == "dispersion":
        l = prev.cfg.l
        psi0 = metrics(prev.cfg).psi
        psi1 = metrics(nxt.cfg).psi
        if psi0 > n - l and not psi1 < psi0:
            out.append(Violation("psi-stall", f"psi {psi0} -> {psi1}", r))
    elif kind == "kdispersion" and not is_k_dispersed(prev.cfg, k):
        out.extend(_gap_checks(prev, nxt, k, r))
    return out


def _gap_checks(prev: SimulationState, nxt: SimulationState, k: int, r: int) -> List[Violation]:
    out = []
    if not is_dispersed(nxt.cfg):
        out.append(Violation("collision", "two agents share a node during k-dispersion", r))
        return out
    d = agreed_cw(prev) or 1
    before = _ordered_gaps(prev, d)
    after = _ordered_gaps(nxt, d)
    grew = False
    for a, (b, g0) in before.items():
        b1, g1 = after[a]
        if b1 != b:
            out.append(Violation("order", f"agent {a} overtook or was overtaken", r))
            continue
        if g0 >= k and g1 < k:
            out.append(Violation("gap-drop", f"gap {a}->{b} fell from {g0} to {g1}", r))
        if g0 < k and g1 < g0:
            out.append(Violation("gap-shrink", f"gap {a}->{b} shrank from {g0} to {g1}", r))
        if g0 < k and g1 > g0:
            grew = True
    if not grew:
        out.append(Violation("no-growth", "no gap below k grew", r))
    return out


# --- trace records ------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def agents_record(state: SimulationState) -> List[dict]:
    where = state.cfg.where()
    out = []
    for a in sorted(state.memories):
        d = state.memories[a].to_dict()
        d["node"] = where[a]
        out.append(d)
    return out


def round_record(state: SimulationState, edge: Optional[int], events: Sequence[dict],
                 violations: Sequence[Violation]) -> dict:
    n = state.cfg.n
    mt = metrics(state.cfg)
    occ = state.cfg.occupancy()
    return {
        "type": "round",
        "round": state.round,
        "missing_edge": fmt_edge(n, edge),
        "occupancy": {str(v): sorted(ids) for v, ids in sorted(occ.items())},
        "agents": agents_record(state),
        "metrics": {"phi": mt.phi, "psi": mt.psi, "chains": mt.chains_total,
                    "directed_cw": mt.directed_per_direction[0],
                    "directed_ccw": mt.directed_per_direction[1]},
        "events": list(events) + [dict(type="violation", **v.to_dict()) for v in violations],
    }


def state_from_record(rec: dict, n: int, orientations: Mapping[int, bool]) -> SimulationState:
    mems, where = {}, {}
    for d in rec["agents"]:
        d = dict(d)
        where[d["id"]] = d.pop("node")
        mems[d["id"]] = AgentMemory.from_dict(d)
    return SimulationState(rec["round"], GlobalConfiguration.from_mapping(n, where),
                           mems, dict(orientations))


# --- run loop -----------------------------------------------------------------

def round_cap(n: int, l: int, id_bits: int) -> int:
    return 300 * l * (n + id_bits)


def all_chiral(state: SimulationState) -> bool:
    return all(m.chiral is not None or m.phase == DONE for m in state.memories.values())


def simulate(state: SimulationState, params: Params, adversary, max_rounds: int,
             step_fn: StepFn = step, header: Optional[dict] = None,
             stop_on_violation: bool = True) -> RunResult:
    """Drive rounds until every agent is Done, the cap is hit, or a monitor fires."""
    trace = [dumps(header)] if header is not None else []
    violations: List[Violation] = []
    blocked = 0
    t_chiral = t_disp = t_kdd = None
    agreement = None
    if all_chiral(state):
        t_chiral = 0
    if t_chiral is not None and is_dispersed(state.cfg):
        t_disp = 0
    outcome = None
    while True:
        if all(m.phase == DONE for m in state.memories.values()):
            outcome = Outcome("Terminated", state.round)
            break
        if state.round >= max_rounds:
            outcome = Outcome("RoundCapExceeded", state.round)
            break
        edge = adversary.decide(state.round, state, params)
        nxt, events = apply_round(state, edge, params, step_fn)
        found = monitor_invariants(state, nxt, params.k, edge, events)
        blocked += sum(1 for e in events if e["type"] == "blocked-move")
        trace.append(dumps(round_record(nxt, edge, events, found)))
        violations.extend(found)
        state = nxt
        if t_chiral is None and all_chiral(state):
            t_chiral = state.round
            agreement = len({m.chiral == state.orientations[a]
                             for a, m in state.memories.items() if m.chiral is not None}) <= 1
        if t_chiral is not None and t_disp is None and is_dispersed(state.cfg):
            t_disp = state.round
        if found and stop_on_violation:
            outcome = Outcome("InvariantViolation", state.round, found[0].kind + ": " + found[0].detail)
            break
    if outcome.ok:
        t_kdd = state.round
    trace.append(dumps({"type": "outcome", "kind": outcome.kind, "rounds": outcome.rounds,
                        "detail": outcome.detail}))
    return RunResult(
        outcome, state, trace, violations, blocked,
        rounds_to_chirality=t_chiral,
        rounds_to_dispersion=None if t_disp is None or t_chiral is None else t_disp - t_chiral,
        rounds_to_kdd=None if t_kdd is None or t_disp is None else t_kdd - t_disp,
        agreement_ok=agreement,
    )
