"""Per-agent state machine: chirality, dispersion, then distance-k dispersion.

An agent decides from its own memory and its :class:`RingView` only.  Before
chirality is settled every direction below is the agent's private one
(``+1`` = its local clockwise).  Afterwards the view is turned into the
agreed frame before the dispersion rules are evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Tuple

from .chains import (ASYMMETRIC, FC, SYMMETRIC, Chain, ChainClass, SymmetryClass,
                     _classify, _decompose, _symmetry, cells_k_dispersed, global_direction)
from .klinks import kdd_moves
from .ring import EMPTY, MULTI, SINGLE, Move, RingView, reflect_view

# states of the chirality phase
INIT = "Init"
OSCILLATE = "Oscillate"
PRE_MERGE_I = "PreMergeI"
MERGE_I = "MergeI"
MERGE_II = "MergeII"
ROUNDABOUT = "Roundabout"
PRE_ROUNDABOUT = "PreRoundabout"
ZERO_MERGE_ONE = "ZeroMergeOne"
STATES = (INIT, OSCILLATE, PRE_MERGE_I, MERGE_I, MERGE_II, ROUNDABOUT,
          PRE_ROUNDABOUT, ZERO_MERGE_ONE)

CHIRALITY = "Chirality"
DISPERSION = "Dispersion"
KDISPERSION = "KDispersion"
DONE = "Done"
PHASES = (CHIRALITY, DISPERSION, KDISPERSION, DONE)
PHASE_ORDER = {p: i for i, p in enumerate(PHASES)}


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class Params:
    n: int
    k: int
    id_bits: int


def id_bit_length(n: int, c: int = 2) -> int:
    """Bits needed for any id in ``[1, n**c]``."""
    return (n ** c).bit_length()


def id_bit(agent_id: int, x: int) -> int:
    """The ``x``-th bit of the id counted from the right, 1-indexed."""
    return (agent_id >> (x - 1)) & 1


@dataclass(frozen=True)
class AgentMemory:
    """Persistent per-agent state.

    ``ret_dir`` remembers which local way a GetDirected probe went so the
    agent can undo it; ``pair_dir`` is the direction a 1-chain pair agreed on
    during RoundTheRing-I.  ``chiral`` is True when the agreed clockwise is the
    agent's own local clockwise.
    """

    id: int
    state: str = INIT
    round: int = 0
    osc_wait: int = 0
    ret: int = 0
    ret_dir: int = 0
    move_flag: int = 0
    pair_dir: int = 0
    chiral: Optional[bool] = None
    phase: str = CHIRALITY

    def to_dict(self) -> dict:
        return {"id": self.id, "state": self.state, "round": self.round,
                "osc_wait": self.osc_wait, "ret": self.ret, "ret_dir": self.ret_dir,
                "move_flag": self.move_flag, "pair_dir": self.pair_dir,
                "chiral": self.chiral, "phase": self.phase}

    @classmethod
    def from_dict(cls, d: dict) -> "AgentMemory":
        return cls(**d)


class Action(NamedTuple):
    move: int  # Move in the agent's local frame
    memory: AgentMemory


# --- what an agent reads off a view ------------------------------------------

class Scene:
    """Derived structure of one view, shared by all procedures."""

    __slots__ = ("n", "cells", "missing", "chains", "classes", "owner", "sym",
                 "gdir", "nfc", "fc")

    def __init__(self, cells: Tuple[int, ...], missing: Optional[int]):
        self.n = len(cells)
        self.cells = cells
        self.missing = missing
        self.chains: Tuple[Chain, ...] = _decompose(cells)
        self.classes: Tuple[ChainClass, ...] = tuple(_classify(c) for c in self.chains)
        owner = [-1] * self.n
        for i, ch in enumerate(self.chains):
            for v in ch.nodes(self.n):
                owner[v] = i
        self.owner = tuple(owner)
        self.sym: SymmetryClass = _symmetry(cells, missing)
        self.gdir = global_direction(cells)
        self.fc = tuple(cl.feasibility == FC for cl in self.classes)
        self.nfc = not all(self.fc)

    # neighbours ---------------------------------------------------------
    def neighbour(self, idx: int, d: int) -> Optional[int]:
        m = len(self.chains)
        if m < 2:
            return None
        return (idx + d) % m

    def gap(self, idx: int, d: int) -> int:
        """Hops from chain ``idx``'s terminal on side ``d`` to the next chain."""
        ch = self.chains[idx]
        other = self.chains[self.neighbour(idx, d)]
        if d == 1:
            return (other.start - ch.end) % self.n
        return (ch.start - other.end) % self.n

    def singleton_chain(self, idx: int) -> bool:
        ch = self.chains[idx]
        return (not ch.degenerate and ch.length <= 1
                and all(self.cells[v] == SINGLE for v in ch.nodes(self.n)))

    def directed(self, idx: int) -> bool:
        return self.classes[idx].visibly_directed

    def edge_inside(self, idx: int) -> bool:
        """Missing edge joins two nodes of chain ``idx``."""
        if self.missing is None:
            return False
        ch = self.chains[idx]
        j = ch.edge_position(self.n, self.missing)
        return 0 <= j < ch.length


@lru_cache(maxsize=1 << 16)
def scene_of(cells: Tuple[int, ...], missing: Optional[int]) -> Scene:
    return Scene(cells, missing)


def _least_here(mem: AgentMemory, view: RingView) -> bool:
    return all(mem.id < other.id for other in view.colocated)


def _terminal_side(sc: Scene, idx: int, cell: int) -> int:
    """+1 if ``cell`` is the frame-CW terminal of chain idx, -1 if the CCW one, 0 otherwise."""
    ch = sc.chains[idx]
    off = ch.offset(sc.n, cell)
    if off == ch.length:
        return 1
    if off == 0:
        return -1
    return 0


# --- Algorithm 2 procedures ---------------------------------------------------

def guider(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    directed = [sc.directed(i) for i in range(len(sc.chains))]
    if any(directed):
        if not sc.nfc:
            if all(directed):
                return Action(Move.STAY, replace(mem, state=MERGE_II))
            return Action(Move.STAY, replace(mem, state=OSCILLATE, round=0,
                                             osc_wait=0, ret=0, ret_dir=0))
        return Action(Move.STAY, replace(mem, state=PRE_MERGE_I, round=0))
    if any(ch.length <= 1 for ch in sc.chains):
        return Action(Move.STAY, replace(mem, state=PRE_MERGE_I, round=0))
    return Action(Move.STAY, replace(mem, state=OSCILLATE, round=0,
                                     osc_wait=0, ret=0, ret_dir=0))


def preprocess(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    me = sc.owner[0]
    ch = sc.chains[me]
    if mem.round == 0:
        mem = replace(mem, round=1)
        if ch.length == 0 and view.self_count > 1 and _least_here(mem, view):
            return Action(Move.CW, mem)
        return Action(Move.STAY, mem)
    if mem.round == 1:
        mem = replace(mem, round=2)
        if (ch.length == 1 and sc.cells[ch.start] == MULTI and sc.cells[ch.end] == MULTI
                and _least_here(mem, view)):
            return Action(_terminal_side(sc, me, 0), mem)
        return Action(Move.STAY, mem)
    mem = replace(mem, round=0)
    if all(sc.singleton_chain(i) for i in range(len(sc.chains))):
        lengths = {c.length for c in sc.chains}
        if lengths == {0}:
            return Action(Move.STAY, replace(mem, state=ROUNDABOUT))
        if lengths == {1}:
            return Action(Move.STAY, replace(mem, state=PRE_ROUNDABOUT, move_flag=0))
        return Action(Move.STAY, replace(mem, state=ZERO_MERGE_ONE))
    return Action(Move.STAY, replace(mem, state=MERGE_I))


def round_the_ring_0(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    if mem.round < params.n:
        mem = replace(mem, round=mem.round + 1)
        me = sc.owner[0]
        # keep walking only while still a lone singleton 0-chain
        if sc.chains[me].length == 0 and view.self_count == 1:
            return Action(Move.CW, mem)
        return Action(Move.STAY, mem)
    if all(c.length == 0 for c in sc.chains) and all(
            sc.singleton_chain(i) for i in range(len(sc.chains))):
        return Action(Move.STAY, replace(mem, chiral=True, phase=DISPERSION))
    return Action(Move.STAY, replace(mem, state=INIT))


def round_the_ring_1(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    B, n = params.id_bits, params.n
    me = sc.owner[0]
    ch = sc.chains[me]
    rho = mem.round
    if rho < B:
        mem = replace(mem, round=rho + 1)
        if sc.sym.kind == SYMMETRIC:
            mem = replace(mem, state=INIT)
            if sc.sym.witness == ch and ch.length == 1:
                return Action(_terminal_side(sc, me, 0), mem)
            return Action(Move.STAY, mem)
        if ch.length == 0 and view.self_count > 1:
            return Action(Move.STAY, mem)
        if ch.length == 1 and id_bit(mem.id, rho + 1):
            return Action(-_terminal_side(sc, me, 0), mem)
        return Action(Move.STAY, mem)
    if rho == B:
        mem = replace(mem, round=rho + 1)
        if _least_here(mem, view):
            return Action(Move.CW, replace(mem, move_flag=1, pair_dir=1))
        return Action(Move.STAY, mem)
    if rho == B + 1:
        mem = replace(mem, round=rho + 1)
        if mem.move_flag == 0:
            side = _terminal_side(sc, me, 0) if ch.length == 1 else 0
            return Action(Move.STAY, replace(mem, pair_dir=-side if side else 1))
        return Action(Move.STAY, mem)
    if rho <= B + 2 * n + 1:
        mem = replace(mem, round=rho + 1)
        if sc.sym.kind == SYMMETRIC and sc.sym.witness == ch:
            return Action(Move.STAY, mem)
        if ch.length < 2:
            return Action(mem.pair_dir or Move.CW, mem)
        return Action(Move.STAY, mem)
    if all(c.length == 1 for c in sc.chains) and all(
            sc.singleton_chain(i) for i in range(len(sc.chains))):
        return Action(Move.STAY, replace(mem, chiral=(mem.pair_dir >= 0), phase=DISPERSION))
    return Action(Move.STAY, replace(mem, state=INIT))


def merge_0_to_1(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    has_zero = any(c.length == 0 for c in sc.chains)
    if not (has_zero and not any(sc.fc)):
        return Action(Move.STAY, replace(mem, state=INIT))
    me = sc.owner[0]
    if sc.chains[me].length != 0:
        return Action(Move.STAY, mem)
    options = []
    for d in (1, -1):
        nb = sc.neighbour(me, d)
        if nb is not None and sc.chains[nb].length == 1:
            options.append((sc.gap(me, d), d))
    if not options:
        return Action(Move.STAY, mem)
    options.sort()
    if len(options) == 2 and options[0][0] == options[1][0]:
        return Action(Move.CW, mem)
    return Action(options[0][1], mem)


def merge_1(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    if not sc.nfc:
        return Action(Move.STAY, replace(mem, state=INIT))
    # an NFC chain with a multiplicity has no rule here; send it back through PreProcess
    for i, ok in enumerate(sc.fc):
        if not ok and not sc.singleton_chain(i):
            return Action(Move.STAY, replace(mem, state=INIT))
    me = sc.owner[0]
    ch = sc.chains[me]
    fc_sides = [d for d in (1, -1)
                if sc.neighbour(me, d) is not None and sc.fc[sc.neighbour(me, d)]]
    if ch.length == 0 and view.self_count == 1:
        if len(fc_sides) == 1:
            return Action(fc_sides[0], mem)
        if len(fc_sides) == 2:
            return Action(Move.CW, mem)
        return Action(Move.STAY, mem)
    if ch.length == 1 and sc.singleton_chain(me):
        side = _terminal_side(sc, me, 0)
        if len(fc_sides) == 2:
            return Action(side, mem)
        if len(fc_sides) == 1 and side == fc_sides[0]:
            return Action(side, mem)
    return Action(Move.STAY, mem)


def get_directed(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    B = params.id_bits
    me = sc.owner[0]
    ch = sc.chains[me]
    side = _terminal_side(sc, me, 0)
    at_undirected_terminal = side != 0 and ch.length >= 2 and not sc.directed(me)
    rho = mem.round
    if rho == 0:
        mem = replace(mem, round=1)
        if at_undirected_terminal and view.self_count > 1 and not _least_here(mem, view):
            return Action(-side, mem)
        return Action(Move.STAY, mem)
    if rho <= 2 * B:
        mem = replace(mem, round=rho + 1)
        if rho % 2 == 1:
            x = (rho - 1) // 2
            if at_undirected_terminal and mem.osc_wait == 0 and id_bit(mem.id, x + 1):
                return Action(-side, replace(mem, ret=1, ret_dir=-side))
            return Action(Move.STAY, mem)
        if mem.ret:
            if sc.directed(me):
                return Action(Move.STAY, replace(mem, osc_wait=1, ret=0, ret_dir=0))
            back = -mem.ret_dir
            return Action(back, replace(mem, ret=0, ret_dir=0))
        return Action(Move.STAY, mem)
    return Action(Move.STAY, replace(mem, state=INIT))


def _facing(sc: Scene, idx: int) -> bool:
    cl = sc.classes[idx]
    if not cl.visibly_directed:
        return False
    nb = sc.neighbour(idx, cl.direction)
    if nb is None:
        return False
    other = sc.classes[nb]
    return other.visibly_directed and other.direction == -cl.direction


def merge_2(mem: AgentMemory, view: RingView, sc: Scene, params: Params) -> Action:
    if not any(_facing(sc, i) for i in range(len(sc.chains))):
        return Action(Move.STAY, replace(mem, state=INIT))
    me = sc.owner[0]
    if _facing(sc, me) and not sc.edge_inside(me):
        return Action(sc.classes[me].direction, mem)
    return Action(Move.STAY, mem)


PROCEDURES = {
    INIT: guider,
    OSCILLATE: get_directed,
    PRE_MERGE_I: preprocess,
    MERGE_I: merge_1,
    MERGE_II: merge_2,
    ROUNDABOUT: round_the_ring_0,
    PRE_ROUNDABOUT: round_the_ring_1,
    ZERO_MERGE_ONE: merge_0_to_1,
}


def achiral_2_chiral(mem: AgentMemory, view: RingView, params: Params) -> Action:
    sc = scene_of(view.cells, view.missing)
    if sc.sym.kind == ASYMMETRIC:
        return Action(Move.STAY, replace(mem, chiral=(sc.sym.direction == 1), phase=DISPERSION))
    if sc.gdir is not None:
        return Action(Move.STAY, replace(mem, chiral=(sc.gdir == 1), phase=DISPERSION))
    return PROCEDURES[mem.state](mem, view, sc, params)


# --- phases after chirality ---------------------------------------------------

def _agreed(mem: AgentMemory, view: RingView) -> RingView:
    return view if mem.chiral else reflect_view(view)


def _to_local(mem: AgentMemory, move: int) -> int:
    return move if mem.chiral else -move


def dispersed_step(mem: AgentMemory, view: RingView, params: Params) -> Action:
    mem = replace(mem, phase=DISPERSION)
    v = _agreed(mem, view)
    sc = scene_of(v.cells, v.missing)
    n = sc.n
    ch = sc.chains[sc.owner[0]]
    if ch.degenerate:
        return Action(Move.STAY, mem)
    multis = [j for j in range(ch.length + 1) if v.cells[(ch.start + j) % n] == MULTI]
    if not multis:
        return Action(Move.STAY, mem)
    jm = multis[0]
    me = ch.offset(n, 0)
    j = ch.edge_position(n, v.missing) if v.missing is not None else None
    toward_head = j is None or j > ch.length or j < jm
    if toward_head:
        if me == jm:
            return Action(Move.STAY if _least_here(mem, view) else _to_local(mem, 1), mem)
        if me > jm:
            return Action(_to_local(mem, 1), mem)
        return Action(Move.STAY, mem)
    if me == jm:
        return Action(Move.STAY if _least_here(mem, view) else _to_local(mem, -1), mem)
    if me < jm:
        return Action(_to_local(mem, -1), mem)
    return Action(Move.STAY, mem)


def k_disperse_step(mem: AgentMemory, view: RingView, params: Params) -> Action:
    mem = replace(mem, phase=KDISPERSION)
    v = _agreed(mem, view)
    nodes = [j for j, c in enumerate(v.cells) if c != EMPTY]
    movers, d = kdd_moves(v.n, nodes, params.k, v.missing)
    if 0 in movers:
        return Action(_to_local(mem, d), mem)
    return Action(Move.STAY, mem)


def validate_view(view: RingView, params: Params) -> None:
    if view.n != params.n:
        raise ProtocolError(f"view has {view.n} cells, ring has {params.n}")
    if view.cells[0] == EMPTY or view.self_count < 1:
        raise ProtocolError("agent's own cell is empty")


def step(mem: AgentMemory, view: RingView, params: Params) -> Action:
    """One Look-Compute decision; pure in (mem, view, params)."""
    return _step(mem, view, params)


@lru_cache(maxsize=1 << 18)
def _step(mem: AgentMemory, view: RingView, params: Params) -> Action:
    validate_view(view, params)
    if mem.phase == DONE:
        return Action(Move.STAY, mem)
    if cells_k_dispersed(view.cells, params.k):
        return Action(Move.STAY, replace(mem, phase=DONE))
    if mem.phase == CHIRALITY:
        return achiral_2_chiral(mem, view, params)
    if any(c == MULTI for c in view.cells):
        return dispersed_step(mem, view, params)
    return k_disperse_step(mem, view, params)


StepFn = Callable[[AgentMemory, RingView, Params], Action]
