"""Edge-removal strategies.  Each returns at most one missing edge per round."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from .chains import ASYMMETRIC, SYMMETRIC, classify_symmetry, global_direction
from .engine import SimulationState, compute_actions, crosses, global_moves
from .protocol import CHIRALITY, Params
from .ring import engine_view


class Adversary:
    name = "base"

    def decide(self, rnd: int, state: SimulationState, params: Params) -> Optional[int]:
        raise NotImplementedError

    def spec(self) -> str:
        return self.name


class NoAdversary(Adversary):
    name = "none"

    def decide(self, rnd, state, params):
        return None


@dataclass
class Fixed(Adversary):
    edge: int
    name = "fixed"

    def decide(self, rnd, state, params):
        if not 0 <= self.edge < state.cfg.n:
            raise ValueError(f"edge {self.edge} out of range for n={state.cfg.n}")
        return self.edge

    def spec(self) -> str:
        return f"fixed {self.edge}"


@dataclass
class Scripted(Adversary):
    """Round -> edge; rounds not listed keep every edge."""

    script: Mapping[int, Optional[int]] = field(default_factory=dict)
    name = "scripted"

    def decide(self, rnd, state, params):
        e = self.script.get(rnd)
        if e is not None and not 0 <= e < state.cfg.n:
            raise ValueError(f"scripted edge {e} out of range for n={state.cfg.n}")
        return e

    def spec(self) -> str:
        parts = [f"{r}:{'none' if e is None else e}" for r, e in sorted(self.script.items())]
        return "scripted " + ",".join(parts) if parts else "scripted"


class RandomEdges(Adversary):
    """Each round removes a uniformly chosen edge with probability ``p``."""

    name = "random"

    def __init__(self, p: float = 0.5, seed: int = 0):
        if not 0.0 <= p <= 1.0:
            raise ValueError("removal probability must lie in [0, 1]")
        self.p = p
        self.seed = seed
        self._rng = random.Random(seed)

    def decide(self, rnd, state, params):
        remove = self._rng.random() < self.p
        e = self._rng.randrange(state.cfg.n)
        return e if remove else None

    def spec(self) -> str:
        return f"random p={self.p} seed={self.seed}"


class Blocker(Adversary):
    """One-round lookahead adversary.

    It predicts every agent's move on the intact ring, then tries each edge
    next to an occupied node.  While chirality is still open it refuses edges
    that would hand the agents a direction (asymmetric views) and gives up if
    the configuration already decides chirality.  Among the remaining edges
    that block or change at least one move it prefers symmetric ones, then
    the one that changes the most agents, then the lowest index.
    """

    name = "blocker"

    def decide(self, rnd, state, params):
        cfg = state.cfg.with_edge(None)
        n = cfg.n
        open_chirality = any(m.phase == CHIRALITY for m in state.memories.values())
        if open_chirality and global_direction(engine_view(cfg)) is not None:
            return None
        base = compute_actions(state, None, params)
        base_moves = global_moves(state, base)
        where = cfg.where()
        occupied = set(where.values())
        best: Optional[Tuple[tuple, int]] = None
        for e in range(n):
            if e not in occupied and (e + 1) % n not in occupied:
                continue
            sym = classify_symmetry(cfg.with_edge(e)).kind
            if open_chirality and sym == ASYMMETRIC:
                continue
            acts = compute_actions(state, e, params)
            moves = global_moves(state, acts)
            changed = 0
            for a in where:
                eff = 0 if crosses(n, where[a], moves[a], e) else moves[a]
                if eff != base_moves[a] or acts[a].memory != base[a].memory:
                    changed += 1
            if not changed:
                continue
            score = (sym == SYMMETRIC, changed, -e)
            if best is None or score > best[0]:
                best = (score, e)
        return None if best is None else best[1]


def make_adversary(name: str, **params) -> Adversary:
    name = name.lower()
    if name == "none":
        return NoAdversary()
    if name == "fixed":
        return Fixed(int(params["edge"]))
    if name == "scripted":
        return Scripted(dict(params.get("script", {})))
    if name == "random":
        return RandomEdges(float(params.get("p", 0.5)), int(params.get("seed", 0)))
    if name == "blocker":
        return Blocker()
    raise ValueError(f"unknown adversary {name!r}")


def decide(strategy: Adversary, rnd: int, state: SimulationState, params: Params) -> Optional[int]:
    return strategy.decide(rnd, state, params)
