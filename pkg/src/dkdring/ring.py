"""Ring topology, global configurations and orientation-local views.

Nodes are ``0..n-1`` and global clockwise is ``+1``.  An edge is named by its
CW-lower endpoint: edge ``u`` joins ``u`` and ``u + 1 (mod n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

EMPTY, SINGLE, MULTI = 0, 1, 2
OCC_NAMES = {EMPTY: "Empty", SINGLE: "Singleton", MULTI: "Multi"}


class Direction(IntEnum):
    CW = 1
    CCW = -1

    def reverse(self) -> "Direction":
        return Direction(-int(self))


class Move(IntEnum):
    """Move intent in some frame: +1 frame-CW, -1 frame-CCW."""

    STAY = 0
    CW = 1
    CCW = -1


def occ_class(count: int) -> int:
    if count <= 0:
        return EMPTY
    return SINGLE if count == 1 else MULTI


def ring_distance(n: int, u: int, v: int, d: int = Direction.CW) -> int:
    """Hops from ``u`` to ``v`` walking in direction ``d``."""
    return ((v - u) * int(d)) % n


def arc_nodes(n: int, u: int, v: int, d: int = Direction.CW) -> List[int]:
    step = int(d)
    return [(u + step * j) % n for j in range(ring_distance(n, u, v, d) + 1)]


def edge_between(n: int, a: int, b: int) -> int:
    """Name of the edge joining adjacent nodes ``a`` and ``b``."""
    if (a + 1) % n == b:
        return a
    if (b + 1) % n == a:
        return b
    raise ValueError(f"nodes {a} and {b} are not adjacent on a ring of size {n}")


@dataclass(frozen=True)
class GlobalConfiguration:
    """Ground truth: ring size, missing edge and where every agent sits.

    ``positions`` is a tuple of ``(agent_id, node)`` sorted by agent id.
    """

    n: int
    positions: Tuple[Tuple[int, int], ...]
    missing_edge: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("ring size must be at least 3")
        ids = [a for a, _ in self.positions]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate agent id")
        for a, v in self.positions:
            if not 0 <= v < self.n:
                raise ValueError(f"agent {a} placed on non-existent node {v}")
        if self.missing_edge is not None and not 0 <= self.missing_edge < self.n:
            raise ValueError(f"missing edge {self.missing_edge} out of range")

    @classmethod
    def from_mapping(cls, n: int, where: Mapping[int, int],
                     missing_edge: Optional[int] = None) -> "GlobalConfiguration":
        return cls(n, tuple(sorted(where.items())), missing_edge)

    @classmethod
    def from_occupancy(cls, n: int, occupancy: Mapping[int, Iterable[int]],
                       missing_edge: Optional[int] = None) -> "GlobalConfiguration":
        where = {a: v for v, agents in occupancy.items() for a in agents}
        return cls.from_mapping(n, where, missing_edge)

    @property
    def agent_ids(self) -> Tuple[int, ...]:
        return tuple(a for a, _ in self.positions)

    @property
    def l(self) -> int:
        return len(self.positions)

    def where(self) -> Dict[int, int]:
        return dict(self.positions)

    def node_of(self, agent_id: int) -> int:
        for a, v in self.positions:
            if a == agent_id:
                return v
        raise KeyError(f"unknown agent {agent_id}")

    def occupancy(self) -> Dict[int, List[int]]:
        occ: Dict[int, List[int]] = {}
        for a, v in self.positions:
            occ.setdefault(v, []).append(a)
        return occ

    def counts(self) -> List[int]:
        c = [0] * self.n
        for _, v in self.positions:
            c[v] += 1
        return c

    def classes(self) -> Tuple[int, ...]:
        return tuple(occ_class(c) for c in self.counts())

    def with_edge(self, edge: Optional[int]) -> "GlobalConfiguration":
        return GlobalConfiguration(self.n, self.positions, edge)

    def moved(self, where: Mapping[int, int]) -> "GlobalConfiguration":
        return GlobalConfiguration(self.n, tuple(sorted(where.items())), None)


@dataclass(frozen=True)
class ReadableMemory:
    """The part of a co-located agent's memory another agent may read."""

    id: int
    state: str
    round: int
    osc_wait: int
    ret: int
    move_flag: int


@dataclass(frozen=True)
class RingView:
    """A frame-relative snapshot.

    ``cells[j]`` is the occupancy class ``j`` steps along the frame's CW.
    ``missing`` is ``j`` when the edge between cells ``j`` and ``j + 1`` is
    gone.  For an agent's view the frame starts at the agent's node and runs
    along its private clockwise; for the engine frame ``self_index`` is None.
    """

    cells: Tuple[int, ...]
    missing: Optional[int] = None
    self_index: Optional[int] = 0
    self_count: int = 0
    colocated: Tuple[ReadableMemory, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.cells)


def engine_view(cfg: GlobalConfiguration) -> RingView:
    return RingView(cfg.classes(), cfg.missing_edge, None, 0, ())


def localize(cfg: GlobalConfiguration, agent_id: int, local_cw_is_global: bool,
             colocated: Sequence[ReadableMemory] = ()) -> RingView:
    """The view of ``agent_id``: rotated to its node, reflected if needed.

    The orientation flag itself never appears in the result.
    """
    n = cfg.n
    p = cfg.node_of(agent_id)
    counts = cfg.counts()
    s = 1 if local_cw_is_global else -1
    cells = tuple(occ_class(counts[(p + s * j) % n]) for j in range(n))
    missing = None
    if cfg.missing_edge is not None:
        e = cfg.missing_edge
        missing = (e - p) % n if local_cw_is_global else (p - 1 - e) % n
    return RingView(cells, missing, 0, counts[p], tuple(colocated))


def delocalize_move(local_cw_is_global: bool, action: int) -> int:
    """Translate a local move intent to a global one."""
    action = int(action)
    if action == 0:
        return Move.STAY
    return Move(action if local_cw_is_global else -action)


def to_global_frame(view: RingView, node: int, local_cw_is_global: bool) -> Tuple[int, ...]:
    """Re-express a view's cells in the engine frame (test helper)."""
    n = view.n
    out = [EMPTY] * n
    s = 1 if local_cw_is_global else -1
    for j, c in enumerate(view.cells):
        out[(node + s * j) % n] = c
    return tuple(out)


def reflect_cells(cells: Sequence[int]) -> Tuple[int, ...]:
    """Same view with frame-CW reversed, anchored at cell 0."""
    n = len(cells)
    return tuple(cells[(-j) % n] for j in range(n))


def reflect_missing(n: int, missing: Optional[int]) -> Optional[int]:
    # edge (j, j+1) becomes (-j-1, -j) in the reflected frame
    if missing is None:
        return None
    return (-missing - 1) % n


def reflect_view(view: RingView) -> RingView:
    return RingView(reflect_cells(view.cells), reflect_missing(view.n, view.missing),
                    view.self_index, view.self_count, view.colocated)
