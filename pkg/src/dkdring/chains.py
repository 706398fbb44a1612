"""Chains, their classes, symmetry of the missing edge, and progress metrics.

Everything here is computed in whatever frame the cells are given in; a
direction of ``+1`` means frame-clockwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from .ring import EMPTY, MULTI, SINGLE, GlobalConfiguration, RingView, engine_view

FC, NFC = "FC", "NFC"
SYMMETRIC, ASYMMETRIC, NEUTRAL = "Symmetric", "Asymmetric", "Neutral"


@dataclass(frozen=True)
class Chain:
    """Maximal run of occupied cells ``start, start+1, ..., end``.

    ``length`` counts edges, so a lone occupied node is a 0-chain.  A ring
    with every node occupied is one degenerate chain with no terminals.
    """

    start: int
    end: int
    length: int
    terminal_classes: Tuple[int, int]
    degenerate: bool = False
    dir: int = 1

    def nodes(self, n: int) -> List[int]:
        return [(self.start + j) % n for j in range(self.length + 1)]

    def offset(self, n: int, cell: int) -> int:
        """Position of ``cell`` inside the chain counted from ``start``."""
        return (cell - self.start) % n

    def contains(self, n: int, cell: int) -> bool:
        return self.degenerate or self.offset(n, cell) <= self.length

    def edge_position(self, n: int, missing: int) -> int:
        """Index ``j`` of edge (start+j, start+j+1); -1 is the edge behind start."""
        return (missing - self.start + 1) % n - 1


@dataclass(frozen=True)
class ChainClass:
    length: int
    visibly_directed: bool
    direction: Optional[int]
    feasibility: str


@dataclass(frozen=True)
class SymmetryClass:
    kind: str
    witness: Optional[Chain] = None
    direction: Optional[int] = None


@dataclass(frozen=True)
class Metrics:
    phi: int
    z0: int
    z1: int
    psi: int
    chains_total: int
    directed_per_direction: Tuple[int, int]


def _cells_of(view) -> Tuple[int, ...]:
    return view.cells if isinstance(view, RingView) else tuple(view)


@lru_cache(maxsize=65536)
def _decompose(cells: Tuple[int, ...]) -> Tuple[Chain, ...]:
    n = len(cells)
    occupied = [c != EMPTY for c in cells]
    if not any(occupied):
        raise ValueError("view has no occupied cell")
    if all(occupied):
        return (Chain(0, n - 1, n - 1, (cells[0], cells[n - 1]), degenerate=True),)
    # walk from the first empty cell so no chain straddles the scan start
    first_empty = occupied.index(False)
    chains = []
    j = 0
    while j < n:
        c = (first_empty + j) % n
        if occupied[c]:
            length = 0
            while occupied[(c + length + 1) % n]:
                length += 1
            end = (c + length) % n
            chains.append(Chain(c, end, length, (cells[c], cells[end])))
            j += length + 1
        else:
            j += 1
    # list in frame order starting from cell 0
    chains.sort(key=lambda ch: (ch.start - 0) % n if not ch.contains(n, 0) else -1)
    return tuple(chains)


def decompose_chains(view) -> List[Chain]:
    return list(_decompose(_cells_of(view)))


def classify_chain(view, chain: Chain) -> ChainClass:
    return _classify(chain)


@lru_cache(maxsize=65536)
def _classify(chain: Chain) -> ChainClass:
    if chain.degenerate:
        return ChainClass(chain.length, False, None, NFC)
    a, b = chain.terminal_classes
    directed = chain.length >= 1 and {a, b} == {SINGLE, MULTI}
    direction = None
    if directed:
        direction = 1 if a == SINGLE else -1
    feasible = chain.length >= 2 or (chain.length == 1 and directed)
    return ChainClass(chain.length, directed, direction, FC if feasible else NFC)


@lru_cache(maxsize=65536)
def _symmetry(cells: Tuple[int, ...], missing: Optional[int]) -> SymmetryClass:
    if missing is None:
        return SymmetryClass(NEUTRAL)
    n = len(cells)
    for ch in _decompose(cells):
        if ch.degenerate:
            continue
        i = ch.length
        j = ch.edge_position(n, missing)
        if j > i:
            continue  # outside the extended arc
        # extended-arc distances: from (start-1) to the near endpoint of the
        # edge is j+1, from the far endpoint to (end+1) is i-j
        if 2 * j + 1 == i:
            return SymmetryClass(SYMMETRIC, ch)
        direction = 1 if j + 1 < i - j else -1
        return SymmetryClass(ASYMMETRIC, ch, direction)
    return SymmetryClass(NEUTRAL)


def classify_symmetry(view) -> SymmetryClass:
    if isinstance(view, GlobalConfiguration):
        view = engine_view(view)
    return _symmetry(_cells_of(view), view.missing)


def asymmetry_direction(view, witness: Optional[Chain] = None) -> int:
    """Frame direction pointing from the nearer extended-arc end to the edge."""
    sym = classify_symmetry(view)
    if sym.kind != ASYMMETRIC:
        raise ValueError("configuration is not asymmetric")
    if witness is not None and witness != sym.witness:
        raise ValueError("witness does not hold the missing edge in its extended arc")
    return sym.direction


@lru_cache(maxsize=65536)
def _directed_counts(cells: Tuple[int, ...]) -> Tuple[int, int]:
    cw = ccw = 0
    for ch in _decompose(cells):
        cl = _classify(ch)
        if cl.visibly_directed:
            if cl.direction == 1:
                cw += 1
            else:
                ccw += 1
    return cw, ccw


def global_direction(view) -> Optional[int]:
    cw, ccw = _directed_counts(_cells_of(view))
    if cw == ccw:
        return None
    return 1 if cw > ccw else -1


def metrics(cfg: GlobalConfiguration) -> Metrics:
    cells = cfg.classes()
    chains = _decompose(cells)
    z0 = z1 = 0
    for ch in chains:
        cl = _classify(ch)
        if ch.degenerate:
            continue
        if ch.length == 0:
            z0 += 1
        elif ch.length == 1 and not cl.visibly_directed:
            z1 += 1
    psi = sum(1 for c in cells if c == EMPTY)
    return Metrics(z0 + z1, z0, z1, psi, len(chains), _directed_counts(cells))


def is_dispersed(cfg: GlobalConfiguration) -> bool:
    return all(c <= 1 for c in cfg.counts())


def cyclic_gaps(n: int, nodes: Sequence[int]) -> List[int]:
    """CW distances between consecutive occupied nodes (sorted input)."""
    m = len(nodes)
    if m == 1:
        return [n]
    return [(nodes[(i + 1) % m] - nodes[i]) % n for i in range(m)]


def gaps_k_dispersed(n: int, nodes: Sequence[int], k: int, strict: bool = False) -> bool:
    gaps = cyclic_gaps(n, sorted(nodes))
    if min(gaps) < k:
        return False
    return (k in gaps) or not strict


def is_k_dispersed(cfg: GlobalConfiguration, k: int, strict: bool = False) -> bool:
    """All occupied nodes singleton and every CW gap at least ``k``.

    With ``strict`` some gap must also equal ``k`` exactly; by default a
    configuration whose gaps all exceed ``k`` is accepted as well.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if not is_dispersed(cfg):
        return False
    return gaps_k_dispersed(cfg.n, [v for _, v in cfg.positions], k, strict)


def cells_k_dispersed(cells: Sequence[int], k: int, strict: bool = False) -> bool:
    if any(c == MULTI for c in cells):
        return False
    nodes = [j for j, c in enumerate(cells) if c == SINGLE]
    return bool(nodes) and gaps_k_dispersed(len(cells), nodes, k, strict)
