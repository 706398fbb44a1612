"""k-Links of a dispersed configuration, nominee sets and the elected set.

The core routines work on a sorted list of occupied nodes in a fixed CW
frame, which is how an agent sees the ring after chirality is settled.  The
``cfg`` wrappers translate nodes back to agent ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple

from .chains import is_dispersed
from .ring import GlobalConfiguration

Link = Tuple[int, ...]  # CW-ordered occupied nodes, tail first


@dataclass(frozen=True)
class KLink:
    agents: Tuple[int, ...]
    tail: int
    head: int

    @property
    def size(self) -> int:
        return len(self.agents)


@dataclass(frozen=True)
class NomineePair:
    ns_cw: FrozenSet[int]
    ns_ccw: FrozenSet[int]


def links_of(n: int, nodes: Sequence[int], k: int) -> List[Link]:
    """Maximal k-Links, starting with the one that holds the lowest node."""
    nodes = sorted(nodes)
    m = len(nodes)
    gaps = [(nodes[(i + 1) % m] - nodes[i]) % n or n for i in range(m)]
    breaks = [i for i in range(m) if gaps[i] >= k]
    if not breaks:
        # every gap < k cannot happen when n >= l*k; keep one cyclic link
        return [tuple(nodes)]
    links = []
    for b_idx, b in enumerate(breaks):
        nxt = breaks[(b_idx + 1) % len(breaks)]
        start = (b + 1) % m
        run = []
        i = start
        while True:
            run.append(nodes[i])
            if i == nxt:
                break
            i = (i + 1) % m
        links.append(tuple(run))
    lowest = nodes[0]
    first = next(i for i, ln in enumerate(links) if lowest in ln)
    return links[first:] + links[:first]


def link_gap_after(n: int, links: Sequence[Link], idx: int) -> int:
    nxt = links[(idx + 1) % len(links)]
    return (nxt[0] - links[idx][-1]) % n or n


def movable_flags(n: int, links: Sequence[Link], k: int) -> List[bool]:
    return [link_gap_after(n, links, i) > k for i in range(len(links))]


def nominees_of(n: int, links: Sequence[Link], k: int, idx: int,
                movable: Sequence[bool] = None) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """(NS_CW, NS_CCW) of link ``idx`` as node sets."""
    if movable is None:
        movable = movable_flags(n, links, k)
    everyone = frozenset(v for ln in links for v in ln)
    link = links[idx]
    if len(link) >= 2:
        cw = frozenset((link[-1],))
        return cw, everyone - cw
    m = len(links)
    walk = [(idx - j) % m for j in range(m)]  # KS_0, KS_1, ... going CCW
    x = next((j for j in range(1, m) if len(links[walk[j]]) >= 2), None)
    if x is None:
        # only singleton links: nothing to nominate beyond the link itself
        cw = frozenset((link[-1],))
        return cw, everyone - cw
    movable_js = [j for j in range(1, x + 1) if movable[walk[j]]]
    if not movable_js:
        cw = frozenset(links[walk[j]][-1] for j in range(x + 1))
        return cw, everyone - cw
    z = movable_js[-1]
    cw = frozenset(links[walk[j]][-1] for j in range(z))
    held = frozenset(links[walk[j]][-1] for j in range(z, x + 1))
    return cw, everyone - held


def elected_nodes(n: int, links: Sequence[Link], k: int) -> FrozenSet[int]:
    movable = movable_flags(n, links, k)
    out = set()
    for i, mv in enumerate(movable):
        if mv:
            out |= nominees_of(n, links, k, i, movable)[0]
    return frozenset(out)


def kdd_moves(n: int, nodes: Sequence[int], k: int, missing: int = None) -> Tuple[FrozenSet[int], int]:
    """Nodes that move this round and the direction (+1 CW / -1 CCW).

    ``missing`` is the CW-lower endpoint of the missing edge in the same frame.
    """
    links = links_of(n, nodes, k)
    movable = movable_flags(n, links, k)
    eas = elected_nodes(n, links, k)
    if missing is None or missing not in eas:
        return eas, 1
    blocked = missing
    # the movable link whose clockwise nominees hold the blocked agent
    owner = next(i for i, mv in enumerate(movable)
                 if mv and blocked in nominees_of(n, links, k, i, movable)[0])
    m = len(links)
    first = next((owner + j) % m for j in range(m) if movable[(owner + j) % m])
    return nominees_of(n, links, k, first, movable)[1], -1


# --- configuration-level API -------------------------------------------------

def _require_dispersed(cfg: GlobalConfiguration) -> None:
    if not is_dispersed(cfg):
        raise ValueError("k-Links are only defined on dispersed configurations")


def _by_node(cfg: GlobalConfiguration):
    return {v: a for a, v in cfg.positions}


def _to_klink(link: Link, who) -> KLink:
    return KLink(tuple(who[v] for v in link), link[0], link[-1])


def decompose_klinks(cfg: GlobalConfiguration, k: int) -> List[KLink]:
    _require_dispersed(cfg)
    who = _by_node(cfg)
    return [_to_klink(ln, who) for ln in links_of(cfg.n, list(who), k)]


def _index_of(cfg: GlobalConfiguration, k: int, link: KLink):
    links = links_of(cfg.n, [v for _, v in cfg.positions], k)
    for i, ln in enumerate(links):
        if ln[0] == link.tail and ln[-1] == link.head:
            return links, i
    raise ValueError("link is not a maximal k-Link of this configuration")


def is_movable(cfg: GlobalConfiguration, k: int, link: KLink) -> bool:
    links, i = _index_of(cfg, k, link)
    return link_gap_after(cfg.n, links, i) > k


def nominee_sets(cfg: GlobalConfiguration, k: int, link: KLink) -> NomineePair:
    _require_dispersed(cfg)
    links, i = _index_of(cfg, k, link)
    who = _by_node(cfg)
    cw, ccw = nominees_of(cfg.n, links, k, i)
    return NomineePair(frozenset(who[v] for v in cw), frozenset(who[v] for v in ccw))


def elected_agent_set(cfg: GlobalConfiguration, k: int) -> FrozenSet[int]:
    _require_dispersed(cfg)
    who = _by_node(cfg)
    links = links_of(cfg.n, list(who), k)
    return frozenset(who[v] for v in elected_nodes(cfg.n, links, k))
