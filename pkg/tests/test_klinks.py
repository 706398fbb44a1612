import pytest
from hypothesis import given, settings, strategies as st

import brute
from dkdring.chains import cyclic_gaps, gaps_k_dispersed
from dkdring.klinks import (decompose_klinks, elected_agent_set, is_movable, kdd_moves,
                            nominee_sets)
from helpers import cfg_at


def agents_at(cfg, nodes):
    who = {v: a for a, v in cfg.positions}
    return frozenset(who[v] for v in nodes)


class TestDecompose:
    def test_three_agent_link(self):
        cfg = cfg_at(18, [0, 8, 14, 16])
        links = decompose_klinks(cfg, 3)
        assert sorted((ln.tail, ln.head, ln.size) for ln in links) == [(8, 8, 1), (14, 0, 3)]

    def test_all_singletons(self):
        links = decompose_klinks(cfg_at(12, [0, 3, 6, 9]), 3)
        assert [ln.size for ln in links] == [1, 1, 1, 1]

    def test_pair_link(self):
        links = decompose_klinks(cfg_at(16, [0, 5, 10, 12]), 4)
        assert sorted((ln.tail, ln.head) for ln in links) == [(0, 0), (5, 5), (10, 12)]

    def test_needs_dispersed(self):
        with pytest.raises(ValueError):
            decompose_klinks(cfg_at(12, [0, 0, 5]), 3)


class TestMovable:
    cfg18 = cfg_at(18, [0, 8, 14, 16])
    cfg16 = cfg_at(16, [0, 5, 10, 12])

    def _link(self, cfg, k, tail):
        return next(ln for ln in decompose_klinks(cfg, k) if ln.tail == tail)

    def test_big_link_movable(self):
        assert is_movable(self.cfg18, 3, self._link(self.cfg18, 3, 14))

    def test_singleton_movable(self):
        assert is_movable(self.cfg18, 3, self._link(self.cfg18, 3, 8))

    def test_gap_equal_to_k_not_movable(self):
        assert not is_movable(self.cfg16, 4, self._link(self.cfg16, 4, 10))


class TestNominees:
    cfg16 = cfg_at(16, [0, 5, 10, 12])

    def _link(self, cfg, k, tail):
        return next(ln for ln in decompose_klinks(cfg, k) if ln.tail == tail)

    def test_walk_hits_immovable_pair(self):
        ns = nominee_sets(self.cfg16, 4, self._link(self.cfg16, 4, 0))
        assert ns.ns_cw == agents_at(self.cfg16, [0, 12])

    def test_walk_stops_at_movable(self):
        ns = nominee_sets(self.cfg16, 4, self._link(self.cfg16, 4, 5))
        assert ns.ns_cw == agents_at(self.cfg16, [5])
        assert ns.ns_ccw == agents_at(self.cfg16, [5, 10])

    def test_large_link_nominates_head(self):
        cfg = cfg_at(18, [0, 8, 14, 16])
        ns = nominee_sets(cfg, 3, self._link(cfg, 3, 14))
        assert ns.ns_cw == agents_at(cfg, [0])


class TestElected:
    def test_two_links(self):
        cfg = cfg_at(18, [0, 8, 14, 16])
        assert elected_agent_set(cfg, 3) == agents_at(cfg, [0, 8])

    def test_three_agents(self):
        cfg = cfg_at(16, [0, 5, 10, 12])
        assert elected_agent_set(cfg, 4) == agents_at(cfg, [0, 12, 5])

    def test_nothing_movable(self):
        assert elected_agent_set(cfg_at(12, [0, 3, 6, 9]), 3) == frozenset()


class TestStepRule:
    def test_intact_ring_18(self):
        movers, d = kdd_moves(18, [0, 8, 14, 16], 3)
        assert d == 1 and movers == {0, 8}

    def test_intact_ring_16(self):
        movers, d = kdd_moves(16, [0, 5, 10, 12], 4)
        after = sorted((v + d) % 16 if v in movers else v for v in [0, 5, 10, 12])
        assert after == [1, 6, 10, 13]

    def test_blocked_elected_agent_switches_to_ccw(self):
        # agent @8 would cross the missing edge (8,9); its own link is the first
        # movable one, and its CCW nominees are everyone but the head @0
        movers, d = kdd_moves(18, [0, 8, 14, 16], 3, missing=8)
        assert d == -1
        assert movers == {8, 14, 16}

    def test_missing_edge_elsewhere_keeps_cw(self):
        movers, d = kdd_moves(18, [0, 8, 14, 16], 3, missing=3)
        assert d == 1 and movers == {0, 8}

    @settings(max_examples=300, deadline=None)
    @given(st.integers(6, 24), st.integers(1, 3), st.data())
    def test_one_round_keeps_gap_rules(self, n, k, data):
        l = data.draw(st.integers(3, max(3, n // k)))
        if l > n // k:
            return
        nodes = sorted(data.draw(st.lists(st.integers(0, n - 1), min_size=l, max_size=l, unique=True)))
        if gaps_k_dispersed(n, nodes, k):
            return
        edge = data.draw(st.one_of(st.none(), st.integers(0, n - 1)))
        movers, d = kdd_moves(n, nodes, k, edge)
        after = []
        for v in nodes:
            crosses = edge is not None and (v if d == 1 else (v - 1) % n) == edge
            after.append((v + d) % n if v in movers and not crosses else v)
        g0 = cyclic_gaps(n, nodes)
        # keep agent order: successor of nodes[i] is nodes[i+1]
        g1 = [(after[(i + 1) % l] - after[i]) % n for i in range(l)]
        assert len(set(after)) == l
        for a, b in zip(g0, g1):
            if a >= k:
                assert b >= k
            else:
                assert b >= a
        assert any(a < k and b > a for a, b in zip(g0, g1))


class TestAgainstBruteForce:
    @pytest.mark.parametrize("n,k", [(6, 1), (6, 2), (7, 2), (8, 2), (8, 1), (8, 3)])
    def test_links_nominees_elected(self, n, k):
        import itertools
        for l in range(1, min(4, n // k) + 1):
            for nodes in itertools.combinations(range(n), l):
                cfg = cfg_at(n, list(nodes))
                got = {(ln.tail, ln.head, ln.size) for ln in decompose_klinks(cfg, k)}
                want = {(ln[0], ln[-1], len(ln)) for ln in brute.klinks(n, nodes, k)}
                assert got == want
                for ln in decompose_klinks(cfg, k):
                    link_nodes = tuple(cfg.node_of(a) for a in ln.agents)
                    assert is_movable(cfg, k, ln) == brute.movable(n, nodes, k, link_nodes)
                    cw, ccw = brute.nominees(n, nodes, k, link_nodes)
                    ns = nominee_sets(cfg, k, ln)
                    assert ns.ns_cw == agents_at(cfg, cw)
                    assert ns.ns_ccw == agents_at(cfg, ccw)
                assert elected_agent_set(cfg, k) == agents_at(cfg, brute.elected(n, nodes, k))
