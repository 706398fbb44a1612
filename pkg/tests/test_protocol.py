from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from dkdring.protocol import (CHIRALITY, DISPERSION, DONE, INIT, KDISPERSION, MERGE_I, MERGE_II,
                              OSCILLATE, PRE_MERGE_I, PRE_ROUNDABOUT, ROUNDABOUT, ZERO_MERGE_ONE,
                              AgentMemory, Params, ProtocolError, achiral_2_chiral, dispersed_step,
                              get_directed, guider, id_bit, id_bit_length, k_disperse_step, merge_0_to_1,
                              merge_1, merge_2, preprocess, round_the_ring_0, round_the_ring_1,
                              scene_of, step)
from dkdring.ring import EMPTY, MULTI, SINGLE, Move, ReadableMemory, RingView


def view(n, marks, missing=None, count=None, others=()):
    cells = [EMPTY] * n
    for j, c in marks.items():
        cells[j] = c
    if count is None:
        count = 1 + len(others)
    return RingView(tuple(cells), missing, 0, count, tuple(others))


def mate(i, state=INIT, rnd=0):
    return ReadableMemory(i, state, rnd, 0, 0, 0)


P12 = Params(12, 1, id_bit_length(12))


def run_proc(proc, mem, v, params=P12):
    return proc(mem, v, scene_of(v.cells, v.missing), params)


class TestIdBits:
    def test_bit_length(self):
        assert id_bit_length(12) == 8  # 144 needs 8 bits

    def test_bits_from_the_right(self):
        assert [id_bit(0b101, x) for x in (1, 2, 3)] == [1, 0, 1]


class TestDispatch:
    def test_asymmetric_adopts_direction(self):
        # chain at local 0..3, edge (0,1): nearer end is cell -1, direction +1
        v = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE, 3: SINGLE}, missing=0)
        act = step(AgentMemory(3), v, Params(12, 2, 8))
        assert act.move == Move.STAY
        assert act.memory.chiral is True and act.memory.phase == DISPERSION

    def test_global_majority_ccw(self):
        # one directed chain pointing to local CCW: Multi at 0, Single at 1
        v = view(12, {0: MULTI, 1: SINGLE, 6: SINGLE}, count=2, others=(mate(9),))
        act = step(AgentMemory(3), v, P12)
        assert act.memory.chiral is False and act.memory.phase == DISPERSION

    def test_dispersion_without_multi_goes_to_k_phase(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 5: SINGLE})
        mem = AgentMemory(3, chiral=True, phase=DISPERSION)
        act = step(mem, v, Params(12, 3, 8))
        assert act.memory.phase == KDISPERSION

    def test_done_stays(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 5: SINGLE})
        mem = AgentMemory(3, chiral=True, phase=DONE)
        act = step(mem, v, Params(12, 3, 8))
        assert act.move == Move.STAY and act.memory == mem

    def test_k_dispersed_view_finishes(self):
        v = view(12, {0: SINGLE, 4: SINGLE, 8: SINGLE})
        act = step(AgentMemory(3, chiral=True, phase=KDISPERSION), v, Params(12, 3, 8))
        assert act.memory.phase == DONE

    def test_malformed_views(self):
        with pytest.raises(ProtocolError):
            step(AgentMemory(1), view(5, {0: SINGLE}), P12)
        with pytest.raises(ProtocolError):
            step(AgentMemory(1), view(12, {3: SINGLE}), P12)

    @given(st.integers(1, 144), st.lists(st.sampled_from([EMPTY, SINGLE, MULTI]), min_size=11, max_size=11),
           st.one_of(st.none(), st.integers(0, 11)))
    def test_pure(self, ident, rest, missing):
        v = RingView((SINGLE,) + tuple(rest), missing, 0, 1, ())
        assert step(AgentMemory(ident), v, P12) == step(AgentMemory(ident), v, P12)


class TestGuider:
    def test_directed_and_zero_chain(self):
        v = view(12, {0: SINGLE, 1: MULTI, 6: SINGLE}, count=1)
        act = run_proc(guider, AgentMemory(1), v)
        assert act.memory.state == PRE_MERGE_I and act.memory.round == 0

    def test_two_undirected_long_chains(self):
        v = view(12, {j: SINGLE for j in (0, 1, 2, 3, 6, 7, 8, 9)})
        act = run_proc(guider, AgentMemory(1), v)
        assert act.memory.state == OSCILLATE and act.move == Move.STAY

    def test_all_directed(self):
        v = view(12, {0: SINGLE, 1: MULTI, 6: MULTI, 7: SINGLE})
        assert run_proc(guider, AgentMemory(1), v).memory.state == MERGE_II

    def test_all_fc_one_undirected(self):
        v = view(12, {0: SINGLE, 1: MULTI, 5: SINGLE, 6: SINGLE, 7: SINGLE})
        act = run_proc(guider, AgentMemory(1, round=7, osc_wait=1, ret=1), v)
        assert act.memory.state == OSCILLATE
        assert (act.memory.round, act.memory.osc_wait, act.memory.ret) == (0, 0, 0)


class TestPreprocess:
    def test_least_leaves_multi_zero_chain(self):
        v = view(12, {0: MULTI, 6: SINGLE}, count=3, others=(mate(7), mate(9)))
        act = run_proc(preprocess, AgentMemory(3, state=PRE_MERGE_I), v)
        assert act.move == Move.CW and act.memory.round == 1

    def test_non_least_stays(self):
        v = view(12, {0: MULTI, 6: SINGLE}, count=2, others=(mate(2),))
        assert run_proc(preprocess, AgentMemory(3, state=PRE_MERGE_I), v).move == Move.STAY

    def test_multi_multi_one_chain_spreads(self):
        v = view(12, {0: MULTI, 1: MULTI, 6: SINGLE}, count=2, others=(mate(8),))
        act = run_proc(preprocess, AgentMemory(3, state=PRE_MERGE_I, round=1), v)
        assert act.move == Move.CCW  # outward from the CCW terminal

    def test_routes_after_two_rounds(self):
        zeros = view(12, {0: SINGLE, 4: SINGLE, 8: SINGLE})
        ones = view(12, {0: SINGLE, 1: SINGLE, 6: SINGLE, 7: SINGLE})
        mixed = view(12, {0: SINGLE, 5: SINGLE, 6: SINGLE})
        longer = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE, 6: SINGLE})
        mem = AgentMemory(1, state=PRE_MERGE_I, round=2)
        assert run_proc(preprocess, mem, zeros).memory.state == ROUNDABOUT
        act = run_proc(preprocess, mem, ones)
        assert act.memory.state == PRE_ROUNDABOUT and act.memory.move_flag == 0
        assert run_proc(preprocess, mem, mixed).memory.state == ZERO_MERGE_ONE
        act = run_proc(preprocess, mem, longer)
        assert act.memory.state == MERGE_I and act.memory.round == 0


class TestRoundTheRing0:
    zeros = view(12, {0: SINGLE, 4: SINGLE, 8: SINGLE})

    def test_walks_while_alone(self):
        act = run_proc(round_the_ring_0, AgentMemory(1, state=ROUNDABOUT, round=3), self.zeros)
        assert act.move == Move.CW and act.memory.round == 4

    def test_stops_once_chained(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 8: SINGLE})
        act = run_proc(round_the_ring_0, AgentMemory(1, state=ROUNDABOUT, round=3), v)
        assert act.move == Move.STAY

    def test_success_after_n_rounds(self):
        act = run_proc(round_the_ring_0, AgentMemory(1, state=ROUNDABOUT, round=12), self.zeros)
        assert act.memory.chiral is True and act.memory.phase == DISPERSION

    def test_failure_after_n_rounds(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE, 8: SINGLE})
        act = run_proc(round_the_ring_0, AgentMemory(1, state=ROUNDABOUT, round=12), v)
        assert act.memory.state == INIT and act.memory.chiral is None


class TestRoundTheRing1:
    B = P12.id_bits

    def test_bit_decides_inward_move(self):
        # own chain 0..1 with self at the CCW terminal; inward is local CW
        v = view(12, {0: SINGLE, 1: SINGLE, 6: SINGLE, 7: SINGLE})
        act = run_proc(round_the_ring_1, AgentMemory(0b101, state=PRE_ROUNDABOUT, round=2), v)
        assert act.move == Move.CW and act.memory.round == 3
        act = run_proc(round_the_ring_1, AgentMemory(0b101, state=PRE_ROUNDABOUT, round=1), v)
        assert act.move == Move.STAY

    def test_symmetric_view_resets_everyone(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 6: SINGLE, 7: SINGLE}, missing=6)
        act = run_proc(round_the_ring_1, AgentMemory(5, state=PRE_ROUNDABOUT, round=0), v)
        assert act.memory.state == INIT and act.move == Move.STAY

    def test_symmetric_own_chain_moves_outward(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 6: SINGLE, 7: SINGLE}, missing=0)
        act = run_proc(round_the_ring_1, AgentMemory(5, state=PRE_ROUNDABOUT, round=0), v)
        assert act.memory.state == INIT and act.move == Move.CCW

    def test_least_at_pair_leaves(self):
        v = view(12, {0: MULTI, 6: MULTI}, count=2, others=(mate(9, PRE_ROUNDABOUT, self.B),))
        act = run_proc(round_the_ring_1, AgentMemory(5, state=PRE_ROUNDABOUT, round=self.B), v)
        assert act.move == Move.CW and act.memory.move_flag == 1

    def test_partner_direction_adopted(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 6: SINGLE, 7: SINGLE})
        act = run_proc(round_the_ring_1, AgentMemory(9, state=PRE_ROUNDABOUT, round=self.B + 1), v)
        assert act.memory.pair_dir == 1

    def test_surviving_long_chain_resets(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE, 3: SINGLE})
        mem = AgentMemory(9, state=PRE_ROUNDABOUT, round=self.B + 2 * 12 + 2, pair_dir=1)
        assert run_proc(round_the_ring_1, mem, v).memory.state == INIT

    def test_all_pairs_agree(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 6: SINGLE, 7: SINGLE})
        mem = AgentMemory(9, state=PRE_ROUNDABOUT, round=self.B + 2 * 12 + 2, pair_dir=-1)
        act = run_proc(round_the_ring_1, mem, v)
        assert act.memory.chiral is False and act.memory.phase == DISPERSION


class TestMergeZeroToOne:
    def test_moves_toward_nearest_one_chain(self):
        v = view(12, {0: SINGLE, 3: SINGLE, 4: SINGLE, 8: SINGLE})
        act = run_proc(merge_0_to_1, AgentMemory(1, state=ZERO_MERGE_ONE), v)
        assert act.move == Move.CW

    def test_tie_goes_local_cw(self):
        v = view(12, {0: SINGLE, 3: SINGLE, 4: SINGLE, 8: SINGLE, 9: SINGLE})
        act = run_proc(merge_0_to_1, AgentMemory(1, state=ZERO_MERGE_ONE), v)
        assert act.move == Move.CW

    def test_fc_chain_resets(self):
        v = view(12, {0: SINGLE, 3: SINGLE, 4: SINGLE, 5: SINGLE})
        assert run_proc(merge_0_to_1, AgentMemory(1, state=ZERO_MERGE_ONE), v).memory.state == INIT


class TestMergeI:
    def test_zero_chain_moves_to_fc_side(self):
        v = view(12, {0: SINGLE, 4: SINGLE, 8: SINGLE, 9: SINGLE, 10: SINGLE})
        act = run_proc(merge_1, AgentMemory(1, state=MERGE_I), v)
        assert act.move == Move.CCW

    def test_one_chain_between_fc_chains_splits(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 4: SINGLE, 5: SINGLE, 6: SINGLE})
        act = run_proc(merge_1, AgentMemory(1, state=MERGE_I), v)
        assert act.move == Move.CCW  # at the CCW terminal, moving outward

    def test_all_fc_resets(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE, 6: SINGLE, 7: SINGLE, 8: SINGLE})
        assert run_proc(merge_1, AgentMemory(1, state=MERGE_I), v).memory.state == INIT


class TestGetDirected:
    B = P12.id_bits

    def test_round_zero_extra_agents_step_in(self):
        v = view(12, {0: MULTI, 1: SINGLE, 2: MULTI, 6: SINGLE, 7: SINGLE, 8: SINGLE},
                 count=2, others=(mate(2, OSCILLATE),))
        act = run_proc(get_directed, AgentMemory(7, state=OSCILLATE), v)
        assert act.move == Move.CW

    def test_bits_break_the_tie_in_first_pair(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE, 7: SINGLE, 8: SINGLE, 9: SINGLE})
        mover = run_proc(get_directed, AgentMemory(5, state=OSCILLATE, round=1), v)
        sitter = run_proc(get_directed, AgentMemory(6, state=OSCILLATE, round=1), v)
        assert mover.move == Move.CW and mover.memory.ret == 1
        assert sitter.move == Move.STAY

    def test_first_differing_bit_schedule(self):
        # oracle: walk both ids' bit schedules until exactly one terminal moves
        def first_split(a, b):
            x = 1
            while id_bit(a, x) == id_bit(b, x) or not (id_bit(a, x) or id_bit(b, x)):
                x += 1
            return x
        assert first_split(5, 6) == 1
        assert first_split(4, 6) == 2

    def test_freeze_once_directed(self):
        v = view(12, {0: MULTI, 1: SINGLE, 6: SINGLE, 7: SINGLE, 8: SINGLE}, count=2,
                 others=(mate(2, OSCILLATE, 2),))
        act = run_proc(get_directed, AgentMemory(5, state=OSCILLATE, round=2, ret=1, ret_dir=1), v)
        assert act.memory.osc_wait == 1 and act.move == Move.STAY

    def test_step_back_when_still_undirected(self):
        v = view(12, {0: MULTI, 1: MULTI, 6: SINGLE, 7: SINGLE, 8: SINGLE}, count=2,
                 others=(mate(2, OSCILLATE, 2),))
        act = run_proc(get_directed, AgentMemory(5, state=OSCILLATE, round=2, ret=1, ret_dir=1), v)
        assert act.move == Move.CCW and act.memory.ret == 0

    def test_timeout(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 2: SINGLE})
        act = run_proc(get_directed, AgentMemory(5, state=OSCILLATE, round=2 * self.B + 1), v)
        assert act.memory.state == INIT


class TestMergeII:
    def test_facing_pair_advances(self):
        # self on the Single end of a chain pointing CW toward a chain pointing CCW
        v = view(12, {0: SINGLE, 1: MULTI, 5: MULTI, 6: SINGLE})
        act = run_proc(merge_2, AgentMemory(1, state=MERGE_II), v)
        assert act.move == Move.CW

    def test_edge_inside_own_chain_waits(self):
        v = view(12, {0: SINGLE, 1: MULTI, 5: MULTI, 6: SINGLE}, missing=0)
        assert run_proc(merge_2, AgentMemory(1, state=MERGE_II), v).move == Move.STAY

    def test_no_facing_pair_resets(self):
        v = view(12, {0: SINGLE, 1: MULTI, 5: SINGLE, 6: MULTI})
        assert run_proc(merge_2, AgentMemory(1, state=MERGE_II), v).memory.state == INIT


class TestDispersed:
    mem = AgentMemory(4, chiral=True, phase=DISPERSION)

    def test_head_side_shift(self):
        # chain 3(1),4(3),5(1) seen from the agent on node 4 (local 0)
        v = view(12, {11: SINGLE, 0: MULTI, 1: SINGLE}, count=3, others=(mate(1), mate(2)))
        assert dispersed_step(self.mem, v, P12).move == Move.CW
        least = view(12, {11: SINGLE, 0: MULTI, 1: SINGLE}, count=3, others=(mate(2), mate(4)))
        assert dispersed_step(replace(self.mem, id=1), least, P12).move == Move.STAY
        tail = view(12, {0: SINGLE, 1: MULTI, 2: SINGLE})
        assert dispersed_step(self.mem, tail, P12).move == Move.STAY
        head = view(12, {10: SINGLE, 11: MULTI, 0: SINGLE})
        assert dispersed_step(self.mem, head, P12).move == Move.CW

    def test_tail_side_shift_when_edge_ahead_of_multi(self):
        # chain 3(2),4(1),5(1), missing (4,5); viewer is the second agent on node 3
        v = view(12, {0: MULTI, 1: SINGLE, 2: SINGLE}, missing=1, count=2, others=(mate(1),))
        assert dispersed_step(self.mem, v, P12).move == Move.CCW

    def test_chain_without_multi_stays(self):
        v = view(12, {0: SINGLE, 1: SINGLE, 6: MULTI})
        assert dispersed_step(self.mem, v, P12).move == Move.STAY

    def test_reflected_agent_uses_agreed_frame(self):
        v = view(12, {1: SINGLE, 0: MULTI, 11: SINGLE}, count=3, others=(mate(1), mate(2)))
        act = dispersed_step(replace(self.mem, chiral=False), v, P12)
        assert act.move == Move.CCW  # agreed CW is its local CCW


class TestKDisperse:
    def test_elected_moves(self):
        p = Params(18, 3, id_bit_length(18))
        # agent @8 of {0,8,14,16}, seen from node 8
        v = view(18, {0: SINGLE, 6: SINGLE, 8: SINGLE, 10: SINGLE})
        act = k_disperse_step(AgentMemory(2, chiral=True, phase=DISPERSION), v, p)
        assert act.move == Move.CW and act.memory.phase == KDISPERSION

    def test_non_elected_stays(self):
        p = Params(18, 3, id_bit_length(18))
        # agent @14 of the same configuration
        v = view(18, {0: SINGLE, 2: SINGLE, 4: SINGLE, 12: SINGLE})
        act = k_disperse_step(AgentMemory(3, chiral=True, phase=KDISPERSION), v, p)
        assert act.move == Move.STAY
