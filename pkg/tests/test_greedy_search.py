import numpy as np
import pytest

from innloops.greedy_search import (GreedyState, flip_blocks, greedy_minimize,
                                    resolve_flip_element)
from innloops.loop_core import SubloopMask, center, coset_partition, mu_count, nuclei
from innloops.shared.errors import BadCosetStructure, NotCentralInvolution

from .conftest import cyclic


@pytest.fixture(scope="module")
def c_nucleus(loop_c):
    return nuclei(loop_c)[3]


def test_flip_is_an_involution(loop_c, c_nucleus):
    labels, _ = coset_partition(loop_c, c_nucleus)
    h = resolve_flip_element(loop_c, c_nucleus)
    once = flip_blocks(loop_c.table, labels, h, 2, 5)
    assert not np.array_equal(once, loop_c.table)
    assert np.array_equal(flip_blocks(once, labels, h, 2, 5), loop_c.table)


def test_flip_touches_only_the_two_blocks(loop_c, c_nucleus):
    labels, _ = coset_partition(loop_c, c_nucleus)
    h = resolve_flip_element(loop_c, c_nucleus)
    changed = flip_blocks(loop_c.table, labels, h, 1, 3) != loop_c.table
    rows, cols = np.nonzero(changed)
    assert {(int(labels[r]), int(labels[c])) for r, c in zip(rows, cols)} == {(1, 3), (3, 1)}


class TestFlipElement:
    def test_auto_picks_the_central_involution(self, loop_c, c_nucleus):
        assert resolve_flip_element(loop_c, c_nucleus) == int(center(loop_c).elements[1])

    def test_explicit_element_must_be_central(self, loop_c, c_nucleus):
        Z = center(loop_c)
        other = next(int(x) for x in c_nucleus.elements if x not in Z)
        with pytest.raises(NotCentralInvolution):
            resolve_flip_element(loop_c, c_nucleus, other)

    def test_explicit_identity_is_rejected(self, loop_c, c_nucleus):
        with pytest.raises(NotCentralInvolution):
            resolve_flip_element(loop_c, c_nucleus, 0)

    def test_explicit_element_outside_subloop(self):
        Z4 = cyclic(4)
        with pytest.raises(BadCosetStructure):
            resolve_flip_element(Z4, SubloopMask(Z4, [0]), 2)

    def test_auto_needs_a_unique_candidate(self, group_h0):
        H = group_h0.table
        with pytest.raises(BadCosetStructure):
            resolve_flip_element(H, center(H))

    def test_auto_without_involutions(self):
        Z3 = cyclic(3)
        with pytest.raises(NotCentralInvolution):
            resolve_flip_element(Z3, SubloopMask(Z3, range(3)))


class TestDescent:
    def test_state_enumerates_non_identity_pairs(self, loop_c, c_nucleus):
        labels, _ = coset_partition(loop_c, c_nucleus)
        state = GreedyState(current=loop_c, labels=labels, h=1, count=0)
        assert state.coset_count == 8
        assert len(state.pairs()) == 21
        assert state.pairs()[0] == (1, 2)

    def test_single_step(self, loop_c, c_nucleus):
        final, history = greedy_minimize(loop_c, c_nucleus, max_steps=1)
        assert len(history.steps) <= 1
        assert history.coset_count == 8
        assert history.initial_mu_count == mu_count(loop_c)
        assert history.final_mu_count == mu_count(final)
        assert history.final_mu_count <= history.initial_mu_count

    def test_group_is_already_minimal(self, group_d8):
        N = center(group_d8)
        final, history = greedy_minimize(group_d8, N)
        assert history.steps == []
        assert final == group_d8

    def test_subloop_must_be_normal(self, group_d8):
        with pytest.raises(BadCosetStructure):
            greedy_minimize(group_d8, SubloopMask(group_d8, [0, 2]))

    @pytest.mark.slow
    def test_counts_strictly_decrease(self, loop_c, c_nucleus):
        final, history = greedy_minimize(loop_c, c_nucleus)
        counts = [history.initial_mu_count] + [s.mu_count for s in history.steps]
        assert all(a > b for a, b in zip(counts, counts[1:]))
        assert all(1 <= i < j <= 8 for i, j in (s.pair for s in history.steps))
        assert mu_count(final) == history.final_mu_count

    @pytest.mark.slow
    def test_parallel_evaluation_agrees(self, loop_c, c_nucleus):
        _, serial = greedy_minimize(loop_c, c_nucleus, max_steps=2)
        _, parallel = greedy_minimize(loop_c, c_nucleus, max_steps=2, workers=2)
        assert serial == parallel
