import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innloops.extensions import elementary_abelian
from innloops.iso import (are_isomorphic, canonical_fingerprint, element_signatures,
                          global_invariants, isomorphism_classes, loop_profile, refined_colors)
from innloops.modification import group64, squaring_vector
from innloops.shared.errors import SearchLimitExceeded

from .conftest import cyclic


def relabelings(n):
    """Permutations of 0..n-1 fixing the identity."""
    return st.permutations(list(range(1, n))).map(lambda rest: np.array([0] + list(rest)))


def is_isomorphism(Q1, Q2, m):
    T1, T2 = Q1.table, Q2.table
    return all(m[T1[x, y]] == T2[m[x], m[y]] for x in range(Q1.n) for y in range(Q1.n))


class TestRelabeledCopies:
    @settings(max_examples=25, deadline=None)
    @given(relabelings(5))
    def test_witness_for_order_five(self, order5, perm):
        R = order5.relabel(perm)
        m = are_isomorphic(order5, R)
        assert m is not None
        assert is_isomorphism(order5, R, m)

    @settings(max_examples=5, deadline=None)
    @given(relabelings(64))
    def test_witness_for_power_associative_loop(self, loop_pa64, perm):
        R = loop_pa64.relabel(perm)
        m = are_isomorphic(loop_pa64, R)
        assert m is not None
        assert is_isomorphism(loop_pa64, R, m)

    @settings(max_examples=5, deadline=None)
    @given(relabelings(64))
    def test_fingerprint_is_invariant(self, loop_pa64, perm):
        R = loop_pa64.relabel(perm)
        assert canonical_fingerprint(R) == canonical_fingerprint(loop_pa64)
        assert global_invariants(R) == global_invariants(loop_pa64)

    def test_signatures_follow_the_relabeling(self, order5):
        perm = np.array([0, 2, 3, 4, 1])
        R = order5.relabel(perm)
        before, after = element_signatures(order5), element_signatures(R)
        assert all(before[x] == after[perm[x]] for x in range(5))


class TestNonIsomorphic:
    def test_cyclic_and_klein_groups(self):
        assert are_isomorphic(cyclic(4), elementary_abelian(2)) is None

    def test_different_orders(self):
        assert are_isomorphic(cyclic(4), cyclic(5)) is None

    def test_fingerprints_differ(self, loop_c, loop_cbar):
        assert canonical_fingerprint(loop_c) != canonical_fingerprint(loop_cbar)


def test_refinement_separates_identity():
    colors = refined_colors(elementary_abelian(3))
    assert len(set(colors[1:].tolist())) == 1
    assert colors[0] != colors[1]


def test_node_limit():
    E = elementary_abelian(3)
    R = E.relabel(np.array([0, 3, 5, 6, 7, 1, 2, 4]))
    with pytest.raises(SearchLimitExceeded):
        are_isomorphic(E, R, node_limit=1)


def test_isomorphism_classes_keep_first_index_order():
    tables = [cyclic(4), elementary_abelian(2), cyclic(4).relabel(np.array([0, 3, 2, 1]))]
    classes, digests = isomorphism_classes(tables)
    assert classes == [[0, 2], [1]]
    assert len(digests) == 3
    assert digests[0] == digests[2]


def test_precomputed_digests_split_classes():
    tables = [cyclic(4), cyclic(4)]
    classes, digests = isomorphism_classes(tables, digests=["a", "b"])
    assert classes == [[0], [1]]
    assert digests == ["a", "b"]


class TestGroupsOfOrder64:
    @settings(max_examples=5, deadline=None)
    @given(relabelings(64), st.integers(min_value=0, max_value=511))
    def test_relabeled_group_is_found_quickly(self, perm, code):
        H = group64(squaring_vector(code)).table
        R = H.relabel(perm)
        m = are_isomorphic(H, R, node_limit=2000)
        assert m is not None
        assert is_isomorphism(H, R, m)

    def test_signatures_see_squares_and_commutators(self):
        H = group64((0, 0, 0)).table
        signatures = element_signatures(H)
        square_roots = {s[10] for s in signatures}
        assert len(square_roots) > 1
        assert signatures[0][11] == sum(1 for x in range(64) for y in range(64)
                                        if H.table[x, y] == H.table[y, x])

    def test_search_rejects_loops_sharing_a_profile(self):
        Z4, V4 = cyclic(4), elementary_abelian(2)
        shared = loop_profile(Z4)
        assert are_isomorphic(Z4, V4, profiles=(shared, shared)) is None

    def test_classes_are_confirmed_by_witnesses(self):
        tables = [group64(squaring_vector(code)).table for code in range(16)]
        classes, digests = isomorphism_classes(tables)
        assert sorted(i for cls in classes for i in cls) == list(range(16))
        for cls in classes:
            for i in cls[1:]:
                assert digests[i] == digests[cls[0]]
                m = are_isomorphic(tables[cls[0]], tables[i])
                assert m is not None and is_isomorphism(tables[cls[0]], tables[i], m)
        for a, b in zip(classes, classes[1:]):
            assert are_isomorphic(tables[a[0]], tables[b[0]]) is None
