import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innloops.perm_group import (Permutation, abelian_invariants, bsgs, center_order, cycle_type,
                                 derived_series, derived_subgroup, element_order_histogram,
                                 fingerprint, inner_mapping_generators, inner_mapping_group,
                                 is_abelian, is_elementary_abelian_2, lr_subgroup,
                                 multiplication_group, normal_closure)
from innloops.shared.errors import DegreeMismatch, NotBijection, TooLarge

from .conftest import cyclic

S4_GENS = [[1, 0, 2, 3], [1, 2, 3, 0]]


def naive_closure(gens, degree):
    """All elements of <gens>, by breadth-first multiplication."""
    identity = tuple(range(degree))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[i] for i in p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return seen


def permutations_of(degree):
    return st.permutations(list(range(degree)))


class TestPermutation:
    def test_product_applies_left_factor_first(self):
        p = Permutation([1, 2, 0])
        q = Permutation([0, 2, 1])
        assert (p * q)(0) == q(p(0))
        assert (p * q).to_list() == [2, 1, 0]

    def test_inverse_power_and_order(self):
        p = Permutation([1, 2, 3, 0, 4])
        assert (p * p.inverse()).is_identity
        assert (p ** 4).is_identity
        assert p ** -1 == p.inverse()
        assert p.order() == 4
        assert p.cycle_type() == (4, 1)

    def test_rejects_non_bijection(self):
        with pytest.raises(NotBijection):
            Permutation([0, 0, 1])

    def test_rejects_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            Permutation([1, 0]) * Permutation([0, 2, 1])

    def test_repr_lists_cycles(self):
        assert repr(Permutation([1, 0, 2, 4, 3])) == "(0 1)(3 4)"
        assert repr(Permutation.identity(3)) == "()"

    def test_cycle_type_counts_fixed_points(self):
        assert cycle_type([0, 1, 2]) == (1, 1, 1)
        assert cycle_type([1, 0, 3, 4, 2]) == (3, 2)


class TestSchreierSims:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=6).flatmap(
        lambda d: st.lists(permutations_of(d), min_size=1, max_size=3)))
    def test_order_matches_naive_closure(self, gens):
        degree = len(gens[0])
        group = bsgs(gens)
        assert group.order == len(naive_closure(gens, degree))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(permutations_of(5), min_size=1, max_size=2), permutations_of(5))
    def test_membership_matches_naive_closure(self, gens, candidate):
        group = bsgs(gens)
        assert group.contains(candidate) == (tuple(candidate) in naive_closure(gens, 5))

    def test_symmetric_group(self):
        S4 = bsgs(S4_GENS)
        assert S4.order == 24
        assert S4.contains([3, 2, 1, 0])
        assert sorted(map(tuple, S4.elements().tolist())) == sorted(naive_closure(S4_GENS, 4))

    def test_element_blocks_cover_group_once(self):
        S5 = bsgs([[1, 0, 2, 3, 4], [1, 2, 3, 4, 0]])
        rows = np.concatenate(list(S5.element_blocks(max_rows=7)))
        assert rows.shape == (120, 5)
        assert len({tuple(r) for r in rows.tolist()}) == 120

    def test_enumeration_limit(self):
        S6 = bsgs([[1, 0, 2, 3, 4, 5], [1, 2, 3, 4, 5, 0]])
        with pytest.raises(TooLarge):
            S6.elements(limit=100)

    def test_export_records_order_as_string(self):
        export = bsgs(S4_GENS).export()
        assert export.order == "24"
        assert export.degree == 4
        assert export.generators == S4_GENS

    def test_mixed_degrees_are_rejected(self):
        with pytest.raises(DegreeMismatch):
            bsgs([[1, 0], [0, 2, 1]])

    def test_trivial_group(self):
        group = bsgs([[0, 1, 2]])
        assert group.order == 1
        assert is_abelian(group)


class TestInvariants:
    def test_derived_subgroup_of_s4(self):
        S4 = bsgs(S4_GENS)
        assert derived_subgroup(S4).order == 12
        assert [G.order for G in derived_series(S4)] == [24, 12, 4, 1]
        assert abelian_invariants(S4) == [2]
        assert center_order(S4) == 1

    def test_abelian_invariants_of_product(self):
        # Z2 x Z4 acting on 2 + 4 points
        G = bsgs([[1, 0, 2, 3, 4, 5], [0, 1, 3, 4, 5, 2]])
        assert abelian_invariants(G) == [2, 4]
        assert center_order(G) == 8

    def test_element_order_histogram_of_s3(self):
        S3 = bsgs([[1, 0, 2], [1, 2, 0]])
        assert element_order_histogram(S3) == {1: 1, 2: 3, 3: 2}

    def test_fingerprint_skips_large_histograms(self):
        S5 = bsgs([[1, 0, 2, 3, 4], [1, 2, 3, 4, 0]])
        fp = fingerprint(S5, histogram_limit=10)
        assert fp.histogram_skipped
        assert fp.element_order_histogram is None
        assert fp.order == 120
        assert fp.derived_series_orders == [120, 60]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=2, max_value=7).flatmap(
        lambda d: st.lists(permutations_of(d), min_size=1, max_size=3)))
    def test_chain_agrees_with_sympy(self, gens):
        group = bsgs(gens)
        assert group.order == group.to_sympy().order()
        D = derived_subgroup(group)
        assert all(group.contains(g) for g in D.generators)
        assert D.order == group.to_sympy().derived_subgroup().order()

    def test_normal_closure_of_a_transposition(self):
        S4 = bsgs(S4_GENS)
        assert normal_closure(S4, [np.array([1, 0, 2, 3])]).order == 24
        assert normal_closure(S4, [np.array([1, 0, 3, 2])]).order == 4
        assert normal_closure(S4, []).order == 1

    def test_elementary_abelian_check(self):
        V4 = bsgs([[1, 0, 3, 2], [2, 3, 0, 1]])
        Z4 = bsgs([[1, 2, 3, 0]])
        assert is_elementary_abelian_2(V4)
        assert is_abelian(Z4) and not is_elementary_abelian_2(Z4)


class TestLoopGroups:
    def test_abelian_group_acts_regularly(self):
        Q = cyclic(8)
        M = multiplication_group(Q)
        assert M.order == 8
        assert inner_mapping_group(Q).order == 1

    def test_dihedral_group(self, group_d8):
        M = multiplication_group(group_d8)
        assert M.order == 32
        inn = inner_mapping_group(group_d8, mlt=M)
        assert inn.order == 4
        assert is_elementary_abelian_2(inn)

    def test_inner_mappings_fix_identity(self, order5):
        maps = inner_mapping_generators(order5)
        assert (maps[:, 0] == 0).all()
        assert maps.shape[1] == 5

    def test_conventions_generate_the_same_group(self, loop_pa64):
        standard = bsgs(list(inner_mapping_generators(loop_pa64, "standard")))
        modified = bsgs(list(inner_mapping_generators(loop_pa64, "modified")))
        inn = inner_mapping_group(loop_pa64)
        assert standard.order == modified.order == inn.order

    def test_unknown_convention(self, order5):
        with pytest.raises(ValueError):
            inner_mapping_generators(order5, "other")

    def test_inn_of_c_is_abelian(self, loop_c):
        M = multiplication_group(loop_c)
        inn = inner_mapping_group(loop_c, mlt=M)
        assert M.order == 128 * inn.order
        assert is_abelian(inn)
        assert is_abelian(lr_subgroup(loop_c))

    def test_inn_of_cbar_is_abelian(self, loop_cbar):
        assert is_abelian(inner_mapping_group(loop_cbar))
