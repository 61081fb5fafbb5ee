import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innloops.loop_core import (LoopTable, SubloopMask, analyze, associator, associator_subloop,
                                center, commutator, is_power_associative,
                                coset_partition, format_looptab, is_associative, is_normal,
                                mu_count, nilpotency_class, nuclei, parse_looptab, quotient,
                                read_looptab, subloop_generated, subloop_table,
                                upper_central_series, validate_table, write_looptab)
from innloops.shared.errors import BadShape, NoIdentity, NotLatin, NotNormal, NotSubloop
from innloops.shared.settings import get_settings

from .conftest import ORDER5, cyclic

elements128 = st.integers(min_value=0, max_value=127)


class TestValidateTable:
    def test_accepts_cyclic_group(self):
        Q = validate_table([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
        assert Q.n == 3
        assert Q.is_commutative

    def test_rejects_non_square(self):
        with pytest.raises(BadShape):
            validate_table([[0, 1], [1, 0], [0, 1]])

    def test_rejects_entries_out_of_range(self):
        with pytest.raises(BadShape):
            validate_table([[0, 1], [1, 2]])

    def test_rejects_repeated_entries(self):
        with pytest.raises(NotLatin):
            validate_table([[0, 1], [1, 1]])

    def test_rejects_missing_identity(self):
        with pytest.raises(NoIdentity):
            validate_table([[1, 0], [0, 1]])

    def test_rejects_float_tables(self):
        with pytest.raises(BadShape):
            validate_table(np.array([[0.0, 1.0], [1.0, 0.0]]))


class TestDivisions:
    def test_divisions_invert_the_product(self, order5):
        T = order5.table
        xs = np.arange(order5.n)
        assert np.array_equal(order5.ldiv[xs[:, None], T], np.broadcast_to(xs, T.shape))
        assert np.array_equal(order5.rdiv[T, xs[None, :]], np.broadcast_to(xs[:, None], T.shape))

    def test_translations_are_rows_and_columns(self, order5):
        assert order5.left_translation(2).tolist() == ORDER5[2]
        assert order5.right_translation(2).tolist() == [row[2] for row in ORDER5]

    def test_table_is_read_only(self, order5):
        with pytest.raises(ValueError):
            order5.table[1, 1] = 2


class TestAssociativity:
    def test_group_has_no_nonassociating_triples(self):
        Q = cyclic(6)
        assert is_associative(Q)
        assert mu_count(Q) == 0

    def test_order_five_loop_is_not_associative(self, order5):
        assert not is_associative(order5)
        assert mu_count(order5) > 0

    def test_mu_count_matches_naive_scan(self, order5):
        T = ORDER5
        naive = sum(T[T[a][b]][c] != T[a][T[b][c]]
                    for a in range(5) for b in range(5) for c in range(5))
        assert mu_count(order5) == naive

    @settings(max_examples=60, deadline=None)
    @given(elements128, elements128, elements128)
    def test_associator_defining_identity(self, loop_c, x, y, z):
        Q = loop_c
        T = Q.table
        a = associator(Q, x, y, z)
        assert T[T[x, T[y, z]], a] == T[T[x, y], z]

    @settings(max_examples=60, deadline=None)
    @given(elements128, elements128)
    def test_commutator_defining_identity(self, loop_c, x, y):
        Q = loop_c
        T = Q.table
        assert T[T[y, x], commutator(Q, x, y)] == T[x, y]


class TestSubloops:
    def test_subset_missing_identity_is_rejected(self):
        with pytest.raises(NotSubloop):
            SubloopMask(cyclic(4), [2])

    def test_unclosed_subset_is_rejected(self):
        with pytest.raises(NotSubloop):
            SubloopMask(cyclic(4), [0, 1])

    def test_generated_subloop(self):
        S = subloop_generated(cyclic(6), [2])
        assert S.elements.tolist() == [0, 2, 4]
        assert S.bitset == 0b10101

    def test_membership_and_iteration(self):
        S = SubloopMask(cyclic(6), [0, 3])
        assert 3 in S and 2 not in S and 17 not in S
        assert list(S) == [0, 3]
        assert S.issubset(SubloopMask(cyclic(6), range(6)))

    def test_cosets_and_quotient(self):
        Q = cyclic(6)
        S = SubloopMask(Q, [0, 3])
        labels, reps = coset_partition(Q, S)
        assert reps.tolist() == [0, 1, 2]
        assert labels.tolist() == [0, 1, 2, 0, 1, 2]
        assert quotient(Q, S) == cyclic(3)

    def test_non_normal_subgroup(self, group_d8):
        # sigma generates a non-normal subgroup of order 2
        S = SubloopMask(group_d8, [0, 2])
        assert not is_normal(group_d8, S)
        with pytest.raises(NotNormal):
            quotient(group_d8, S)

    def test_normal_closure(self, group_d8):
        S = subloop_generated(group_d8, [2], normal=True)
        assert S.size == 4
        assert is_normal(group_d8, S)

    def test_associator_subloop(self, order5, group_d8):
        assert associator_subloop(group_d8).size == 1
        # a normal subloop of a loop of prime order is trivial or everything
        assert associator_subloop(order5).size == 5

    def test_power_associativity(self, order5):
        assert is_power_associative(order5)
        assert is_power_associative(cyclic(6))

    def test_subloop_table_renumbers(self):
        Q = cyclic(6)
        sub = subloop_table(Q, SubloopMask(Q, [0, 2, 4]))
        assert sub == cyclic(3)


class TestNilpotency:
    def test_abelian_group_has_class_one(self):
        assert upper_central_series(cyclic(4)) == [4, 1]
        assert nilpotency_class(cyclic(4)) == 1

    def test_dihedral_group_has_class_two(self, group_d8):
        assert center(group_d8).size == 2
        assert nilpotency_class(group_d8) == 2

    def test_loop_with_trivial_center_is_not_nilpotent(self, order5):
        assert center(order5).size == 1
        assert nilpotency_class(order5) is None


class TestNamedLoops:
    def test_properties_of_c(self, loop_c):
        report = analyze(loop_c)
        assert report.order == 128
        assert report.nilpotency_class == 3
        assert report.nucleus_size == 16
        assert report.right_nucleus_size == 16
        assert report.left_nucleus_size == 32
        assert report.middle_nucleus_size == 32
        assert report.center_size == 2
        assert report.nucleus_elementary_abelian_2
        assert report.center_is_associator_subloop

    def test_properties_of_cbar(self, loop_cbar):
        report = analyze(loop_cbar)
        assert report.nucleus_size == 16
        assert (report.left_nucleus_size, report.middle_nucleus_size,
                report.right_nucleus_size) == (64, 64, 64)
        assert report.center_size == 2
        assert report.nilpotency_class == 3

    def test_power_associative_loop(self, loop_pa64):
        report = analyze(loop_pa64)
        assert report.order == 64
        assert not report.is_associative
        assert report.power_associative
        assert report.nuclei_cover_loop
        assert report.nucleus_size == 16
        assert (report.left_nucleus_size, report.middle_nucleus_size,
                report.right_nucleus_size) == (32, 32, 32)

    def test_nuclei_are_nested(self, loop_c):
        lam, mid, rho, nuc = nuclei(loop_c)
        for one_sided in (lam, mid, rho):
            assert nuc.issubset(one_sided)
        assert center(loop_c).issubset(nuc)

    def test_mlt_report_is_consistent(self, loop_pa64):
        report = analyze(loop_pa64, mlt=True)
        assert report.mlt_order == report.order * report.inn_order
        assert report.inn_abelian is not None


class TestLooptab:
    def test_written_table_reads_back(self, tmp_path, loop_pa64):
        path = write_looptab(loop_pa64, tmp_path / "pa64.tab")
        assert path.read_text().startswith("LOOPTAB 1\nn=64\n")
        assert read_looptab(path) == loop_pa64
        assert read_looptab(path).name == "pa64"

    def test_comments_and_blank_lines_are_ignored(self):
        text = "# order two\nLOOPTAB 1\n\nn=2\n0 1\n1 0\n"
        assert parse_looptab(text).table.tolist() == [[0, 1], [1, 0]]

    @pytest.mark.parametrize("text", [
        "LOOPTAB 2\nn=2\n0 1\n1 0\n",
        "LOOPTAB 1\nn=3\n0 1\n1 0\n",
        "LOOPTAB 1\norder 2\n0 1\n1 0\n",
        "LOOPTAB 1\nn=2\n0 x\n1 0\n",
        "LOOPTAB 1\nn=2\n0 1 0\n1 0\n",
    ])
    def test_malformed_files_are_rejected(self, text):
        with pytest.raises(BadShape):
            parse_looptab(text)

    def test_format_is_one_row_per_line(self):
        assert format_looptab(cyclic(2)) == "LOOPTAB 1\nn=2\n0 1\n1 0\n"

    def test_order_limit(self, monkeypatch, isolated_settings):
        monkeypatch.setenv("INNLOOPS_MAX_ORDER", "4")
        get_settings.cache_clear()
        with pytest.raises(BadShape):
            parse_looptab(format_looptab(cyclic(5)))
        assert parse_looptab(format_looptab(cyclic(4))).n == 4

    def test_order_limit_applies_to_tables(self, monkeypatch, isolated_settings):
        big = (np.arange(520)[:, None] + np.arange(520)[None, :]) % 520
        with pytest.raises(BadShape):
            validate_table(big)
        monkeypatch.setenv("INNLOOPS_MAX_ORDER", "600")
        get_settings.cache_clear()
        assert validate_table(big).n == 520
        monkeypatch.setenv("INNLOOPS_MAX_ORDER", "4")
        get_settings.cache_clear()
        with pytest.raises(BadShape):
            validate_table(np.arange(25).reshape(5, 5) % 5)

    def test_binary_file_is_rejected(self, tmp_path):
        path = tmp_path / "noise.tab"
        path.write_bytes(b"LOOPTAB 1\nn=2\n\xff\xfe 1\n1 0\n")
        with pytest.raises(BadShape):
            read_looptab(path)

    def test_invalid_table_in_file(self):
        with pytest.raises(NotLatin):
            parse_looptab("LOOPTAB 1\nn=2\n0 1\n1 1\n")


class TestRelabel:
    def test_relabel_must_fix_identity(self, order5):
        with pytest.raises(BadShape):
            order5.relabel([1, 0, 2, 3, 4])

    def test_relabel_preserves_the_product(self, order5):
        perm = np.array([0, 3, 1, 4, 2])
        R = order5.relabel(perm)
        T = order5.table
        assert np.array_equal(R.table[perm[:, None], perm[None, :]], perm[T])

    def test_equality_and_hash(self, order5):
        other = LoopTable(np.array(ORDER5))
        assert other == order5
        assert hash(other) == hash(order5)
