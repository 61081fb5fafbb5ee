import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from innloops import gf2


def matrices(rank):
    return st.lists(st.integers(min_value=0, max_value=(1 << rank) - 1),
                    min_size=rank, max_size=rank).map(
        lambda cols: gf2.matrix_from_images(cols, rank))


@given(st.integers(min_value=0, max_value=255))
def test_vectors_and_ints_agree(value):
    assert gf2.vec_to_int(gf2.int_to_vec(value, 8)) == value


@given(matrices(4))
def test_lookup_table_matches_apply(A):
    images = gf2.lookup_table(A)
    assert [gf2.apply(A, v) for v in range(16)] == images.tolist()


@given(matrices(4))
def test_inverse_of_invertible_matrix(A):
    assume(gf2.rank_of(A) == 4)
    assert np.array_equal(gf2.matmul(A, gf2.inverse(A)), gf2.identity(4))


@given(matrices(4))
def test_lookup_table_is_additive(A):
    images = gf2.lookup_table(A)
    v = np.arange(16)
    assert np.array_equal(images[v[:, None] ^ v[None, :]], images[:, None] ^ images[None, :])


def test_singular_matrix_has_no_inverse():
    with pytest.raises(ValueError):
        gf2.inverse(gf2.matrix_from_images([0b01, 0b01], 2))


def test_row_reduce_reports_pivots():
    reduced, pivots = gf2.row_reduce(np.array([[1, 1, 0], [1, 1, 1]], dtype=np.uint8))
    assert pivots == [0, 2]
    assert reduced.tolist() == [[1, 1, 0], [0, 0, 1]]


def test_solve_automorphism_from_spanning_set():
    # swap a = a1 a2 a3 and b = a4, fix a2 and a3
    a, b = 0b0111, 0b1000
    A = gf2.solve_automorphism([a, b, 0b0010, 0b0100], [b, a, 0b0010, 0b0100], 4)
    assert gf2.apply(A, a) == b
    assert gf2.apply(A, b) == a
    assert gf2.apply(A, 0b0010) == 0b0010
    assert np.array_equal(gf2.matmul(A, A), gf2.identity(4))


def test_solve_automorphism_rejects_non_spanning_vectors():
    with pytest.raises(ValueError):
        gf2.solve_automorphism([0b01, 0b01], [0b01, 0b10], 2)


def test_solve_automorphism_rejects_nonlinear_images():
    with pytest.raises(ValueError):
        gf2.solve_automorphism([0b01, 0b10, 0b11], [0b01, 0b10, 0b01], 2)
