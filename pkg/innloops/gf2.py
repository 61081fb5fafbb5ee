"""
Linear algebra over the two-element field.

Vectors of F_2^r are stored as Python ints (bit j is coordinate j) or as
uint8 arrays; matrices are (r, r) uint8 arrays whose column j is the image
of the basis vector e_j.
"""

from typing import List, Sequence, Tuple

import numpy as np


def int_to_vec(value: int, rank: int) -> np.ndarray:
    return np.array([(value >> j) & 1 for j in range(rank)], dtype=np.uint8)


def vec_to_int(vec: Sequence[int]) -> int:
    return sum(int(bit & 1) << j for j, bit in enumerate(vec))


def identity(rank: int) -> np.ndarray:
    return np.eye(rank, dtype=np.uint8)


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (A.astype(np.int64) @ B.astype(np.int64) % 2).astype(np.uint8)


def apply(A: np.ndarray, value: int) -> int:
    """Image of the vector ``value`` under A, as an int."""
    return vec_to_int(matmul(A, int_to_vec(value, A.shape[1])[:, None])[:, 0])


def lookup_table(A: np.ndarray) -> np.ndarray:
    """images[v] = A v for all 2^r vectors v."""
    rank = A.shape[1]
    columns = [vec_to_int(A[:, j]) for j in range(rank)]
    images = np.zeros(1 << rank, dtype=np.int64)
    for j, col in enumerate(columns):
        images[1 << j:1 << (j + 1)] = images[:1 << j] ^ col
    return images


def matrix_from_images(images: Sequence[int], rank: int) -> np.ndarray:
    """The matrix sending e_j to images[j]."""
    return np.stack([int_to_vec(w, rank) for w in images], axis=1) if rank else np.zeros((0, 0), np.uint8)


def row_reduce(A: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of A and its pivot columns."""
    A = (np.array(A, dtype=np.uint8) & 1).copy()
    m, n = A.shape
    pivots: List[int] = []
    i = 0
    for j in range(n):
        if i == m:
            break
        rows = np.flatnonzero(A[i:, j]) + i
        if rows.size == 0:
            continue
        k = int(rows[0])
        if k != i:
            A[[i, k]] = A[[k, i]]
        others = np.flatnonzero(A[:, j])
        others = others[others != i]
        A[others] ^= A[i]
        pivots.append(j)
        i += 1
    return A, pivots


def rank_of(A: np.ndarray) -> int:
    return len(row_reduce(A)[1])


def inverse(A: np.ndarray) -> np.ndarray:
    """Inverse over F_2; ValueError if A is singular."""
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"matrix must be square, got {A.shape}")
    reduced, pivots = row_reduce(np.concatenate([A, identity(n)], axis=1))
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular over F_2")
    return reduced[:, n:]


def solve_automorphism(vectors: Sequence[int], images: Sequence[int], rank: int) -> np.ndarray:
    """The invertible linear map sending vectors[k] to images[k] for every k.

    ``vectors`` must span F_2^rank; the map is determined by any basis among
    them and then checked against the remaining pairs.
    """
    if len(vectors) != len(images):
        raise ValueError("vectors and images must have equal length")
    V = np.stack([int_to_vec(v, rank) for v in vectors], axis=1)
    W = np.stack([int_to_vec(w, rank) for w in images], axis=1)
    _, pivots = row_reduce(V)
    if len(pivots) != rank:
        raise ValueError("vectors do not span the space")
    A = matmul(W[:, pivots], inverse(V[:, pivots]))
    if not np.array_equal(matmul(A, V), W):
        raise ValueError("prescribed images are not linear")
    if rank_of(A) != rank:
        raise ValueError("prescribed images are not independent")
    return A
