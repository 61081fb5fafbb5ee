"""
Finite loops as multiplication tables.

A loop of order n is an n x n array ``table`` with ``table[x, y]`` the index
of the product xy. Element 0 is the identity. Division tables are derived
once per table and cached:

    ldiv[x, table[x, y]] = y        (x \\ z)
    rdiv[table[y, x], x] = y        (z / x)

Inner mappings use the conventions

    L(x, y) = L_{yx}^{-1} L_y L_x,   R(x, y) = R_{xy}^{-1} R_y R_x,   T(x) = R_x^{-1} L_x

with maps composed right to left, so L(x, y)s = (yx) \\ (y(xs)).

Triple scans (associativity, nuclei) run over x-slabs of shape (b, n, n) so
memory stays bounded for orders up to 512.
"""

import re
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .shared.errors import BadShape, LoopTableError, NoIdentity, NotLatin, NotNormal, NotSubloop
from .shared.logging_config import get_logger
from .shared.models import AnalysisReport
from .shared.settings import get_settings

logger = get_logger(__name__)

LOOPTAB_HEADER = "LOOPTAB 1"
_SLAB_ENTRIES = 1 << 21

PathLike = Union[str, Path]


class LoopTable:
    """Immutable loop multiplication table with identity 0.

    Use ``validate_table`` for untrusted data; the constructor assumes the
    loop axioms already hold.
    """

    def __init__(self, table: np.ndarray, name: Optional[str] = None):
        self._table = np.array(table, dtype=np.int32)
        self._table.setflags(write=False)
        self.name = name

    @property
    def n(self) -> int:
        return int(self._table.shape[0])

    @property
    def table(self) -> np.ndarray:
        return self._table

    def __len__(self) -> int:
        return self.n

    def product(self, x: int, y: int) -> int:
        return int(self._table[x, y])

    @cached_property
    def ldiv(self) -> np.ndarray:
        n = self.n
        out = np.empty_like(self._table)
        out[np.arange(n)[:, None], self._table] = np.arange(n, dtype=np.int32)[None, :]
        out.setflags(write=False)
        return out

    @cached_property
    def rdiv(self) -> np.ndarray:
        n = self.n
        out = np.empty_like(self._table)
        out[self._table, np.arange(n)[None, :]] = np.arange(n, dtype=np.int32)[:, None]
        out.setflags(write=False)
        return out

    def left_division(self, x: int, z: int) -> int:
        return int(self.ldiv[x, z])

    def right_division(self, z: int, x: int) -> int:
        return int(self.rdiv[z, x])

    def left_translation(self, x: int) -> np.ndarray:
        return self._table[x]

    def right_translation(self, x: int) -> np.ndarray:
        return self._table[:, x]

    @cached_property
    def is_commutative(self) -> bool:
        return bool(np.array_equal(self._table, self._table.T))

    def relabel(self, perm: Sequence[int]) -> "LoopTable":
        """Isomorphic copy in which old element x is called perm[x]."""
        perm = np.asarray(perm, dtype=np.int32)
        if perm.shape != (self.n,) or perm[0] != 0:
            raise BadShape("relabeling must be a permutation fixing 0")
        inv = np.empty_like(perm)
        inv[perm] = np.arange(self.n, dtype=np.int32)
        return validate_table(perm[self._table[inv[:, None], inv[None, :]]], name=self.name)

    @cached_property
    def _digest(self) -> int:
        return hash(self._table.tobytes())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoopTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._table, other._table))

    def __hash__(self) -> int:
        return self._digest

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<LoopTable{label} n={self.n}>"


def validate_table(raw: Union[np.ndarray, Sequence[Sequence[int]]],
                   name: Optional[str] = None) -> LoopTable:
    """Check the loop axioms and return the table as a LoopTable."""
    try:
        arr = np.asarray(raw)
    except ValueError as e:
        raise BadShape(f"table is not rectangular: {e}") from e
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise BadShape(f"table must be a nonempty square array, got shape {arr.shape}")
    n = arr.shape[0]
    limit = get_settings().max_order
    if n > limit:
        raise BadShape(f"order {n} exceeds the configured maximum {limit}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise BadShape(f"table entries must be integers, got {arr.dtype}")
    if arr.min() < 0 or arr.max() >= n:
        raise BadShape(f"table entries must lie in 0..{n - 1}")

    expected = np.arange(n)
    bad_rows = np.flatnonzero(~(np.sort(arr, axis=1) == expected[None, :]).all(axis=1))
    if bad_rows.size:
        raise NotLatin(f"row {int(bad_rows[0])} repeats an element")
    bad_cols = np.flatnonzero(~(np.sort(arr, axis=0) == expected[:, None]).all(axis=0))
    if bad_cols.size:
        raise NotLatin(f"column {int(bad_cols[0])} repeats an element")
    if not np.array_equal(arr[0], expected) or not np.array_equal(arr[:, 0], expected):
        raise NoIdentity("row 0 and column 0 must both be the identity")
    return LoopTable(arr, name=name)


class SubloopMask:
    """A subloop of ``parent`` given by a boolean membership mask."""

    def __init__(self, parent: LoopTable, members: Union[np.ndarray, Iterable[int]],
                 verify: bool = True):
        mask = np.zeros(parent.n, dtype=bool)
        if isinstance(members, np.ndarray) and members.dtype == bool:
            if members.shape != (parent.n,):
                raise NotSubloop("membership mask has the wrong length")
            mask[:] = members
        else:
            mask[np.fromiter((int(m) for m in members), dtype=np.intp)] = True
        if verify:
            _check_closure(parent, mask)
        mask.setflags(write=False)
        self.parent = parent
        self._mask = mask

    @classmethod
    def from_bitset(cls, parent: LoopTable, bits: int) -> "SubloopMask":
        return cls(parent, [i for i in range(parent.n) if (bits >> i) & 1])

    @property
    def members(self) -> np.ndarray:
        return self._mask

    @cached_property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self._mask)

    @property
    def size(self) -> int:
        return int(self.elements.size)

    @property
    def bitset(self) -> int:
        return int.from_bytes(np.packbits(self._mask, bitorder="little").tobytes(), "little")

    def __len__(self) -> int:
        return self.size

    def __contains__(self, x: int) -> bool:
        return 0 <= x < self.parent.n and bool(self._mask[x])

    def __iter__(self) -> Iterator[int]:
        return iter(int(x) for x in self.elements)

    def issubset(self, other: "SubloopMask") -> bool:
        return not bool((self._mask & ~other._mask).any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubloopMask):
            return NotImplemented
        return self.parent.n == other.parent.n and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self) -> int:
        return hash((self.parent.n, self.bitset))

    def __repr__(self) -> str:
        return f"<SubloopMask size={self.size} of n={self.parent.n}>"


def _check_closure(Q: LoopTable, mask: np.ndarray) -> None:
    if not mask[0]:
        raise NotSubloop("subloop must contain the identity")
    idx = np.flatnonzero(mask)
    block = np.ix_(idx, idx)
    for label, values in (("product", Q.table[block]), ("left division", Q.ldiv[block]),
                          ("right division", Q.rdiv[block])):
        if not mask[values].all():
            raise NotSubloop(f"subset is not closed under {label}")


# Elementwise invariants

def commutator(Q: LoopTable, x: int, y: int) -> int:
    """The unique c with xy = (yx)c."""
    T = Q.table
    return int(Q.ldiv[T[y, x], T[x, y]])


def associator(Q: LoopTable, x: int, y: int, z: int) -> int:
    """The unique a with (xy)z = (x(yz))a."""
    T = Q.table
    return int(Q.ldiv[T[x, T[y, z]], T[T[x, y], z]])


def _slab_rows(n: int) -> int:
    return max(1, _SLAB_ENTRIES // (n * n))


def associativity_slabs(Q: LoopTable) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (xs, left, right) with left[i, y, z] = (x y) z and right[i, y, z] = x (y z)."""
    T = Q.table
    n = Q.n
    step = _slab_rows(n)
    for start in range(0, n, step):
        xs = np.arange(start, min(n, start + step))
        left = T[T[xs]]
        right = T[xs[:, None, None], T[None, :, :]]
        yield xs, left, right


def mu_count(Q: LoopTable) -> int:
    """Number of triples (a, b, c) with a(bc) != (ab)c."""
    return int(sum(np.count_nonzero(left != right) for _, left, right in associativity_slabs(Q)))


def is_associative(Q: LoopTable) -> bool:
    return all(np.array_equal(left, right) for _, left, right in associativity_slabs(Q))


def associator_values(Q: LoopTable) -> np.ndarray:
    """Mask of elements occurring as some associator [x, y, z]."""
    hit = np.zeros(Q.n, dtype=bool)
    for _, left, right in associativity_slabs(Q):
        hit[Q.ldiv[right, left]] = True
    return hit


def nonassociativity_profile(Q: LoopTable) -> np.ndarray:
    """(n, 3) counts of nonassociating triples with x in the first, middle, last slot."""
    out = np.zeros((Q.n, 3), dtype=np.int64)
    for xs, left, right in associativity_slabs(Q):
        bad = left != right
        out[xs, 0] = bad.sum(axis=(1, 2))
        out[:, 1] += bad.sum(axis=(0, 2))
        out[:, 2] += bad.sum(axis=(0, 1))
    return out


def nuclei(Q: LoopTable) -> Tuple[SubloopMask, SubloopMask, SubloopMask, SubloopMask]:
    """Left, middle and right nucleus and their intersection."""
    n = Q.n
    lam = np.ones(n, dtype=bool)
    mid = np.ones(n, dtype=bool)
    rho = np.ones(n, dtype=bool)
    for xs, left, right in associativity_slabs(Q):
        eq = left == right
        lam[xs] = eq.all(axis=(1, 2))
        mid &= eq.all(axis=(0, 2))
        rho &= eq.all(axis=(0, 1))
    return (SubloopMask(Q, lam), SubloopMask(Q, mid), SubloopMask(Q, rho),
            SubloopMask(Q, lam & mid & rho))


def center(Q: LoopTable, nucleus: Optional[SubloopMask] = None) -> SubloopMask:
    """Nuclear elements commuting with everything."""
    if nucleus is None:
        nucleus = nuclei(Q)[3]
    T = Q.table
    mask = nucleus.members & (T == T.T).all(axis=1)
    Z = SubloopMask(Q, mask)
    if not is_normal(Q, Z):
        raise LoopTableError("center failed the normality check")
    return Z


# Inner mappings and normality

def inner_mapping_images(Q: LoopTable, points: Iterable[int]) -> np.ndarray:
    """Mask of all images of ``points`` under every L(x, y), R(x, y) and T(x)."""
    T, ld, rd = Q.table, Q.ldiv, Q.rdiv
    pts = np.fromiter((int(p) for p in points), dtype=np.intp)
    n = Q.n
    hit = np.zeros(n, dtype=bool)
    if pts.size == 0:
        return hit
    ys = np.arange(n)
    step = max(1, _SLAB_ENTRIES // (n * pts.size))
    for start in range(0, n, step):
        xs = np.arange(start, min(n, start + step))
        x_s = T[np.ix_(xs, pts)]
        y_xs = T[ys[None, :, None], x_s[:, None, :]]
        yx = T[np.ix_(ys, xs)].T
        hit[ld[yx[:, :, None], y_xs]] = True
        s_x = T[np.ix_(pts, xs)].T
        sx_y = T[s_x[:, None, :], ys[None, :, None]]
        xy = T[xs]
        hit[rd[sx_y, xy[:, :, None]]] = True
        hit[rd[x_s, xs[:, None]]] = True
    return hit


def is_normal(Q: LoopTable, S: SubloopMask) -> bool:
    """S is normal iff every inner mapping maps S into S."""
    return not bool((inner_mapping_images(Q, S.elements) & ~S.members).any())


def subloop_generated(Q: LoopTable, seed: Iterable[int], normal: bool = False,
                      inn=None) -> SubloopMask:
    """Smallest (normal) subloop containing ``seed``.

    For normal closures, ``inn`` may be a PermGroup for Inn(Q); its
    generators then replace the full set of inner mappings.
    """
    T = Q.table
    mask = np.zeros(Q.n, dtype=bool)
    mask[0] = True
    mask[np.fromiter((int(s) for s in seed), dtype=np.intp)] = True
    inn_images = None
    if normal and inn is not None:
        inn_images = [g.images for g in inn.generators]
    while True:
        idx = np.flatnonzero(mask)
        grown = mask.copy()
        grown[T[np.ix_(idx, idx)]] = True
        if normal:
            if inn_images is not None:
                for g in inn_images:
                    grown[g[idx]] = True
            else:
                grown |= inner_mapping_images(Q, idx)
        if np.count_nonzero(grown) == idx.size:
            return SubloopMask(Q, mask)
        mask = grown


# Quotients

def coset_partition(Q: LoopTable, S: SubloopMask) -> Tuple[np.ndarray, np.ndarray]:
    """Label every element by its left coset xS; cosets are numbered by minimal element."""
    T = Q.table
    idx = S.elements
    labels = np.full(Q.n, -1, dtype=np.int32)
    reps: List[int] = []
    for x in range(Q.n):
        if labels[x] >= 0:
            continue
        coset = T[x, idx]
        if (labels[coset] >= 0).any():
            raise NotNormal(f"left cosets of the subloop overlap at element {x}")
        labels[coset] = len(reps)
        reps.append(x)
    return labels, np.asarray(reps, dtype=np.int32)


def quotient_with_labels(Q: LoopTable, S: SubloopMask) -> Tuple[LoopTable, np.ndarray]:
    labels, reps = coset_partition(Q, S)
    table = labels[Q.table[np.ix_(reps, reps)]]
    if not np.array_equal(labels[Q.table], table[labels[:, None], labels[None, :]]):
        raise NotNormal("coset product is not well defined")
    try:
        F = validate_table(table)
    except LoopTableError as e:
        raise NotNormal(f"coset table is not a loop: {e}") from e
    return F, labels


def quotient(Q: LoopTable, S: SubloopMask) -> LoopTable:
    return quotient_with_labels(Q, S)[0]


def subloop_table(Q: LoopTable, S: SubloopMask) -> LoopTable:
    """The multiplication table of S itself, elements renumbered in increasing order."""
    idx = S.elements
    pos = np.full(Q.n, -1, dtype=np.int32)
    pos[idx] = np.arange(idx.size, dtype=np.int32)
    return validate_table(pos[Q.table[np.ix_(idx, idx)]])


def associator_subloop(Q: LoopTable) -> SubloopMask:
    """Smallest normal subloop with associative quotient."""
    S = subloop_generated(Q, np.flatnonzero(associator_values(Q)), normal=True)
    while True:
        F, labels = quotient_with_labels(Q, S)
        extra = associator_values(F)
        extra[0] = False
        if not extra.any():
            return S
        preimage = np.isin(labels, np.flatnonzero(extra))
        S = subloop_generated(Q, np.flatnonzero(S.members | preimage), normal=True)


def upper_central_series(Q: LoopTable) -> Optional[List[int]]:
    """Orders of Q, Q/Z(Q), (Q/Z(Q))/Z(...), ... down to 1; None if it stalls."""
    orders = [Q.n]
    current = Q
    while current.n > 1:
        Z = center(current)
        if Z.size == 1:
            return None
        current = quotient(current, Z)
        orders.append(current.n)
    return orders


def nilpotency_class(Q: LoopTable) -> Optional[int]:
    series = upper_central_series(Q)
    return None if series is None else len(series) - 1


def is_power_associative(Q: LoopTable) -> bool:
    verdicts = {}
    for x in range(1, Q.n):
        S = subloop_generated(Q, [x])
        key = S.bitset
        if key not in verdicts:
            verdicts[key] = is_associative(subloop_table(Q, S))
        if not verdicts[key]:
            return False
    return True


def is_elementary_abelian_2_subloop(Q: LoopTable, S: SubloopMask) -> bool:
    idx = S.elements
    sub = Q.table[np.ix_(idx, idx)]
    return bool(np.array_equal(sub, sub.T) and (np.diagonal(sub) == 0).all()
                and is_associative(subloop_table(Q, S)))


def analyze(Q: LoopTable, mlt: bool = False) -> AnalysisReport:
    """Collect the structural invariants of Q; Mlt/Inn only when ``mlt`` is set."""
    lam, mid, rho, nuc = nuclei(Q)
    Z = center(Q, nucleus=nuc)
    A = associator_subloop(Q)
    count = mu_count(Q)
    fields = dict(
        order=Q.n,
        is_associative=count == 0,
        left_nucleus_size=lam.size,
        middle_nucleus_size=mid.size,
        right_nucleus_size=rho.size,
        nucleus_size=nuc.size,
        center_size=Z.size,
        associator_subloop_size=A.size,
        nilpotency_class=nilpotency_class(Q),
        mu_count=count,
        power_associative=is_power_associative(Q),
        nuclei_cover_loop=bool((lam.members | mid.members | rho.members).all()),
        nucleus_elementary_abelian_2=is_elementary_abelian_2_subloop(Q, nuc),
        center_is_associator_subloop=Z == A,
    )
    if mlt:
        from .perm_group import (inner_mapping_group, is_abelian, is_elementary_abelian_2,
                                 multiplication_group)
        M = multiplication_group(Q)
        inn = inner_mapping_group(Q, mlt=M)
        fields.update(mlt_order=M.order, inn_order=inn.order, inn_abelian=is_abelian(inn),
                      inn_elementary_abelian_2=is_elementary_abelian_2(inn))
    report = AnalysisReport(**fields)
    logger.info("Loop analyzed", order=Q.n, name=Q.name, mu_count=count,
                nilpotency_class=report.nilpotency_class, mlt=mlt)
    return report


# LOOPTAB v1

def format_looptab(Q: LoopTable) -> str:
    lines = [LOOPTAB_HEADER, f"n={Q.n}"]
    lines.extend(" ".join(map(str, row)) for row in Q.table.tolist())
    return "\n".join(lines) + "\n"


def parse_looptab(text: str, name: Optional[str] = None) -> LoopTable:
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or lines[0] != LOOPTAB_HEADER:
        raise BadShape(f"missing {LOOPTAB_HEADER!r} header")
    if len(lines) < 2:
        raise BadShape("missing order line")
    match = re.fullmatch(r"n=(\d+)", lines[1])
    if match is None:
        raise BadShape(f"bad order line {lines[1]!r}")
    n = int(match.group(1))
    limit = get_settings().max_order
    if n > limit:
        raise BadShape(f"order {n} exceeds the configured maximum {limit}")
    rows = lines[2:]
    if len(rows) != n:
        raise BadShape(f"expected {n} rows, found {len(rows)}")
    try:
        data = [[int(token) for token in row.split()] for row in rows]
    except ValueError as e:
        raise BadShape(f"non-integer entry: {e}") from e
    if any(len(row) != n for row in data):
        raise BadShape(f"every row must have {n} entries")
    return validate_table(np.array(data, dtype=np.int64), name=name)


def read_looptab(path: PathLike) -> LoopTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise BadShape(f"{path} is not a LOOPTAB text file: {e}") from e
    return parse_looptab(text, name=path.stem)


def write_looptab(Q: LoopTable, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(format_looptab(Q))
    return path
