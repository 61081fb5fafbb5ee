"""
Loop isomorphism by invariant refinement and generator backtracking.

Every element gets a color from isomorphism-invariant data (translation cycle
types, nucleus and center membership, centralizer size, square roots,
commutator counts, nonassociativity counts). Colors are then refined jointly
on both loops: an element's new color is its old color, the color of its
square, and the sorted multisets of (color(y), color(xy)), (color(y),
color(yx)), (color(y), color(y \\ x)) and (color(y), color([x, y])).

The search maps a small generating set of the first loop one element at a
time. Each generator is taken from the smallest color class not yet covered,
and only images of the same color are tried. A partial map is pushed through
all products of mapped elements, so it is defined on the whole generated
subloop or rejected on the first conflict; the mapped pairs are then
individualized and the coloring refined again. Every bijection is checked on
all n^2 products before it is returned.
"""

import hashlib
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .loop_core import LoopTable, center, mu_count, nonassociativity_profile, nuclei
from .perm_group import cycle_type
from .shared.errors import SearchLimitExceeded
from .shared.logging_config import get_logger
from .shared.settings import get_settings

logger = get_logger(__name__)

# per-element signatures and global invariants of one loop
Profile = Tuple[List[Tuple], Tuple[int, ...]]


def _encode_rows(rows: Sequence[Tuple]) -> np.ndarray:
    """Rank distinct tuples in sorted order."""
    keys = sorted(set(rows))
    rank = {key: i for i, key in enumerate(keys)}
    return np.array([rank[row] for row in rows], dtype=np.int64)


def commutator_table(Q: LoopTable) -> np.ndarray:
    """C[x, y] = [x, y], the unique c with xy = (yx)c."""
    T = Q.table
    return Q.ldiv[T.T, T]


def element_signatures(Q: LoopTable) -> List[Tuple]:
    """Per-element invariant tuples."""
    T = Q.table
    n = Q.n
    lam, mid, rho, nuc = nuclei(Q)
    Z = center(Q, nucleus=nuc)
    centralizer = (T == T.T).sum(axis=1)
    profile = nonassociativity_profile(Q)
    squares = np.diagonal(T)
    square_roots = np.bincount(squares, minlength=n)
    C = commutator_table(Q)
    as_commutator = np.bincount(C.reshape(-1), minlength=n)
    signatures = []
    for x in range(n):
        signatures.append((
            cycle_type(T[x]), cycle_type(T[:, x]),
            bool(lam.members[x]), bool(mid.members[x]), bool(rho.members[x]),
            bool(nuc.members[x]), bool(Z.members[x]),
            int(centralizer[x]), tuple(int(v) for v in profile[x]), bool(squares[x] == 0),
            int(square_roots[x]), int(as_commutator[x]), len(np.unique(C[x])),
        ))
    return signatures


def global_invariants(Q: LoopTable) -> Tuple[int, ...]:
    lam, mid, rho, nuc = nuclei(Q)
    T = Q.table
    return (Q.n, lam.size, mid.size, rho.size, nuc.size, center(Q, nucleus=nuc).size,
            mu_count(Q), int((T == T.T).sum()), len(np.unique(np.diagonal(T))),
            len(np.unique(commutator_table(Q))))


def loop_profile(Q: LoopTable) -> Profile:
    return element_signatures(Q), global_invariants(Q)


class _Refiner:
    """Joint color refinement over one or two loops of the same order."""

    def __init__(self, loops: Sequence[LoopTable]):
        self.n = loops[0].n
        self.relations = []
        for Q in loops:
            T = Q.table.astype(np.intp)
            self.relations.append((np.diagonal(T).copy(), T, T.T.copy(),
                                   Q.ldiv.T.astype(np.intp), commutator_table(Q).astype(np.intp)))

    def _rows(self, colors: np.ndarray, k: int) -> np.ndarray:
        n = self.n
        blocks = []
        for idx, (squares, *tables) in enumerate(self.relations):
            c = colors[idx * n:(idx + 1) * n]
            parts = [c[:, None], c[squares][:, None]]
            parts.extend(np.sort(c[None, :] * k + c[R], axis=1) for R in tables)
            blocks.append(np.concatenate(parts, axis=1))
        return np.concatenate(blocks)

    def refine(self, colors: np.ndarray) -> np.ndarray:
        count = len(np.unique(colors))
        for _ in range(self.n):
            k = int(colors.max()) + 1
            _, inverse = np.unique(self._rows(colors, k), axis=0, return_inverse=True)
            colors = inverse.reshape(-1).astype(np.int64)
            new_count = int(colors.max()) + 1
            if new_count == count:
                break
            count = new_count
        return colors


def refined_colors(Q: LoopTable, signatures: Optional[List[Tuple]] = None) -> np.ndarray:
    if signatures is None:
        signatures = element_signatures(Q)
    return _Refiner([Q]).refine(_encode_rows(signatures))


def canonical_fingerprint(Q: LoopTable, profile: Optional[Profile] = None) -> str:
    """Isomorphism-invariant digest; equal digests still need are_isomorphic."""
    signatures, invariants = profile if profile is not None else loop_profile(Q)
    colors = refined_colors(Q, signatures)
    T = Q.table
    triples = np.stack([np.repeat(colors, Q.n), np.tile(colors, Q.n), colors[T].reshape(-1)],
                       axis=1)
    rows, counts = np.unique(triples, axis=0, return_counts=True)
    # colors are ranks of sorted rows, so the signature of each color is canonical
    order = np.unique(colors, return_index=True)[1]
    digest = hashlib.sha256()
    digest.update(repr(invariants).encode())
    digest.update(repr([signatures[i] for i in order]).encode())
    digest.update(np.bincount(colors).astype(np.int64).tobytes())
    digest.update(rows.astype(np.int64).tobytes())
    digest.update(counts.astype(np.int64).tobytes())
    return digest.hexdigest()


def _is_isomorphism(Q1: LoopTable, Q2: LoopTable, m: np.ndarray) -> bool:
    return bool(np.array_equal(m[Q1.table], Q2.table[m[:, None], m[None, :]]))


class _GeneratorSearch:
    """Backtracking over generator images with product propagation."""

    def __init__(self, Q1: LoopTable, Q2: LoopTable, refiner: _Refiner, limit: int):
        self.Q1, self.Q2 = Q1, Q2
        self.T1 = Q1.table.astype(np.intp)
        self.T2 = Q2.table.astype(np.intp)
        self.n = Q1.n
        self.refiner = refiner
        self.limit = limit
        self.nodes = 0

    def propagate(self, m: np.ndarray) -> Optional[np.ndarray]:
        """Close the partial map under products; None on a conflict or collision."""
        while True:
            known = np.flatnonzero(m >= 0)
            products = self.T1[np.ix_(known, known)].reshape(-1)
            images = self.T2[np.ix_(m[known], m[known])].reshape(-1)
            current = m[products]
            defined = current >= 0
            if np.any(current[defined] != images[defined]):
                return None
            fresh, values = products[~defined], images[~defined]
            if fresh.size == 0:
                return m
            pairs = np.unique(np.stack([fresh, values], axis=1), axis=0)
            if len(np.unique(pairs[:, 0])) != len(pairs):
                return None
            m[pairs[:, 0]] = pairs[:, 1]
            mapped = m[m >= 0]
            if len(np.unique(mapped)) != mapped.size:
                return None

    def balanced(self, c: np.ndarray) -> bool:
        n = self.n
        size = int(c.max()) + 1
        return bool(np.array_equal(np.bincount(c[:n], minlength=size),
                                   np.bincount(c[n:], minlength=size)))

    def search(self, colors: np.ndarray, m: np.ndarray) -> Optional[np.ndarray]:
        self.nodes += 1
        if self.nodes > self.limit:
            raise SearchLimitExceeded(f"isomorphism search exceeded {self.limit} nodes")
        if not self.balanced(colors):
            return None
        n = self.n
        c1, c2 = colors[:n], colors[n:]
        sizes = np.bincount(c1)
        if (sizes <= 1).all():
            full = np.empty(n, dtype=np.intp)
            full[np.argsort(c1)] = np.argsort(c2)
            return full if _is_isomorphism(self.Q1, self.Q2, full) else None
        unknown = np.flatnonzero(m < 0)
        if unknown.size == 0:
            return m if _is_isomorphism(self.Q1, self.Q2, m) else None

        x = int(unknown[np.argmin(sizes[c1[unknown]])])
        taken = np.zeros(n, dtype=bool)
        taken[m[m >= 0]] = True
        for y in np.flatnonzero((c2 == c1[x]) & ~taken):
            trial = m.copy()
            trial[x] = y
            extended = self.propagate(trial)
            if extended is None:
                continue
            new = np.flatnonzero((extended >= 0) & (m < 0))
            if np.any(c1[new] != c2[extended[new]]):
                continue
            individualized = colors.copy()
            labels = int(colors.max()) + 1 + np.arange(new.size)
            individualized[new] = labels
            individualized[n + extended[new]] = labels
            found = self.search(self.refiner.refine(individualized), extended)
            if found is not None:
                return found
        return None


def are_isomorphic(Q1: LoopTable, Q2: LoopTable, node_limit: Optional[int] = None,
                   profiles: Optional[Tuple[Profile, Profile]] = None) -> Optional[np.ndarray]:
    """A bijection m with m(xy) = m(x)m(y), or None if the loops are not isomorphic."""
    if Q1.n != Q2.n:
        return None
    p1, p2 = profiles if profiles is not None else (loop_profile(Q1), loop_profile(Q2))
    if p1[1] != p2[1]:
        return None
    n = Q1.n
    refiner = _Refiner([Q1, Q2])
    colors = refiner.refine(_encode_rows(p1[0] + p2[0]))
    search = _GeneratorSearch(Q1, Q2, refiner, node_limit or get_settings().iso_node_limit)
    start = np.full(n, -1, dtype=np.intp)
    start[0] = 0
    m = search.search(colors, start)
    logger.debug("Isomorphism search finished", order=n, nodes=search.nodes,
                 found=m is not None)
    return m


def _digest_with_profile(Q: LoopTable) -> Tuple[str, Profile]:
    profile = loop_profile(Q)
    return canonical_fingerprint(Q, profile), profile


def isomorphism_classes(tables: Sequence[LoopTable], workers: int = 1,
                        digests: Optional[Sequence[str]] = None
                        ) -> Tuple[List[List[int]], List[str]]:
    """Partition ``tables`` into isomorphism classes.

    Tables are grouped by digest first and then confirmed by search against
    each class representative. Classes are sorted by their smallest index.
    """
    profiles: Dict[int, Profile] = {}
    if digests is None:
        if workers > 1:
            results = Parallel(n_jobs=workers)(delayed(_digest_with_profile)(Q) for Q in tables)
        else:
            results = [_digest_with_profile(Q) for Q in tables]
        digests = [d for d, _ in results]
        profiles = {i: p for i, (_, p) in enumerate(results)}

    def profile(i: int) -> Profile:
        if i not in profiles:
            profiles[i] = loop_profile(tables[i])
        return profiles[i]

    buckets: Dict[str, List[int]] = defaultdict(list)
    for i, d in enumerate(digests):
        buckets[d].append(i)
    classes: List[List[int]] = []
    for members in buckets.values():
        local: List[List[int]] = []
        for i in members:
            for cls in local:
                pair = (profile(cls[0]), profile(i))
                if are_isomorphic(tables[cls[0]], tables[i], profiles=pair) is not None:
                    cls.append(i)
                    break
            else:
                local.append([i])
        classes.extend(local)
    classes.sort(key=lambda cls: cls[0])
    logger.info("Isomorphism classes computed", tables=len(tables), buckets=len(buckets),
                classes=len(classes))
    return classes, list(digests)
