"""
Permutation groups via a deterministic incremental Schreier-Sims algorithm.

Permutations act on 0..n-1 and are stored as image arrays. Products read
left to right: ``p * q`` applies p first, then q, so as arrays
``(p * q).images == q.images[p.images]``.

The stabilizer chain keeps, per base point, the strong generators fixing
all earlier base points and a transversal dict ``point -> (u, u^-1)`` with
``u`` mapping the base point to ``point``. Transversals are only ever
extended, never rebuilt, so Schreier generators that were already sifted
stay valid and are skipped on later passes.
"""

import math
from collections import Counter, deque
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import sympy.combinatorics as comb

from .loop_core import LoopTable
from .shared.errors import DegreeMismatch, NotBijection, PermGroupError, TooLarge
from .shared.logging_config import get_logger
from .shared.models import GroupFingerprint, PermGroupExport
from .shared.settings import get_settings

logger = get_logger(__name__)

_BLOCK_ROWS = 1 << 15


def _invert(images: np.ndarray) -> np.ndarray:
    inv = np.empty_like(images)
    inv[images] = np.arange(images.size, dtype=images.dtype)
    return inv


def _power(images: np.ndarray, exponent: int) -> np.ndarray:
    result = np.arange(images.size, dtype=images.dtype)
    base = images
    while exponent:
        if exponent & 1:
            result = base[result]
        base = base[base]
        exponent >>= 1
    return result


def cycle_type(images: Sequence[int]) -> Tuple[int, ...]:
    """Cycle lengths, fixed points included, in decreasing order."""
    images = [int(i) for i in images]
    seen = [False] * len(images)
    lengths = []
    for start in range(len(images)):
        if seen[start]:
            continue
        length = 0
        point = start
        while not seen[point]:
            seen[point] = True
            point = images[point]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


class Permutation:
    """An immutable permutation of 0..degree-1."""

    __slots__ = ("_images", "_key")

    def __init__(self, images: Union[Sequence[int], np.ndarray], check: bool = True):
        arr = np.array(images, dtype=np.intp)
        if check and (arr.ndim != 1
                      or not np.array_equal(np.sort(arr), np.arange(arr.size))):
            raise NotBijection(f"not a permutation of 0..{arr.size - 1}")
        arr.setflags(write=False)
        self._images = arr
        self._key = None

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(np.arange(degree), check=False)

    @property
    def images(self) -> np.ndarray:
        return self._images

    @property
    def degree(self) -> int:
        return int(self._images.size)

    def __call__(self, point: int) -> int:
        return int(self._images[point])

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise DegreeMismatch("cannot compose permutations of different degree")
        return Permutation(other._images[self._images], check=False)

    def inverse(self) -> "Permutation":
        return Permutation(_invert(self._images), check=False)

    def __pow__(self, exponent: int) -> "Permutation":
        images = self._images if exponent >= 0 else _invert(self._images)
        return Permutation(_power(images, abs(exponent)), check=False)

    @property
    def is_identity(self) -> bool:
        return bool((self._images == np.arange(self.degree)).all())

    def order(self) -> int:
        return math.lcm(*cycle_type(self._images)) if self.degree else 1

    def cycle_type(self) -> Tuple[int, ...]:
        return cycle_type(self._images)

    def commutes_with(self, other: "Permutation") -> bool:
        return bool(np.array_equal(other._images[self._images], self._images[other._images]))

    def to_list(self) -> List[int]:
        return self._images.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return bool(np.array_equal(self._images, other._images))

    def __hash__(self) -> int:
        if self._key is None:
            self._key = hash(self._images.tobytes())
        return self._key

    def __repr__(self) -> str:
        cycles = []
        seen = set()
        for start in range(self.degree):
            if start in seen or self._images[start] == start:
                continue
            cycle = [start]
            seen.add(start)
            point = int(self._images[start])
            while point != start:
                seen.add(point)
                cycle.append(point)
                point = int(self._images[point])
            cycles.append("(" + " ".join(map(str, cycle)) + ")")
        return "".join(cycles) or "()"


class StabilizerChain:
    """Base, strong generators and transversals, grown one generator at a time."""

    def __init__(self, degree: int, base_prefix: Sequence[int] = ()):
        self.degree = degree
        self.base: List[int] = []
        self.level_generators: List[List[np.ndarray]] = []
        self.transversals: List[Dict[int, Tuple[np.ndarray, np.ndarray]]] = []
        self._verified: List[Set[Tuple[int, int]]] = []
        self._identity = np.arange(degree, dtype=np.intp)
        self._identity.setflags(write=False)
        for point in base_prefix:
            if 0 <= point < degree:
                self._append_level(int(point))

    @classmethod
    def tail_of(cls, chain: "StabilizerChain", level: int) -> "StabilizerChain":
        """The chain of the pointwise stabilizer of the first ``level`` base points."""
        tail = cls(chain.degree)
        tail.base = list(chain.base[level:])
        tail.level_generators = [list(gens) for gens in chain.level_generators[level:]]
        tail.transversals = [dict(t) for t in chain.transversals[level:]]
        tail._verified = [set(v) for v in chain._verified[level:]]
        return tail

    def _append_level(self, point: int) -> None:
        self.base.append(point)
        self.level_generators.append([])
        self.transversals.append({point: (self._identity, self._identity)})
        self._verified.append(set())

    def _first_moved(self, g: np.ndarray) -> int:
        return int(np.flatnonzero(g != self._identity)[0])

    def _extend_orbit(self, level: int) -> None:
        gens = self.level_generators[level]
        transversal = self.transversals[level]
        queue = deque(transversal.keys())
        while queue:
            point = queue.popleft()
            u = transversal[point][0]
            for s in gens:
                image = int(s[point])
                if image not in transversal:
                    w = s[u]
                    w.setflags(write=False)
                    transversal[image] = (w, _invert(w))
                    queue.append(image)

    def _insert(self, h: np.ndarray, first: int, last: int) -> None:
        h = np.array(h, dtype=np.intp)
        h.setflags(write=False)
        for level in range(first, last + 1):
            self.level_generators[level].append(h)
            self._extend_orbit(level)

    def strip(self, g: np.ndarray, start: int = 0) -> Tuple[np.ndarray, int]:
        """Sift g from level ``start``; returns the residue and the level it stopped at."""
        for level in range(start, len(self.base)):
            entry = self.transversals[level].get(int(g[self.base[level]]))
            if entry is None:
                return g, level
            g = entry[1][g]
        return g, len(self.base)

    def contains(self, g: np.ndarray) -> bool:
        h, level = self.strip(g)
        return level == len(self.base) and bool(np.array_equal(h, self._identity))

    def add(self, g: np.ndarray) -> bool:
        """Adjoin g; False if it was already a member."""
        h, level = self.strip(g)
        if level == len(self.base):
            if np.array_equal(h, self._identity):
                return False
            self._append_level(self._first_moved(h))
        self._insert(h, 0, level)
        self._complete(level)
        return True

    def _complete(self, level: int) -> None:
        i = level
        while i >= 0:
            restart = None
            transversal = self.transversals[i]
            gens = self.level_generators[i]
            done = self._verified[i]
            for beta, (u_beta, _) in list(transversal.items()):
                for k, s in enumerate(gens):
                    if (beta, k) in done:
                        continue
                    schreier = transversal[int(s[beta])][1][s[u_beta]]
                    h, j = self.strip(schreier, i + 1)
                    if j == len(self.base):
                        if np.array_equal(h, self._identity):
                            done.add((beta, k))
                            continue
                        self._append_level(self._first_moved(h))
                    self._insert(h, i + 1, j)
                    restart = j
                    break
                if restart is not None:
                    break
            i = i - 1 if restart is None else restart

    def order(self) -> int:
        return math.prod(len(t) for t in self.transversals)


class PermGroup:
    """A permutation group with a verified base and strong generating set."""

    def __init__(self, chain: StabilizerChain, generators: Sequence[np.ndarray]):
        self._chain = chain
        self._generators = [Permutation(g, check=False) for g in generators]
        self._sympy: Optional[comb.PermutationGroup] = None

    @property
    def degree(self) -> int:
        return self._chain.degree

    @property
    def generators(self) -> List[Permutation]:
        return list(self._generators)

    @property
    def base(self) -> Tuple[int, ...]:
        return tuple(self._chain.base)

    @property
    def strong_generators(self) -> List[List[Permutation]]:
        return [[Permutation(g, check=False) for g in gens]
                for gens in self._chain.level_generators]

    @property
    def strong_generating_set(self) -> List[np.ndarray]:
        """Distinct strong generators over all levels, in insertion order."""
        seen = set()
        out = []
        for gens in self._chain.level_generators:
            for g in gens:
                key = g.tobytes()
                if key not in seen:
                    seen.add(key)
                    out.append(g)
        return out

    @property
    def orbit_sizes(self) -> List[int]:
        return [len(t) for t in self._chain.transversals]

    @property
    def order(self) -> int:
        return self._chain.order()

    def contains(self, g: Union[Permutation, Sequence[int]]) -> bool:
        images = g.images if isinstance(g, Permutation) else Permutation(g).images
        if images.size != self.degree:
            raise DegreeMismatch(f"degree {images.size} != group degree {self.degree}")
        return self._chain.contains(images)

    def stabilizer(self, level: int = 1) -> "PermGroup":
        """Pointwise stabilizer of the first ``level`` base points, read off the chain."""
        tail = StabilizerChain.tail_of(self._chain, level)
        group = PermGroup(tail, [])
        group._generators = [Permutation(g, check=False) for g in group.strong_generating_set]
        return group

    def element_blocks(self, max_rows: int = _BLOCK_ROWS) -> Iterator[np.ndarray]:
        """Enumerate all elements as (rows, degree) arrays of at most ``max_rows`` rows."""
        chain = self._chain
        depth = len(chain.base)
        sizes = [len(t) for t in chain.transversals]
        suffix = [math.prod(sizes[level:]) for level in range(depth + 1)]

        def block_from(level: int) -> np.ndarray:
            elements = chain._identity[None, :].astype(np.int16)
            for lvl in range(depth - 1, level - 1, -1):
                us = [u.astype(np.int16) for u, _ in chain.transversals[lvl].values()]
                elements = np.concatenate([u[elements] for u in us])
            return elements

        def walk(level: int) -> Iterator[np.ndarray]:
            if suffix[level] <= max_rows:
                yield block_from(level)
                return
            for u, _ in chain.transversals[level].values():
                u16 = u.astype(np.int16)
                for block in walk(level + 1):
                    yield u16[block]

        if self.degree == 0:
            return iter(())
        return walk(0)

    def elements(self, limit: Optional[int] = None) -> np.ndarray:
        limit = limit or get_settings().histogram_limit
        if self.order > limit:
            raise TooLarge(f"group of order {self.order} exceeds enumeration limit {limit}")
        return np.concatenate(list(self.element_blocks()))

    def to_sympy(self) -> comb.PermutationGroup:
        """The same group as a SymPy PermutationGroup, built once and cached."""
        if self._sympy is None:
            gens = self._generators or [Permutation(np.arange(self.degree), check=False)]
            self._sympy = comb.PermutationGroup(_sympy_perms(g.images for g in gens))
        return self._sympy

    @staticmethod
    def from_sympy(H: comb.PermutationGroup, degree: int) -> "PermGroup":
        gens = []
        for p in H.generators:
            images = list(p.array_form)
            gens.append(images + list(range(len(images), degree)))
        return bsgs(gens, degree=degree)

    def export(self) -> PermGroupExport:
        return PermGroupExport(degree=self.degree,
                               generators=[g.to_list() for g in self._generators],
                               base=list(self.base), order=str(self.order))

    def __repr__(self) -> str:
        return f"<PermGroup degree={self.degree} order={self.order}>"


def bsgs(gens: Iterable[Union[Permutation, Sequence[int]]], degree: Optional[int] = None,
         base_prefix: Sequence[int] = ()) -> PermGroup:
    """Build a verified stabilizer chain for the group generated by ``gens``."""
    arrays = [g.images if isinstance(g, Permutation) else Permutation(g).images for g in gens]
    degrees = {int(a.size) for a in arrays}
    if degree is not None:
        degrees.add(degree)
    if len(degrees) > 1:
        raise DegreeMismatch(f"generators have degrees {sorted(degrees)}")
    chain = StabilizerChain(degrees.pop() if degrees else 0, base_prefix)
    kept = []
    for a in arrays:
        if chain.add(a):
            kept.append(a)
    if not all(chain.contains(a) for a in arrays):
        raise PermGroupError("stabilizer chain lost a generator")
    logger.debug("Stabilizer chain built", degree=chain.degree, generators=len(arrays),
                 essential=len(kept), base_length=len(chain.base), order=chain.order())
    return PermGroup(chain, arrays)


# Loop groups

def _translations(Q: LoopTable) -> List[np.ndarray]:
    T = Q.table.astype(np.intp)
    return [T[x].copy() for x in range(1, Q.n)] + [T[:, x].copy() for x in range(1, Q.n)]


def multiplication_group(Q: LoopTable) -> PermGroup:
    """Mlt(Q), generated by all left and right translations, with base starting at 0."""
    M = bsgs(_translations(Q), degree=Q.n, base_prefix=(0,))
    logger.info("Multiplication group computed", order=Q.n, mlt_order=M.order)
    return M


def inner_mapping_group(Q: LoopTable, mlt: Optional[PermGroup] = None) -> PermGroup:
    """Inn(Q) as the stabilizer of 0 in Mlt(Q)."""
    M = mlt if mlt is not None else multiplication_group(Q)
    if not M.base or M.base[0] != 0:
        M = bsgs(M.generators, degree=Q.n, base_prefix=(0,))
    inn = M.stabilizer(1)
    if M.order != Q.n * inn.order:
        raise PermGroupError("multiplication group is not transitive")
    return inn


def inner_mapping_generators(Q: LoopTable, convention: str = "standard",
                             kinds: str = "LRT") -> np.ndarray:
    """All inner mappings L(x, y), R(x, y), T(x) as rows of an array.

    ``standard``: L(x,y) = L_{yx}^{-1}L_yL_x, R(x,y) = R_{xy}^{-1}R_yR_x, T(x) = R_x^{-1}L_x.
    ``modified``: L(x,y) = L_y^{-1}L_x^{-1}L_{xy}, R as above, T(x) = L_x^{-1}R_x.
    """
    if convention not in ("standard", "modified"):
        raise ValueError(f"unknown convention {convention!r}")
    T = Q.table.astype(np.intp)
    ld = Q.ldiv.astype(np.intp)
    rd = Q.rdiv.astype(np.intp)
    n = Q.n
    ys = np.arange(n)
    maps = []
    for x in range(n):
        if "L" in kinds:
            if convention == "standard":
                maps.append(ld[T[ys, x][:, None], T[ys[:, None], T[x][None, :]]])
            else:
                maps.append(ld[ys[:, None], ld[x][T[T[x, ys][:, None], ys[None, :]]]])
        if "R" in kinds:
            maps.append(rd[T[T[:, x][None, :], ys[:, None]], T[x, ys][:, None]])
        if "T" in kinds:
            if convention == "standard":
                maps.append(rd[T[x], x][None, :])
            else:
                maps.append(ld[x][T[:, x]][None, :])
    return np.unique(np.concatenate(maps), axis=0)


def lr_subgroup(Q: LoopTable, convention: str = "modified") -> PermGroup:
    """The group generated by all L(x, y) and R(x, y)."""
    return bsgs(list(inner_mapping_generators(Q, convention, kinds="LR")), degree=Q.n)


def is_abelian(G: PermGroup) -> bool:
    gens = G.strong_generating_set
    return all(np.array_equal(b[a], a[b]) for i, a in enumerate(gens) for b in gens[i + 1:])


def is_elementary_abelian_2(G: PermGroup) -> bool:
    return is_abelian(G) and all(np.array_equal(g[g], np.arange(G.degree)) for g in G.strong_generating_set)


# Subgroups and invariants

def _sympy_perms(gens: Iterable[np.ndarray]) -> List[comb.Permutation]:
    return [comb.Permutation(np.asarray(g).tolist()) for g in gens]


def normal_closure(G: PermGroup, gens: Iterable[np.ndarray]) -> PermGroup:
    """Smallest subgroup containing ``gens`` and normalized by G."""
    perms = _sympy_perms(gens)
    if not perms:
        return bsgs([], degree=G.degree)
    return PermGroup.from_sympy(G.to_sympy().normal_closure(perms), G.degree)


def derived_subgroup(G: PermGroup) -> PermGroup:
    return PermGroup.from_sympy(G.to_sympy().derived_subgroup(), G.degree)


def derived_series(G: PermGroup) -> List[PermGroup]:
    """G, G', G'', ... down to the first repeated term."""
    return [PermGroup.from_sympy(H, G.degree) for H in G.to_sympy().derived_series()]


def abelian_invariants(G: PermGroup) -> List[int]:
    """Elementary divisors of G/G' as prime powers, sorted."""
    return sorted(int(v) for v in G.to_sympy().abelian_invariants())


def center_order(G: PermGroup) -> int:
    return int(G.to_sympy().center().order())


def element_order_histogram(G: PermGroup, limit: Optional[int] = None) -> Dict[int, int]:
    limit = limit or get_settings().histogram_limit
    if G.order > limit:
        raise TooLarge(f"group of order {G.order} exceeds enumeration limit {limit}")
    counts: Counter = Counter()
    if G.degree == 0:
        return {1: 1}
    identity = np.arange(G.degree)
    for block in G.element_blocks():
        rows = block.astype(np.intp)
        power = rows.copy()
        k = 1
        while rows.shape[0]:
            done = (power == identity).all(axis=1)
            counts[k] += int(done.sum())
            rows, power = rows[~done], power[~done]
            power = np.take_along_axis(rows, power, axis=1)
            k += 1
    return dict(sorted(counts.items()))


def fingerprint(G: PermGroup, histogram_limit: Optional[int] = None) -> GroupFingerprint:
    """Isomorphism invariants of G; the histogram is skipped above the limit."""
    limit = histogram_limit or get_settings().histogram_limit
    series = derived_series(G)
    histogram = None
    skipped = G.order > limit
    if skipped:
        logger.warning("Element order histogram skipped", order=G.order, limit=limit)
    else:
        histogram = element_order_histogram(G, limit)
    return GroupFingerprint(
        order=G.order,
        center_order=center_order(G),
        derived_series_orders=[H.order for H in series],
        abelian_invariants=abelian_invariants(G),
        element_order_histogram=histogram,
        histogram_skipped=skipped,
    )
