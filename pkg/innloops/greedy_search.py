"""
Greedy descent in the number of nonassociating triples by block sign flips.

The table is split into blocks by the cosets of a normal subloop N, numbered
by their smallest element so the identity coset comes first. One move picks
two non-identity cosets i < j and multiplies every entry of the blocks (i, j)
and (j, i) on the right by a central involution h in N. Each round evaluates
every move, takes the one with the fewest nonassociating triples (ties go to
the smallest pair) and stops when no move strictly improves.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from .loop_core import (LoopTable, SubloopMask, center, coset_partition, is_normal, mu_count,
                        validate_table)
from .shared.errors import BadCosetStructure, NotCentralInvolution
from .shared.logging_config import get_logger
from .shared.models import GreedyHistory, GreedyStep

logger = get_logger(__name__)


def flip_blocks(table: np.ndarray, labels: np.ndarray, h: int, i: int, j: int) -> np.ndarray:
    """Copy of ``table`` with blocks (i, j) and (j, i) multiplied on the right by h."""
    rows_i, rows_j = labels == i, labels == j
    block = (rows_i[:, None] & rows_j[None, :]) | (rows_j[:, None] & rows_i[None, :])
    return np.where(block, table[table, h], table)


def _candidate_count(table: np.ndarray, labels: np.ndarray, h: int, i: int, j: int) -> int:
    return mu_count(LoopTable(flip_blocks(table, labels, h, i, j)))


def resolve_flip_element(Q: LoopTable, N: SubloopMask, h: Union[int, str] = "auto") -> int:
    """The central involution used for flips; ``"auto"`` picks the only one in N."""
    Z = center(Q)
    T = Q.table
    if h == "auto":
        candidates = [int(x) for x in N.elements
                      if x != 0 and x in Z and T[x, x] == 0]
        if not candidates:
            raise NotCentralInvolution("N contains no nontrivial central involution")
        if len(candidates) > 1:
            raise BadCosetStructure(f"N contains {len(candidates)} central involutions; "
                                    "choose one explicitly")
        return candidates[0]
    h = int(h)
    if not 0 < h < Q.n or h not in Z or T[h, h] != 0:
        raise NotCentralInvolution(f"element {h} is not a nontrivial central involution")
    if h not in N:
        raise BadCosetStructure(f"flip element {h} does not lie in the subloop")
    return h


@dataclass
class GreedyState:
    """Current table, coset labels, flip element and the moves taken so far."""
    current: LoopTable
    labels: np.ndarray
    h: int
    count: int
    steps: List[GreedyStep] = field(default_factory=list)

    @property
    def coset_count(self) -> int:
        return int(self.labels.max()) + 1

    def pairs(self) -> List[Tuple[int, int]]:
        k = self.coset_count
        return [(i, j) for i in range(1, k) for j in range(i + 1, k)]

    def evaluate(self, workers: int = 1) -> List[int]:
        table = self.current.table
        pairs = self.pairs()
        if workers > 1:
            return Parallel(n_jobs=workers)(
                delayed(_candidate_count)(table, self.labels, self.h, i, j) for i, j in pairs)
        return [_candidate_count(table, self.labels, self.h, i, j) for i, j in pairs]

    def step(self, workers: int = 1) -> bool:
        """Apply the best strictly improving move; False when there is none."""
        pairs = self.pairs()
        if not pairs or self.count == 0:
            return False
        counts = self.evaluate(workers)
        best = min(range(len(pairs)), key=lambda k: (counts[k], pairs[k]))
        if counts[best] >= self.count:
            return False
        i, j = pairs[best]
        table = flip_blocks(self.current.table, self.labels, self.h, i, j)
        self.current = validate_table(table, name=self.current.name)
        self.count = counts[best]
        self.steps.append(GreedyStep(pair=(i + 1, j + 1), mu_count=self.count))
        logger.debug("Greedy step", pair=(i + 1, j + 1), mu_count=self.count)
        return True


def greedy_minimize(Q: LoopTable, N: SubloopMask, h: Union[int, str] = "auto",
                    workers: int = 1, max_steps: Optional[int] = None
                    ) -> Tuple[LoopTable, GreedyHistory]:
    """Run the descent from Q; returns the final table and the move history."""
    if not is_normal(Q, N):
        raise BadCosetStructure("the subloop is not normal")
    labels, _ = coset_partition(Q, N)
    h = resolve_flip_element(Q, N, h)
    start = mu_count(Q)
    state = GreedyState(current=Q, labels=labels, h=h, count=start)
    logger.info("Greedy descent started", order=Q.n, cosets=state.coset_count, h=h,
                mu_count=start)
    while max_steps is None or len(state.steps) < max_steps:
        if not state.step(workers):
            break
    history = GreedyHistory(initial_mu_count=start, final_mu_count=state.count,
                            coset_count=state.coset_count, h=h, steps=state.steps)
    logger.info("Greedy descent finished", order=Q.n, steps=len(state.steps),
                mu_count=state.count)
    return state.current, history
